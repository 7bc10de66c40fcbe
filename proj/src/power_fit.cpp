#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "fldi/analysis.hpp"
#include "fldi/csv.hpp"
#include "fldi/errors.hpp"

namespace fldi::analysis {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-10;

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct SimplexResult {
  Eigen::VectorXd x;
  double f;
  int iterations;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
SimplexResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, double floor, int max_iter = 4000) {
  const auto n = x0.size();
  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fv(static_cast<std::size_t>(n + 1));
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& x = v[static_cast<std::size_t>(k + 1)];
    x(k) += x(k) != 0 ? 0.5 * x(k) : 0.1;
  }
  for (std::size_t k = 0; k < v.size(); ++k) fv[k] = f(v[k]);

  std::vector<std::size_t> idx(v.size());
  int it = 0;
  for (; it < max_iter; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second = idx[idx.size() - 2];
    if (std::isfinite(fv[worst]) && fv[worst] - fv[best] <= kRelTol * std::abs(fv[best]) + floor) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) centroid += v[idx[k]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - v[worst]);
    const double fr = f(xr);
    if (fr < fv[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        v[worst] = xe, fv[worst] = fe;
      } else {
        v[worst] = xr, fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      v[worst] = xr, fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (v[worst] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : fv[worst])) {
      v[worst] = xc, fv[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k == best) continue;
      v[k] = v[best] + 0.5 * (v[k] - v[best]);
      fv[k] = f(v[k]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {v[best], fv[best], it};
}

struct Problem {
  PowerModel model;
  std::span<const double> p;
  std::span<const double> y;

  // Residuals and Jacobian of y_model - y; false if outside the model domain.
  bool residuals(const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const auto n = static_cast<Eigen::Index>(p.size());
    r.resize(n);
    if (jac) jac->resize(n, q.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = p[static_cast<std::size_t>(i)];
      if (model == PowerModel::kLogForm) {
        const double arg = q(1) * pi + q(2);
        if (!(arg > 0)) return false;
        r(i) = q(0) * std::log(arg) - y[static_cast<std::size_t>(i)];
        if (jac) jac->row(i) << std::log(arg), q(0) * pi / arg, q(0) / arg;
      } else {
        const double den = pi + q(1);
        if (!(den > 0)) return false;
        r(i) = q(0) + 1.0 / den - y[static_cast<std::size_t>(i)];
        if (jac) jac->row(i) << 1.0, -1.0 / (den * den);
      }
    }
    return r.allFinite();
  }

  double ssr(const Eigen::VectorXd& q) const {
    Eigen::VectorXd r;
    return residuals(q, r, nullptr) ? r.squaredNorm() : kInf;
  }

  // Full parameter vector from the nonlinear ones with the amplitude a profiled out.
  Eigen::VectorXd complete(const Eigen::VectorXd& nl) const {
    const auto n = p.size();
    Eigen::VectorXd q(nl.size() + 1);
    q.tail(nl.size()) = nl;
    if (model == PowerModel::kLogForm) {
      double gy = 0, gg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double arg = nl(0) * p[i] + nl(1);
        if (!(arg > 0)) {
          q(0) = std::numeric_limits<double>::quiet_NaN();
          return q;
        }
        const double g = std::log(arg);
        gy += g * y[i];
        gg += g * g;
      }
      q(0) = gg > 0 ? gy / gg : std::numeric_limits<double>::quiet_NaN();
    } else {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double den = p[i] + nl(0);
        if (!(den > 0)) {
          q(0) = std::numeric_limits<double>::quiet_NaN();
          return q;
        }
        s += y[i] - 1.0 / den;
      }
      q(0) = s / static_cast<double>(n);
    }
    return q;
  }

  double profiled_ssr(const Eigen::VectorXd& nl) const {
    const Eigen::VectorXd q = complete(nl);
    return std::isfinite(q(0)) ? ssr(q) : kInf;
  }
};

std::vector<Eigen::VectorXd> starts(PowerModel model, std::span<const double> p) {
  std::vector<double> sorted(p.begin(), p.end());
  std::sort(sorted.begin(), sorted.end());
  const double med = sorted[sorted.size() / 2];
  std::vector<Eigen::VectorXd> out;
  if (model == PowerModel::kLogForm) {
    for (double bs : {0.1, 1.0, 10.0, 100.0}) {
      for (double c : {0.5, 2.0}) out.push_back(Eigen::Vector2d(bs / med, c));
    }
  } else {
    for (double bs : {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0}) out.push_back(Eigen::VectorXd::Constant(1, bs * med));
  }
  return out;
}

}  // namespace

std::string_view to_string(PowerModel model) {
  return model == PowerModel::kLogForm ? "log-form" : "inverse-form";
}

double evaluate_power_model(PowerModel model, std::span<const double> q, double p) {
  if (model == PowerModel::kLogForm) {
    if (q.size() != 3) throw DomainError("log-form takes parameters (a, b, c)");
    return q[0] * std::log(q[1] * p + q[2]);
  }
  if (q.size() != 2) throw DomainError("inverse-form takes parameters (a, b)");
  return q[0] + 1.0 / (p + q[1]);
}

double FitResult::operator()(double p) const { return evaluate_power_model(model, parameters, p); }

std::string FitResult::report() const {
  static constexpr const char* names[] = {"a", "b", "c"};
  std::ostringstream os;
  os << "model: " << to_string(model) << '\n';
  for (std::size_t k = 0; k < parameters.size(); ++k) {
    os << names[k] << ": " << csv::num(parameters[k]) << " +- " << csv::num(uncertainties[k]) << '\n';
  }
  os << "residual_norm: " << csv::num(residual_norm) << '\n'
     << "gradient_norm: " << csv::num(gradient_norm) << '\n'
     << "iterations: " << iterations << '\n'
     << "converged: " << (converged ? "true" : "false") << '\n';
  return os.str();
}

FitResult fit_power_model(std::span<const double> p, std::span<const double> y, PowerModel model) {
  if (p.size() != y.size()) throw DomainError("P and y sizes differ");
  if (p.size() < 4) throw DomainError("power-model fit needs at least 4 points");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0) || !std::isfinite(p[i])) throw DomainError("pump powers must be positive");
    if (!std::isfinite(y[i])) throw DomainError("fit data must be finite");
  }
  if (std::all_of(p.begin(), p.end(), [&](double x) { return x == p[0]; })) {
    throw DataError("degenerate fit data: all pump powers are equal");
  }

  const Problem prob{model, p, y};
  double y_scale = 0;
  for (double v : y) y_scale += v * v;
  const double floor = 1e-30 * std::max(y_scale, 1e-300);

  FitResult out;
  out.model = model;
  Eigen::VectorXd best_q;
  double best_f = kInf;
  for (const auto& s : starts(model, p)) {
    const auto nm = nelder_mead([&](const Eigen::VectorXd& nl) { return prob.profiled_ssr(nl); }, s, floor);
    out.iterations += nm.iterations;
    if (nm.f < best_f) {
      best_f = nm.f;
      best_q = prob.complete(nm.x);
    }
  }
  if (!std::isfinite(best_f)) {
    throw NumericError("power-model fit found no start inside the model domain", best_f);
  }

  // Levenberg-damped Gauss-Newton polish on all parameters.
  Eigen::VectorXd q = best_q, r;
  Eigen::MatrixXd jac;
  double f = best_f, lambda = 1e-6;
  bool settled = false;
  for (int it = 0; it < 200 && !settled; ++it, ++out.iterations) {
    prob.residuals(q, r, &jac);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::VectorXd step = a.completeOrthogonalDecomposition().solve(-g);
      const Eigen::VectorXd cand = q + step;
      const double fc = prob.ssr(cand);
      if (fc <= f) {
        const double change = f - fc;
        q = cand;
        f = fc;
        lambda = std::max(lambda / 10, 1e-12);
        improved = true;
        settled = change <= kRelTol * f + floor;
      } else {
        lambda *= 10;
      }
    }
    if (!improved) break;
  }

  prob.residuals(q, r, &jac);
  const auto n = static_cast<double>(p.size());
  const auto k = static_cast<double>(q.size());
  out.parameters.assign(q.data(), q.data() + q.size());
  out.residual_norm = r.norm();
  out.gradient_norm = (jac.transpose() * r).norm();
  const double s2 = n > k ? r.squaredNorm() / (n - k) : kInf;
  // Column-scaled normal matrix; directions it cannot resolve get infinite variance.
  const Eigen::Index m = jac.cols();
  Eigen::VectorXd scale = jac.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(scale(i) > 0)) scale(i) = 1;
  }
  const Eigen::MatrixXd js = jac * scale.cwiseInverse().asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(js.transpose() * js);
  const Eigen::VectorXd lam = eig.eigenvalues();
  const Eigen::MatrixXd vec = eig.eigenvectors();
  const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 0.0);
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(m, m);
  std::vector<bool> unresolved(static_cast<std::size_t>(m), false);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (lam(j) > cutoff) {
      inv += vec.col(j) * vec.col(j).transpose() / lam(j);
    } else {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (std::abs(vec(i, j)) > 1e-6) unresolved[static_cast<std::size_t>(i)] = true;
      }
    }
  }
  out.covariance = scale.cwiseInverse().asDiagonal() * inv * scale.cwiseInverse().asDiagonal() * s2;
  out.uncertainties.resize(out.parameters.size());
  for (std::size_t i = 0; i < out.uncertainties.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (unresolved[i]) {
      out.covariance.row(ii).setConstant(kInf);
      out.covariance.col(ii).setConstant(kInf);
    }
    out.uncertainties[i] = unresolved[i] ? kInf : std::sqrt(std::max(0.0, out.covariance(ii, ii)));
  }
  const double jnorm = jac.norm();
  out.converged = std::isfinite(out.residual_norm) &&
                  out.gradient_norm <= 1e-6 * jnorm * out.residual_norm + 1e-12 * jnorm * std::sqrt(y_scale);
  return out;
}

}  // namespace fldi::analysis
