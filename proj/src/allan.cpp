#include <cmath>
#include <limits>

#include "fldi/analysis.hpp"
#include "fldi/csv.hpp"
#include "fldi/errors.hpp"

namespace fldi::analysis {

void TimeSeries::validate() const {
  if (!(interval_s > 0) || !std::isfinite(interval_s)) throw DomainError("sample interval must be positive");
  for (double x : samples) {
    if (!std::isfinite(x)) throw DataError("time series contains a non-finite sample");
  }
}

std::string AllanCurve::csv() const {
  std::string s = "averaging_time_s,sigma,n_samples\n";
  for (const auto& p : points) {
    s += csv::num(p.averaging_time_s) + ',' + csv::num(p.valid ? p.sigma : std::nan("")) + ',' +
         std::to_string(p.n_samples) + '\n';
  }
  return s;
}

AllanCurve allan_deviation(const TimeSeries& series, std::span<const std::size_t> factors) {
  series.validate();
  const std::size_t n_tot = series.n_total();
  // Prefix sums of offsets from the first sample, so a constant series gives
  // exactly zero block differences.
  std::vector<long double> prefix(n_tot + 1, 0.0L);
  const double ref = n_tot ? series.samples.front() : 0.0;
  for (std::size_t i = 0; i < n_tot; ++i) prefix[i + 1] = prefix[i] + (series.samples[i] - ref);

  AllanCurve curve;
  for (std::size_t n : factors) {
    AllanPoint p;
    p.factor = n;
    p.averaging_time_s = static_cast<double>(n) * series.interval_s;
    if (n < 1) {
      p.valid = false;
      p.error = "averaging factor must be >= 1";
    } else if (2 * n > n_tot) {
      p.valid = false;
      p.error = "need at least 2N samples";
    } else {
      const std::size_t terms = n_tot - 2 * n + 1;
      long double acc = 0;
      for (std::size_t i = 0; i < terms; ++i) {
        const long double d = (prefix[i + 2 * n] - 2 * prefix[i + n] + prefix[i]) / static_cast<long double>(n);
        acc += d * d;
      }
      p.sigma = static_cast<double>(std::sqrt(acc / (2.0L * static_cast<long double>(terms))));
      p.n_samples = terms;
    }
    if (!p.valid) p.sigma = std::numeric_limits<double>::quiet_NaN();
    curve.points.push_back(std::move(p));
  }
  return curve;
}

std::vector<std::size_t> log_spaced_factors(std::size_t n_total, int per_decade) {
  if (per_decade < 1) throw DomainError("per_decade must be >= 1");
  std::vector<std::size_t> out;
  const std::size_t max_n = n_total / 2;
  for (int k = 0;; ++k) {
    const auto n = static_cast<std::size_t>(std::llround(std::pow(10.0, static_cast<double>(k) / per_decade)));
    if (n > max_n) break;
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("x and y sizes differ");
  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      fit.warnings.push_back("point " + std::to_string(i) + " excluded (non-positive or invalid)");
      continue;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const std::size_t m = lx.size();
  if (m < 3) throw DomainError("log-log slope needs at least 3 valid points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("log-log slope needs distinct abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points_used = m;
  return fit;
}

SlopeFit loglog_slope(const AllanCurve& curve) {
  std::vector<double> x, y;
  for (const auto& p : curve.points) {
    x.push_back(p.averaging_time_s);
    y.push_back(p.valid ? p.sigma : std::numeric_limits<double>::quiet_NaN());
  }
  return loglog_slope(x, y);
}

}  // namespace fldi::analysis
