#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fldi/analysis.hpp"
#include "fldi/errors.hpp"
#include "support.hpp"

using namespace fldi;
using namespace fldi::analysis;

namespace {

const std::vector<double> kGrid{0.01, 0.02, 0.05, 0.086, 0.15, 0.3, 0.5, 0.75, 1.0, 1.5};

std::vector<double> synth(PowerModel m, const std::vector<double>& params, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> y;
  for (double p : kGrid) {
    const double v = evaluate_power_model(m, params, p);
    y.push_back(v * (1 + noise * g(rng)));
  }
  return y;
}

}  // namespace

TEST_CASE("model evaluation") {
  const std::vector<double> lf{2, 3, 1.5}, inv{0.1, 0.5};
  CHECK(evaluate_power_model(PowerModel::kLogForm, lf, 0.5) == doctest::Approx(2 * std::log(3.0)));
  CHECK(evaluate_power_model(PowerModel::kInverseForm, inv, 0.5) == doctest::Approx(1.1));
  CHECK(to_string(PowerModel::kLogForm) == "log-form");
  CHECK(to_string(PowerModel::kInverseForm) == "inverse-form");
}

TEST_CASE("log-form fit recovers parameters within 1 percent at 0.1 percent noise") {
  test::Gen g(101);
  for (int k = 0; k < 10; ++k) {
    const std::vector<double> truth{g.uniform(1e4, 1e6), g.uniform(2, 20), g.uniform(1.0, 3.0)};
    const auto y = synth(PowerModel::kLogForm, truth, 1e-3, g.next());
    const auto fit = fit_power_model(kGrid, y, PowerModel::kLogForm);
    CHECK(fit.converged);
    // Parameters trade off, so compare the fitted curve.
    for (double p : kGrid) CHECK(fit(p) == doctest::Approx(evaluate_power_model(PowerModel::kLogForm, truth, p)).epsilon(0.01));
    CHECK(fit.parameters.size() == 3);
    CHECK(fit.uncertainties.size() == 3);
  }
}

TEST_CASE("inverse-form fit recovers parameters within 1 percent at 0.1 percent noise") {
  test::Gen g(102);
  for (int k = 0; k < 10; ++k) {
    const std::vector<double> truth{g.uniform(0.5, 3), g.uniform(0.3, 2)};
    const auto y = synth(PowerModel::kInverseForm, truth, 1e-3, g.next());
    const auto fit = fit_power_model(kGrid, y, PowerModel::kInverseForm);
    CHECK(fit.converged);
    CHECK(fit.parameters[0] == doctest::Approx(truth[0]).epsilon(0.01));
    CHECK(fit.parameters[1] == doctest::Approx(truth[1]).epsilon(0.01));
  }
}

TEST_CASE("noiseless data converge to the generating curve") {
  const std::vector<double> truth{5e5, 8, 1.2};
  const auto y = synth(PowerModel::kLogForm, truth, 0, 0);
  const auto fit = fit_power_model(kGrid, y, PowerModel::kLogForm);
  CHECK(fit.converged);
  CHECK(fit.residual_norm < 1e-6 * 5e5);
  const auto r = fit.report();
  CHECK(r.find("model: log-form") != std::string::npos);
  CHECK(r.find("converged: true") != std::string::npos);
}

TEST_CASE("constant data fit without blowing up") {
  const std::vector<double> y(kGrid.size(), 2.5);
  const auto fit = fit_power_model(kGrid, y, PowerModel::kInverseForm);
  for (double p : kGrid) CHECK(fit(p) == doctest::Approx(2.5).epsilon(1e-3));
  CHECK(std::isfinite(fit.residual_norm));
}

TEST_CASE("fitted curve follows monotone data") {
  std::vector<double> y;
  for (double p : kGrid) y.push_back(3e5 * std::log(10 * p + 1));
  const auto fit = fit_power_model(kGrid, y, PowerModel::kLogForm);
  for (std::size_t i = 1; i < kGrid.size(); ++i) CHECK(fit(kGrid[i]) > fit(kGrid[i - 1]));
}

TEST_CASE("input errors") {
  const std::vector<double> p3{0.1, 0.2, 0.3}, y3{1, 2, 3};
  CHECK_THROWS_AS(fit_power_model(p3, y3, PowerModel::kLogForm), DomainError);
  const std::vector<double> p4{0.1, 0.2, 0.0, 0.3}, y4{1, 2, 3, 4};
  CHECK_THROWS_AS(fit_power_model(p4, y4, PowerModel::kLogForm), DomainError);
  const std::vector<double> same{0.2, 0.2, 0.2, 0.2};
  CHECK_THROWS_AS(fit_power_model(same, y4, PowerModel::kInverseForm), DataError);
  const std::vector<double> p5{0.1, 0.2, 0.3, 0.4}, bad{1, 2, std::nan(""), 4};
  CHECK_THROWS_AS(fit_power_model(p5, bad, PowerModel::kInverseForm), DomainError);
}
