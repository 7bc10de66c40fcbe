#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fldi::qpm {

/// Temperature-dependent index for one crystal axis.
///
/// Coefficient layout (wavelength in um, temperature in degC):
///   [0..5]  A, B, C, D, E, F:
///           n0^2 = A + B / (1 - C / l^2) + D / (1 - E / l^2) - F * l^2
///   [6..9]  a0..a3:  n1(l) = sum_m a_m / l^m
///   [10..13] b0..b3: n2(l) = sum_m b_m / l^m
///   n(l, T) = n0(l) + n1(l) * (T - 25) + n2(l) * (T - 25)^2
struct DispersionModel {
  std::string name;
  std::string axis;
  std::vector<double> coefficients;
  double lambda_min_nm = 0;
  double lambda_max_nm = 0;
  double temp_min_c = 0;
  double temp_max_c = 0;
  std::string citation;

  /// Built-in KTP z-axis set; identical to data/ktp_z_fradkin_emanueli.json.
  static DispersionModel ktp_z();

  static DispersionModel from_json(const std::string& text);
  static DispersionModel load(const std::filesystem::path& path);
  std::string to_json() const;

  void validate() const;
};

inline constexpr std::size_t kDispersionCoefficientCount = 14;

/// Throws RangeError naming the violated bound.
double refractive_index(const DispersionModel& model, double lambda_nm, double temp_c);

}  // namespace fldi::qpm
