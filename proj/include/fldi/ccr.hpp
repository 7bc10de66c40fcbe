#pragma once

// Corner-cube retroreflector polarization model.
//
// Cube frame: mirror normals x, y, z; the beam enters along -(1,1,1)/sqrt(3)
// and hits the faces in the fixed order x -> y -> z (one sextant). Each face
// is met at arccos(1/sqrt(3)) ~ 54.7356 deg. The field is traced as a 3-vector
// and projected back onto fixed lab H/V vectors, so a perfect conductor cube
// maps every input to itself.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fldi/fresnel.hpp"
#include "fldi/polarization.hpp"

namespace fldi::optics {

enum class CcrKind { kIdeal, kUncoatedSolid, kGoldSolid, kSilverHollow };

std::string_view to_string(CcrKind kind);
/// Throws UsageError listing the valid names.
CcrKind ccr_kind_from_string(std::string_view name);

/// Built-in optical constants (n + i*kappa) at 785 nm.
namespace constants {
inline constexpr double kBk7Index = 1.51;
inline const std::complex<double> kGold785{0.15, 4.80};
inline const std::complex<double> kSilver785{0.035, 5.47};
}  // namespace constants

struct CcrModel {
  CcrKind kind = CcrKind::kIdeal;
  std::complex<double> substrate_index{1.0, 0.0};
  std::complex<double> metal_index{0.0, 0.0};
  double wavelength_nm = 785.0;
  /// Angle of lab H relative to the cube's reference direction (projection of
  /// the z edge). Unset means "aligned": the orientation at which an H input
  /// exits with zero ellipticity.
  std::optional<double> entry_orientation_deg;
  /// Power reflectance at the pump wavelength; feeds the double-pass weight.
  double pump_reflectance = 1.0;

  static CcrModel ideal();
  static CcrModel uncoated_solid(double glass_index = constants::kBk7Index);
  static CcrModel gold_solid(std::complex<double> gold = constants::kGold785,
                             double glass_index = constants::kBk7Index);
  static CcrModel silver_hollow(std::complex<double> silver = constants::kSilver785);
  static CcrModel named(std::string_view name);

  /// Throws DomainError if an invariant is violated.
  void validate() const;
};

/// Internal angle of incidence on every face, degrees.
double ccr_face_incidence_deg();

/// Jones matrix of the three-face chain in the lab basis.
PolarizationOperator<double> ccr_reflect(const CcrModel& model);

/// Per-face s/p power reflectances (identical for all three faces).
FresnelCoefficients<double> ccr_face_coefficients(const CcrModel& model);

/// Entry orientation at which H exits linear. Returns 0 for the ideal cube.
double aligned_entry_orientation_deg(const CcrModel& model);

struct CcrSweepPoint {
  double hwp_angle_deg;
  double orientation_deg;
  double ellipticity_deg;
};

/// Input H rotated to linear 2*theta by a HWP, reflected, decomposed.
std::vector<CcrSweepPoint> ccr_polarization_sweep(const CcrModel& model,
                                                  std::span<const double> hwp_angles_deg);

/// Signed orientation error wrapped to (-90, 90].
double orientation_error_deg(const CcrSweepPoint& p);

std::string ccr_sweep_csv(std::span<const CcrSweepPoint> points);

}  // namespace fldi::optics
