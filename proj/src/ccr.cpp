#include "fldi/ccr.hpp"

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "fldi/csv.hpp"
#include "fldi/errors.hpp"

namespace fldi::optics {

namespace {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

struct LabBasis {
  Vec3 k;
  Vec3 h;
  Vec3 v;
};

LabBasis lab_basis(double orientation_deg) {
  const Vec3 k = -Vec3::Ones().normalized();
  const Vec3 z = Vec3::UnitZ();
  const Vec3 h0 = (z - z.dot(k) * k).normalized();
  const Vec3 v0 = k.cross(h0);
  const double a = units::deg_to_rad(orientation_deg);
  const Vec3 h = std::cos(a) * h0 + std::sin(a) * v0;
  return {k, h, k.cross(h)};
}

FresnelCoefficients<double> face_coefficients(const CcrModel& m) {
  const double theta = ccr_face_incidence_deg();
  switch (m.kind) {
    case CcrKind::kIdeal:
      return {std::complex<double>(-1.0), std::complex<double>(-1.0)};
    case CcrKind::kUncoatedSolid:
      return fresnel_reflection<double>(theta, m.substrate_index, 1.0);
    case CcrKind::kGoldSolid:
      return fresnel_reflection<double>(theta, m.substrate_index, m.metal_index);
    case CcrKind::kSilverHollow:
      return fresnel_reflection<double>(theta, 1.0, m.metal_index);
  }
  throw DomainError("unknown CCR kind");
}

// Reflect a complex field off a plane with unit normal n. The s axis is
// perpendicular to the plane of incidence; p components map onto the mirror
// image of the incident p axis.
CVec3 reflect_field(const CVec3& e, Vec3& k, const Vec3& n, const FresnelCoefficients<double>& r) {
  Vec3 s = k.cross(n);
  const Vec3 mirror_k = k - 2.0 * k.dot(n) * n;
  if (s.norm() < 1e-14) {
    // Normal incidence: any transverse basis works.
    s = (std::abs(k.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(k);
  }
  s.normalize();
  const Vec3 p = s.cross(k);
  const Vec3 p_mirror = p - 2.0 * p.dot(n) * n;
  const std::complex<double> es = s.cast<std::complex<double>>().dot(e);
  const std::complex<double> ep = p.cast<std::complex<double>>().dot(e);
  k = mirror_k;
  return r.r_s * es * s.cast<std::complex<double>>() + r.r_p * ep * p_mirror.cast<std::complex<double>>();
}

PolarizationOperator<double> jones_at(const CcrModel& m, double orientation_deg) {
  const auto r = face_coefficients(m);
  const LabBasis lab = lab_basis(orientation_deg);
  const std::array<Vec3, 3> normals = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  JonesMatrix<double> jm;
  const std::array<Vec3, 2> inputs = {lab.h, lab.v};
  for (int col = 0; col < 2; ++col) {
    CVec3 e = inputs[col].cast<std::complex<double>>();
    Vec3 k = lab.k;
    for (const auto& n : normals) e = reflect_field(e, k, n, r);
    jm(0, col) = lab.h.cast<std::complex<double>>().dot(e);
    jm(1, col) = lab.v.cast<std::complex<double>>().dot(e);
  }
  return PolarizationOperator<double>(jm);
}

double h_output_ellipticity(const CcrModel& m, double orientation_deg) {
  return jones_at(m, orientation_deg).apply(PolarizationState<double>::horizontal()).ellipticity_deg();
}

}  // namespace

std::string_view to_string(CcrKind kind) {
  switch (kind) {
    case CcrKind::kIdeal: return "ideal";
    case CcrKind::kUncoatedSolid: return "uncoated-solid";
    case CcrKind::kGoldSolid: return "gold-solid";
    case CcrKind::kSilverHollow: return "silver-hollow";
  }
  return "unknown";
}

CcrKind ccr_kind_from_string(std::string_view name) {
  for (auto k : {CcrKind::kIdeal, CcrKind::kUncoatedSolid, CcrKind::kGoldSolid, CcrKind::kSilverHollow}) {
    if (name == to_string(k)) return k;
  }
  throw UsageError("unknown CCR model '" + std::string(name) +
                   "'; valid names: ideal, uncoated-solid, gold-solid, silver-hollow");
}

CcrModel CcrModel::ideal() { return CcrModel{}; }

CcrModel CcrModel::uncoated_solid(double glass_index) {
  CcrModel m;
  m.kind = CcrKind::kUncoatedSolid;
  m.substrate_index = glass_index;
  return m;
}

CcrModel CcrModel::gold_solid(std::complex<double> gold, double glass_index) {
  CcrModel m;
  m.kind = CcrKind::kGoldSolid;
  m.substrate_index = glass_index;
  m.metal_index = gold;
  // Gold reflects well under half of the 405 nm pump.
  m.pump_reflectance = 0.4;
  return m;
}

CcrModel CcrModel::silver_hollow(std::complex<double> silver) {
  CcrModel m;
  m.kind = CcrKind::kSilverHollow;
  m.metal_index = silver;
  return m;
}

CcrModel CcrModel::named(std::string_view name) {
  switch (ccr_kind_from_string(name)) {
    case CcrKind::kIdeal: return ideal();
    case CcrKind::kUncoatedSolid: return uncoated_solid();
    case CcrKind::kGoldSolid: return gold_solid();
    case CcrKind::kSilverHollow: return silver_hollow();
  }
  return ideal();
}

void CcrModel::validate() const {
  if (!(wavelength_nm > 0) || !std::isfinite(wavelength_nm)) throw DomainError("CCR wavelength must be positive");
  if (!(pump_reflectance >= 0 && pump_reflectance <= 1)) throw DomainError("pump reflectance must lie in [0, 1]");
  if (entry_orientation_deg && !std::isfinite(*entry_orientation_deg)) {
    throw DomainError("entry orientation must be finite");
  }
  const bool solid = kind == CcrKind::kUncoatedSolid || kind == CcrKind::kGoldSolid;
  const bool metal = kind == CcrKind::kGoldSolid || kind == CcrKind::kSilverHollow;
  if (solid && !(substrate_index.real() >= 1.0 && substrate_index.imag() == 0.0)) {
    throw DomainError("substrate index must be real and >= 1");
  }
  if (metal) {
    if (!std::isfinite(metal_index.real()) || !std::isfinite(metal_index.imag())) {
      throw DomainError("metal index must be finite");
    }
    if (metal_index.imag() < 0) throw DomainError("metal index has negative imaginary part (gain)");
  }
  if (kind == CcrKind::kUncoatedSolid) {
    const double sin_i = std::sin(units::deg_to_rad(ccr_face_incidence_deg()));
    if (!(substrate_index.real() * sin_i > 1.0)) {
      throw DomainError("uncoated solid CCR requires total internal reflection (n sin(theta) > 1)");
    }
  }
}

double ccr_face_incidence_deg() { return units::rad_to_deg(std::acos(1.0 / std::sqrt(3.0))); }

FresnelCoefficients<double> ccr_face_coefficients(const CcrModel& model) {
  model.validate();
  return face_coefficients(model);
}

double aligned_entry_orientation_deg(const CcrModel& model) {
  model.validate();
  if (model.kind == CcrKind::kIdeal) return 0.0;
  // chi(H) is antiperiodic with period 90 deg in the orientation, so [0, 90]
  // always brackets a root. Take the sign change closest to 45 deg.
  double best = 45.0;
  double best_dist = 1e9;
  double prev = h_output_ellipticity(model, 0.0);
  for (int i = 1; i <= 90; ++i) {
    const double cur = h_output_ellipticity(model, i);
    if ((prev <= 0) != (cur <= 0)) {
      double lo = i - 1, hi = i, flo = prev;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = h_output_ellipticity(model, mid);
        if ((fm <= 0) == (flo <= 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double root = 0.5 * (lo + hi);
      if (std::abs(root - 45.0) < best_dist) {
        best_dist = std::abs(root - 45.0);
        best = root;
      }
    }
    prev = cur;
  }
  return best;
}

PolarizationOperator<double> ccr_reflect(const CcrModel& model) {
  model.validate();
  const double orientation = model.entry_orientation_deg ? *model.entry_orientation_deg
                                                         : aligned_entry_orientation_deg(model);
  return jones_at(model, orientation);
}

std::vector<CcrSweepPoint> ccr_polarization_sweep(const CcrModel& model, std::span<const double> hwp_angles_deg) {
  if (hwp_angles_deg.empty()) throw DomainError("HWP angle list is empty");
  const auto ccr = ccr_reflect(model);
  std::vector<CcrSweepPoint> out;
  out.reserve(hwp_angles_deg.size());
  for (double theta : hwp_angles_deg) {
    const auto in = half_wave_plate<double>(theta).apply(PolarizationState<double>::horizontal());
    const auto reflected = ccr.apply(in);
    out.push_back({theta, reflected.orientation_deg(), reflected.ellipticity_deg()});
  }
  return out;
}

double orientation_error_deg(const CcrSweepPoint& p) {
  double d = std::fmod(p.orientation_deg - 2.0 * p.hwp_angle_deg, 180.0);
  if (d > 90.0) d -= 180.0;
  if (d <= -90.0) d += 180.0;
  return d;
}

std::string ccr_sweep_csv(std::span<const CcrSweepPoint> points) {
  std::string out = "hwp_angle_deg,orientation_deg,ellipticity_deg\n";
  for (const auto& p : points) {
    out += csv::num(p.hwp_angle_deg) + "," + csv::num(p.orientation_deg) + "," + csv::num(p.ellipticity_deg) + "\n";
  }
  return out;
}

}  // namespace fldi::optics
