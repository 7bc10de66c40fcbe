#pragma once

// Internal lengths are meters. The public API takes nm / um / mm / degC and
// converts here.

#include <numbers>

namespace fldi::units {

inline constexpr double kPi = std::numbers::pi;

constexpr double nm_to_m(double nm) { return nm * 1e-9; }
constexpr double um_to_m(double um) { return um * 1e-6; }
constexpr double mm_to_m(double mm) { return mm * 1e-3; }
constexpr double m_to_nm(double m) { return m * 1e9; }
constexpr double m_to_um(double m) { return m * 1e6; }

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

constexpr double ns_to_s(double ns) { return ns * 1e-9; }
constexpr double ns_to_ps(double ns) { return ns * 1e3; }
constexpr double s_to_ps(double s) { return s * 1e12; }

}  // namespace fldi::units
