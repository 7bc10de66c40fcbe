#include "fldi/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fldi/errors.hpp"

namespace fldi::qpm {

namespace {

double poly_inverse(const std::vector<double>& c, std::size_t offset, double l) {
  double sum = 0.0;
  double p = 1.0;
  for (std::size_t m = 0; m < 4; ++m) {
    sum += c[offset + m] / p;
    p *= l;
  }
  return sum;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

DispersionModel DispersionModel::ktp_z() {
  DispersionModel m;
  m.name = "KTP-z Fradkin1999 + Emanueli2003";
  m.axis = "z";
  m.coefficients = {
      // Fradkin et al., room-temperature Sellmeier for n_z
      2.12725, 1.18431, 5.14852e-2, 0.6603, 100.00507, 9.68956e-3,
      // Emanueli & Arie, first-order thermal coefficients
      9.9587e-6, 9.9228e-6, -8.9603e-6, 4.1010e-6,
      // second-order thermal coefficients
      -1.1882e-8, 10.459e-8, -9.8136e-8, 3.1481e-8};
  m.lambda_min_nm = 380.0;
  m.lambda_max_nm = 1600.0;
  m.temp_min_c = 0.0;
  m.temp_max_c = 150.0;
  m.citation =
      "K. Fradkin et al., Appl. Phys. Lett. 74, 914 (1999); "
      "S. Emanueli and A. Arie, Appl. Opt. 42, 6661 (2003)";
  return m;
}

void DispersionModel::validate() const {
  if (coefficients.size() != kDispersionCoefficientCount) {
    throw DomainError("dispersion model '" + name + "' needs " + std::to_string(kDispersionCoefficientCount) +
                      " coefficients, got " + std::to_string(coefficients.size()));
  }
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw DomainError("dispersion coefficients must be finite");
  }
  if (!(lambda_min_nm > 0 && lambda_max_nm > lambda_min_nm)) throw DomainError("invalid wavelength range");
  if (!(temp_max_c > temp_min_c)) throw DomainError("invalid temperature range");
}

DispersionModel DispersionModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("dispersion file: ") + e.what());
  }
  static const char* kKeys[] = {"name", "axis", "coefficients", "lambda_range_nm", "temp_range_C", "citation"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : kKeys) known = known || it.key() == k;
    if (!known) throw ConfigError("/" + it.key(), "unknown key in dispersion file");
  }
  DispersionModel m;
  try {
    m.name = j.at("name").get<std::string>();
    m.axis = j.at("axis").get<std::string>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    const auto lr = j.at("lambda_range_nm").get<std::vector<double>>();
    const auto tr = j.at("temp_range_C").get<std::vector<double>>();
    if (lr.size() != 2 || tr.size() != 2) throw DataError("ranges must have two entries");
    m.lambda_min_nm = lr[0];
    m.lambda_max_nm = lr[1];
    m.temp_min_c = tr[0];
    m.temp_max_c = tr[1];
    m.citation = j.at("citation").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("dispersion file: ") + e.what());
  }
  m.validate();
  return m;
}

DispersionModel DispersionModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dispersion file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string DispersionModel::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["axis"] = axis;
  j["coefficients"] = coefficients;
  j["lambda_range_nm"] = {lambda_min_nm, lambda_max_nm};
  j["temp_range_C"] = {temp_min_c, temp_max_c};
  j["citation"] = citation;
  return j.dump(2);
}

double refractive_index(const DispersionModel& model, double lambda_nm, double temp_c) {
  if (!(lambda_nm >= model.lambda_min_nm)) {
    throw RangeError("wavelength " + fmt(lambda_nm) + " nm below lower bound " + fmt(model.lambda_min_nm) + " nm");
  }
  if (!(lambda_nm <= model.lambda_max_nm)) {
    throw RangeError("wavelength " + fmt(lambda_nm) + " nm above upper bound " + fmt(model.lambda_max_nm) + " nm");
  }
  if (!(temp_c >= model.temp_min_c)) {
    throw RangeError("temperature " + fmt(temp_c) + " C below lower bound " + fmt(model.temp_min_c) + " C");
  }
  if (!(temp_c <= model.temp_max_c)) {
    throw RangeError("temperature " + fmt(temp_c) + " C above upper bound " + fmt(model.temp_max_c) + " C");
  }
  const auto& c = model.coefficients;
  const double l = lambda_nm * 1e-3;
  const double l2 = l * l;
  const double n0 = std::sqrt(c[0] + c[1] / (1.0 - c[2] / l2) + c[3] / (1.0 - c[4] / l2) - c[5] * l2);
  const double dt = temp_c - 25.0;
  return n0 + poly_inverse(c, 6, l) * dt + poly_inverse(c, 10, l) * dt * dt;
}

}  // namespace fldi::qpm
