#include "eomech/params.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "eomech/constants.hpp"
#include "eomech/error.hpp"
#include "json.hpp"

namespace eom {

using json = nlohmann::json;

namespace {

// Config keys that carry a frequency and may therefore appear as either
// `<stem>_rad_s` or `<stem>_hz`.
constexpr const char* kFrequencyStems[] = {
    "omega_c", "omega_m", "gamma_m", "kappa", "omega_w", "kappa_w", "delta0c", "delta0w",
};

const std::set<std::string>& plain_keys() {
  static const std::set<std::string> keys = {
      "name",          "cavity_length_m",  "lambda_drive_m",    "mass_kg", "q_mechanical",
      "gap_m",         "mu",               "power_optical_w",   "power_microwave_w",
      "temperature_k", "g2_over_g1",       "reflectivity",      "g2_sign",
  };
  return keys;
}

// Human-readable field names used in error messages next to the raw key.
std::string field_label(const std::string& key) {
  static const std::pair<const char*, const char*> labels[] = {
      {"cavity_length_m", "cavity_length"},
      {"omega_c", "optical_angular_frequency"},
      {"lambda_drive_m", "drive_wavelength"},
      {"mass_kg", "membrane_mass"},
      {"omega_m", "mechanical_angular_frequency"},
      {"kappa", "optical_decay"},
      {"omega_w", "microwave_angular_frequency"},
      {"kappa_w", "microwave_decay"},
      {"gap_m", "capacitor_gap"},
      {"mu", "coupling_fraction"},
      {"power_optical_w", "optical_power"},
      {"power_microwave_w", "microwave_power"},
      {"delta0c", "bare_optical_detuning"},
      {"delta0w", "bare_microwave_detuning"},
      {"temperature_k", "bath_temperature"},
  };
  for (const auto& [k, label] : labels)
    if (key == k) return label;
  return key;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

double number_at(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(key, "key '" + key + "' must be a number");
  return v.get<double>();
}

double required(const json& doc, const std::string& key) {
  if (!doc.contains(key))
    throw ConfigError(key, "missing required key '" + key + "' (" + field_label(key) + ")");
  return number_at(doc, key);
}

// A frequency given as `<stem>_rad_s` or `<stem>_hz`, never both.
std::optional<double> frequency(const json& doc, const std::string& stem) {
  const std::string rad = stem + "_rad_s";
  const std::string hz = stem + "_hz";
  const bool has_rad = doc.contains(rad);
  const bool has_hz = doc.contains(hz);
  if (has_rad && has_hz)
    throw ConfigError(rad, "both '" + rad + "' and '" + hz + "' given for " + field_label(stem));
  if (has_rad) return number_at(doc, rad);
  if (has_hz) return constants::two_pi * number_at(doc, hz);
  return std::nullopt;
}

double required_frequency(const json& doc, const std::string& stem) {
  auto v = frequency(doc, stem);
  if (!v)
    throw ConfigError(stem + "_rad_s", "missing required key '" + stem + "_rad_s' (" +
                                           field_label(stem) + ")");
  return *v;
}

void require_positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(key, std::string(key) + " (" + field_label(key) + ") must be finite and > 0");
}

void require_nonnegative(double v, const char* key) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ConfigError(key, std::string(key) + " (" + field_label(key) + ") must be finite and >= 0");
}

void require_finite(double v, const char* key) {
  if (!std::isfinite(v))
    throw ConfigError(key, std::string(key) + " (" + field_label(key) + ") must be finite");
}

}  // namespace

double PhysicalConfig::gamma_m() const {
  if (const auto* q = std::get_if<QualityFactor>(&mechanical_loss)) return omega_m / q->value;
  return std::get<MechanicalDamping>(mechanical_loss).rad_s;
}

double thermal_occupation(double omega, double temperature) {
  if (temperature <= 0.0) return 0.0;
  const double x = constants::hbar * omega / (constants::k_boltzmann * temperature);
  // expm1 overflows to +inf for large x, which gives the correct limit of 0.
  return 1.0 / std::expm1(x);
}

double drive_amplitude(double power, double decay, double omega_drive) {
  return std::sqrt(2.0 * power * decay / (constants::hbar * omega_drive));
}

double zero_point_displacement(double mass, double omega_m) {
  return std::sqrt(constants::hbar / (mass * omega_m));
}

void validate(const PhysicalConfig& c) {
  require_positive(c.cavity_length, "cavity_length_m");
  require_positive(c.omega_c, "omega_c_rad_s");
  require_positive(c.lambda_drive, "lambda_drive_m");
  require_positive(c.mass, "mass_kg");
  require_positive(c.omega_m, "omega_m_rad_s");
  if (const auto* q = std::get_if<QualityFactor>(&c.mechanical_loss)) {
    require_positive(q->value, "q_mechanical");
  } else {
    require_positive(std::get<MechanicalDamping>(c.mechanical_loss).rad_s, "gamma_m_rad_s");
  }
  require_positive(c.kappa, "kappa_rad_s");
  require_positive(c.omega_w, "omega_w_rad_s");
  require_positive(c.kappa_w, "kappa_w_rad_s");
  require_positive(c.gap, "gap_m");
  // mu = 0 is allowed so the microwave circuit can be decoupled entirely.
  if (!(c.mu >= 0.0 && c.mu < 1.0)) throw ConfigError("mu", "mu (coupling_fraction) must lie in [0, 1)");
  require_nonnegative(c.power_optical, "power_optical_w");
  require_nonnegative(c.power_microwave, "power_microwave_w");
  require_finite(c.delta0c, "delta0c_rad_s");
  require_finite(c.delta0w, "delta0w_rad_s");
  require_nonnegative(c.temperature, "temperature_k");
  if (!(c.omega_w - c.delta0w > 0.0))
    throw ConfigError("delta0w_rad_s", "microwave drive frequency omega_w - delta0w must be > 0");
  if (const auto* r = std::get_if<MembraneReflectivity>(&c.quadratic)) {
    if (!(r->reflectivity >= 0.0 && r->reflectivity < 1.0))
      throw ConfigError("reflectivity", "reflectivity must lie in [0, 1)");
    if (r->sign != 1 && r->sign != -1) throw ConfigError("g2_sign", "g2_sign must be +1 or -1");
  } else {
    require_finite(std::get<CouplingRatio>(c.quadratic).g2_over_g1, "g2_over_g1");
  }
}

DerivedRates derive_couplings(const PhysicalConfig& c) {
  validate(c);
  DerivedRates r;
  const double xzpf = zero_point_displacement(c.mass, c.omega_m);
  r.g1 = c.omega_c / c.cavity_length * xzpf;
  r.gw = c.mu * c.omega_w / (2.0 * c.gap) * xzpf;
  if (const auto* refl = std::get_if<MembraneReflectivity>(&c.quadratic)) {
    const double pi = constants::two_pi / 2.0;
    const double mag = 8.0 * pi * pi * constants::speed_of_light /
                       (c.lambda_drive * c.lambda_drive * c.cavity_length) *
                       std::sqrt(refl->reflectivity / (1.0 - refl->reflectivity)) * xzpf * xzpf;
    r.g2 = refl->sign * mag;
  } else {
    r.g2 = r.g1 * std::get<CouplingRatio>(c.quadratic).g2_over_g1;
  }
  const double omega_d = constants::two_pi * constants::speed_of_light / c.lambda_drive;
  const double omega_dw = c.omega_w - c.delta0w;
  r.drive = drive_amplitude(c.power_optical, c.kappa, omega_d);
  r.drive_w = drive_amplitude(c.power_microwave, c.kappa_w, omega_dw);
  r.n_c = thermal_occupation(c.omega_c, c.temperature);
  r.n_w = thermal_occupation(c.omega_w, c.temperature);
  r.n_m = thermal_occupation(c.omega_m, c.temperature);
  r.gamma_m = c.gamma_m();
  r.omega_m = c.omega_m;
  r.kappa = c.kappa;
  r.kappa_w = c.kappa_w;
  r.delta0c = c.delta0c;
  r.delta0w = c.delta0w;
  return r;
}

PhysicalConfig load_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::ostringstream msg;
    msg << "config parse error at line " << line << ", column " << col << ": " << e.what();
    throw ConfigError("", msg.str());
  }
  if (!doc.is_object()) throw ConfigError("", "config document must be a JSON object");

  for (const auto& [key, _] : doc.items()) {
    if (plain_keys().count(key)) continue;
    bool known = false;
    for (const char* stem : kFrequencyStems) {
      const std::string s(stem);
      if (key == s + "_rad_s" || key == s + "_hz") known = true;
    }
    if (!known) throw ConfigError(key, "unknown config key '" + key + "'");
  }

  PhysicalConfig c;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ConfigError("name", "key 'name' must be a string");
    c.name = doc["name"].get<std::string>();
  }
  c.cavity_length = required(doc, "cavity_length_m");
  c.omega_c = required_frequency(doc, "omega_c");
  c.lambda_drive = required(doc, "lambda_drive_m");
  c.mass = required(doc, "mass_kg");
  c.omega_m = required_frequency(doc, "omega_m");

  const bool has_q = doc.contains("q_mechanical");
  const auto gamma = frequency(doc, "gamma_m");
  if (has_q == gamma.has_value())
    throw ConfigError("q_mechanical",
                      "exactly one of Qm, γm must be given (keys q_mechanical, gamma_m_rad_s)");
  if (has_q)
    c.mechanical_loss = QualityFactor{number_at(doc, "q_mechanical")};
  else
    c.mechanical_loss = MechanicalDamping{*gamma};

  c.kappa = required_frequency(doc, "kappa");
  c.omega_w = required_frequency(doc, "omega_w");
  c.kappa_w = required_frequency(doc, "kappa_w");
  c.gap = required(doc, "gap_m");
  c.mu = required(doc, "mu");
  c.power_optical = required(doc, "power_optical_w");
  c.power_microwave = required(doc, "power_microwave_w");
  c.delta0c = required_frequency(doc, "delta0c");
  c.delta0w = required_frequency(doc, "delta0w");
  c.temperature = required(doc, "temperature_k");

  const bool has_ratio = doc.contains("g2_over_g1");
  const bool has_refl = doc.contains("reflectivity");
  if (has_ratio == has_refl)
    throw ConfigError("g2_over_g1",
                      "exactly one of g2_over_g1, reflectivity must be given for the quadratic coupling");
  if (has_ratio) {
    if (doc.contains("g2_sign"))
      throw ConfigError("g2_sign", "g2_sign only applies together with reflectivity");
    c.quadratic = CouplingRatio{number_at(doc, "g2_over_g1")};
  } else {
    int sign = 1;
    if (doc.contains("g2_sign")) {
      const double s = number_at(doc, "g2_sign");
      if (s != 1.0 && s != -1.0) throw ConfigError("g2_sign", "g2_sign must be +1 or -1");
      sign = static_cast<int>(s);
    }
    c.quadratic = MembraneReflectivity{number_at(doc, "reflectivity"), sign};
  }

  validate(c);
  return c;
}

std::string serialize_config(const PhysicalConfig& c) {
  json doc = json::object();
  if (!c.name.empty()) doc["name"] = c.name;
  doc["cavity_length_m"] = c.cavity_length;
  doc["omega_c_rad_s"] = c.omega_c;
  doc["lambda_drive_m"] = c.lambda_drive;
  doc["mass_kg"] = c.mass;
  doc["omega_m_rad_s"] = c.omega_m;
  if (const auto* q = std::get_if<QualityFactor>(&c.mechanical_loss))
    doc["q_mechanical"] = q->value;
  else
    doc["gamma_m_rad_s"] = std::get<MechanicalDamping>(c.mechanical_loss).rad_s;
  doc["kappa_rad_s"] = c.kappa;
  doc["omega_w_rad_s"] = c.omega_w;
  doc["kappa_w_rad_s"] = c.kappa_w;
  doc["gap_m"] = c.gap;
  doc["mu"] = c.mu;
  doc["power_optical_w"] = c.power_optical;
  doc["power_microwave_w"] = c.power_microwave;
  doc["delta0c_rad_s"] = c.delta0c;
  doc["delta0w_rad_s"] = c.delta0w;
  doc["temperature_k"] = c.temperature;
  if (const auto* r = std::get_if<MembraneReflectivity>(&c.quadratic)) {
    doc["reflectivity"] = r->reflectivity;
    doc["g2_sign"] = r->sign;
  } else {
    doc["g2_over_g1"] = std::get<CouplingRatio>(c.quadratic).g2_over_g1;
  }
  return doc.dump(2) + "\n";
}

}  // namespace eom
