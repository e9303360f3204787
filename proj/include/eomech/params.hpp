#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace eom {

/// Mechanical loss given either as a quality factor (gamma_m = Omega_m / Q_m) or directly.
struct QualityFactor {
  double value;
};
struct MechanicalDamping {
  double rad_s;
};
using MechanicalLoss = std::variant<QualityFactor, MechanicalDamping>;

/// Quadratic optomechanical coupling given as a signed ratio g2/g1 ...
struct CouplingRatio {
  double g2_over_g1;
};
/// ... or from the membrane reflectivity, |g2| ~ sqrt(R / (1 - R)), with an explicit sign.
struct MembraneReflectivity {
  double reflectivity;
  int sign;  // +1 or -1
};
using QuadraticCoupling = std::variant<CouplingRatio, MembraneReflectivity>;

/// Raw device, drive and bath parameters in SI units (frequencies in rad/s).
struct PhysicalConfig {
  std::string name;  // free-form label, not used by the physics

  double cavity_length = 0.0;     // m
  double omega_c = 0.0;           // optical cavity frequency
  double lambda_drive = 0.0;      // optical drive wavelength, m
  double mass = 0.0;              // effective membrane mass, kg
  double omega_m = 0.0;           // mechanical frequency
  MechanicalLoss mechanical_loss = QualityFactor{1.0};
  double kappa = 0.0;             // optical decay
  double omega_w = 0.0;           // microwave resonator frequency
  double kappa_w = 0.0;           // microwave decay
  double gap = 0.0;               // capacitor plate separation, m
  double mu = 0.0;                // capacitive participation ratio
  double power_optical = 0.0;     // W
  double power_microwave = 0.0;   // W
  double delta0c = 0.0;           // bare optical detuning omega_c - omega_d
  double delta0w = 0.0;           // bare microwave detuning omega_w - omega_dw
  double temperature = 0.0;       // K
  QuadraticCoupling quadratic = CouplingRatio{0.0};

  double gamma_m() const;
};

/// Every rate of the rotating-frame model, in rad/s (drive amplitudes in 1/s).
struct DerivedRates {
  double g1 = 0.0;        // linear optomechanical single-photon coupling
  double g2 = 0.0;        // quadratic optomechanical coupling (signed)
  double gw = 0.0;        // electromechanical coupling
  double drive = 0.0;     // E_d
  double drive_w = 0.0;   // E_dw
  double n_c = 0.0;       // thermal occupation at omega_c
  double n_w = 0.0;       // thermal occupation at omega_w
  double n_m = 0.0;       // thermal occupation at Omega_m
  double gamma_m = 0.0;
  double omega_m = 0.0;
  double kappa = 0.0;
  double kappa_w = 0.0;
  double delta0c = 0.0;
  double delta0w = 0.0;

  bool operator==(const DerivedRates&) const = default;
};

/// Mean thermal occupation 1/(exp(hbar w / kB T) - 1); exactly 0 at T = 0.
double thermal_occupation(double omega, double temperature);

/// Classical drive amplitude sqrt(2 P decay / (hbar w_drive)).
double drive_amplitude(double power, double decay, double omega_drive);

/// Zero-point displacement sqrt(hbar / (m Omega_m)).
double zero_point_displacement(double mass, double omega_m);

/// Throws ConfigError naming the first field that violates an invariant.
void validate(const PhysicalConfig& cfg);

DerivedRates derive_couplings(const PhysicalConfig& cfg);

/// Parse and validate a flat JSON config document.
/// Frequencies may be given as `<name>_rad_s` or `<name>_hz`.
PhysicalConfig load_config(std::string_view text);

/// Canonical JSON form (rad/s keys); load_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const PhysicalConfig& cfg);

}  // namespace eom
