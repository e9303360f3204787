#include "eomech/presets.hpp"

#include "eomech/constants.hpp"
#include "eomech/error.hpp"

namespace eom {

namespace {

const char* const kIds[] = {"fig2",  "fig3",  "fig4",  "fig5",   "fig6",   "fig7",  "fig8a", "fig8b",
                            "fig8c", "fig9",  "fig10", "fig11",  "fig12a", "fig12b", "fig13"};

Axis scaled_axis(SweepParam p, double unit, double lo, double hi, std::size_t n) {
  Axis a = linear_axis(p, lo, hi, n);
  for (double& v : a.values) v *= unit;
  return a;
}

Axis detuning_w_axis(double omega_m, std::size_t n) {
  return scaled_axis(SweepParam::delta0w, omega_m, -2.0, 2.0, n);
}

}  // namespace

PhysicalConfig fig2_config() {
  PhysicalConfig c;
  c.name = "fig2";
  const double omega_m = constants::two_pi * 1e7;
  c.cavity_length = 1e-3;
  c.omega_c = 2.3e15;
  c.lambda_drive = 810e-9;
  c.mass = 5e-12;
  c.omega_m = omega_m;
  c.mechanical_loss = QualityFactor{8e4};
  c.kappa = 0.01 * omega_m;
  c.omega_w = constants::two_pi * 1e10;
  c.kappa_w = 0.005 * omega_m;
  c.gap = 100e-9;
  c.mu = 0.008;
  c.power_optical = 30e-6;
  c.power_microwave = 30e-6;
  c.delta0c = omega_m;
  c.delta0w = -omega_m;
  c.temperature = 1e-3;
  c.quadratic = CouplingRatio{0.0};
  return c;
}

std::vector<std::string> preset_ids() { return {std::begin(kIds), std::end(kIds)}; }

Preset make_preset(const std::string& id, const PhysicalConfig& base, std::optional<double> g2_ratio) {
  Preset p;
  p.id = id;
  PhysicalConfig& c = p.spec.base;
  c = base;
  const double om = c.omega_m;
  std::vector<Axis>& axes = p.spec.axes;
  double g2 = 0.0;

  if (id == "fig2") {
    p.description = "steady states at g2/g1 = -8e-3, 0, +8e-3 (Fig. 2 parameters)";
    axes = {{SweepParam::g2_over_g1, {-8e-3, 0.0, 8e-3}}};
  } else if (id == "fig3") {
    p.description = "optical multistability: all branches vs Delta0c, P = Pw = 3 uW, Delta0w = Omega_m";
    c.power_optical = 3e-6;
    c.power_microwave = 3e-6;
    c.delta0w = om;
    // Steps of 0.01 kappa: the g2 = 0 bistable window is only ~0.03 kappa wide.
    axes = {scaled_axis(SweepParam::delta0c, c.kappa, -5.0, 55.0, 6001)};
    p.spec.policy.kind = BranchPolicy::Kind::all;
  } else if (id == "fig4") {
    p.description = "log-negativities vs g2/g1";
    axes = {linear_axis(SweepParam::g2_over_g1, -8e-3, 8e-3, 161)};
  } else if (id == "fig5" || id == "fig6" || id == "fig7") {
    p.description = "log-negativity density over (Delta0w, kappa), g2/g1 = 4e-3 by default";
    g2 = 4e-3;
    axes = {detuning_w_axis(om, 101), scaled_axis(SweepParam::kappa, om, 0.01, 1.0, 100)};
  } else if (id == "fig8a" || id == "fig8c") {
    p.description = "log-negativities vs temperature, Delta0w = -Omega_m, g2/g1 = 4e-3 by default";
    g2 = 4e-3;
    c.delta0w = -om;
    axes = {linear_axis(SweepParam::temperature, 1e-3, 0.2, 200)};
  } else if (id == "fig8b") {
    p.description = "log-negativities vs temperature, Delta0w = -0.4 Omega_m, g2/g1 = 4e-3 by default";
    g2 = 4e-3;
    c.delta0w = -0.4 * om;
    axes = {linear_axis(SweepParam::temperature, 1e-3, 0.2, 200)};
  } else if (id == "fig9") {
    p.description = "effective phonon number vs g2/g1, Delta0w = Omega_m";
    c.delta0w = om;
    axes = {linear_axis(SweepParam::g2_over_g1, -0.02, 0.02, 801)};
  } else if (id == "fig10") {
    p.description = "effective phonon number vs Delta0w at several temperatures, g2/g1 = 8e-3 by default";
    g2 = 8e-3;
    axes = {{SweepParam::temperature, {1e-3, 0.01, 0.1, 0.3}}, detuning_w_axis(om, 401)};
  } else if (id == "fig11") {
    p.description = "Q squeezing over (g2/g1, Delta0w), P = Pw = 1 mW";
    c.power_optical = 1e-3;
    c.power_microwave = 1e-3;
    axes = {linear_axis(SweepParam::g2_over_g1, -0.01, 0.04, 201), detuning_w_axis(om, 81)};
  } else if (id == "fig12a") {
    p.description = "Q squeezing vs Delta0w for g2/g1 = 0, 1e-3, 4e-3, P = Pw = 1 mW";
    c.power_optical = 1e-3;
    c.power_microwave = 1e-3;
    axes = {{SweepParam::g2_over_g1, {0.0, 1e-3, 4e-3}}, detuning_w_axis(om, 401)};
  } else if (id == "fig12b") {
    p.description = "Q squeezing vs Delta0w at T = 1, 50, 115 mK, g2/g1 = 8e-3 by default, P = Pw = 1 mW";
    g2 = 8e-3;
    c.power_optical = 1e-3;
    c.power_microwave = 1e-3;
    axes = {{SweepParam::temperature, {1e-3, 0.05, 0.115}}, detuning_w_axis(om, 401)};
  } else if (id == "fig13") {
    p.description = "equipartition: variances vs Delta0w at T = 0.1, 0.3 K, g2/g1 = 8e-3 by default";
    g2 = 8e-3;
    axes = {{SweepParam::temperature, {0.1, 0.3}}, detuning_w_axis(om, 401)};
  } else {
    std::string known;
    for (const char* k : kIds) known += std::string(known.empty() ? "" : ", ") + k;
    throw ConfigError("preset", "unknown preset '" + id + "' (known: " + known + ")");
  }
  c.quadratic = CouplingRatio{g2_ratio.value_or(g2)};
  c.name = id;
  return p;
}

}  // namespace eom
