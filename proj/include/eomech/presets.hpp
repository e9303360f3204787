#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eomech/params.hpp"
#include "eomech/sweep.hpp"

namespace eom {

/// The reference device: L = 1 mm, m = 5 ng, Omega_m = 2 pi 10 MHz, Qm = 8e4, kappa = 0.01 Omega_m,
/// kappa_w = 0.005 Omega_m, omega_w = 2 pi 10 GHz, mu = 0.008, d = 100 nm, P = Pw = 30 uW,
/// Delta0c = Omega_m, Delta0w = -Omega_m, T = 1 mK, g2 = 0.
PhysicalConfig fig2_config();

struct Preset {
  std::string id;
  std::string description;
  SweepSpec spec;  // base config already carries the figure's parameter changes
};

std::vector<std::string> preset_ids();

/// Build a figure preset on top of `base` (normally fig2_config()). `g2_ratio`, when given,
/// replaces the preset's default g2/g1 before any axis is applied.
/// Throws ConfigError for an unknown id.
Preset make_preset(const std::string& id, const PhysicalConfig& base,
                   std::optional<double> g2_ratio = std::nullopt);

}  // namespace eom
