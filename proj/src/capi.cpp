#include "eomech/eomech.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <sstream>

#include "eomech/error.hpp"
#include "eomech/meanfield.hpp"
#include "eomech/params.hpp"
#include "eomech/presets.hpp"
#include "eomech/sweep.hpp"
#include "eomech/table.hpp"
#include "json.hpp"

struct eom_config {
  eom::PhysicalConfig cfg;
};

struct eom_analysis {
  eom::PointAnalysis pa;
};

struct eom_sweep {
  eom::SweepSpec spec;
  std::string preset;
};

struct eom_series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_field;
thread_local double g_time = 0.0;

eom_status status_of(eom::ErrorKind k) {
  switch (k) {
    case eom::ErrorKind::config: return EOM_ERR_CONFIG;
    case eom::ErrorKind::no_stable: return EOM_ERR_NO_STABLE;
    case eom::ErrorKind::io: return EOM_ERR_IO;
    case eom::ErrorKind::integrator: return EOM_ERR_INTEGRATOR;
    case eom::ErrorKind::numeric: return EOM_ERR_NUMERIC;
    case eom::ErrorKind::argument: return EOM_ERR_ARGUMENT;
  }
  return EOM_ERR_INTERNAL;
}

template <class F>
eom_status guard(F&& f) {
  g_error.clear();
  g_field.clear();
  g_time = 0.0;
  try {
    f();
    return EOM_OK;
  } catch (const eom::ConfigError& e) {
    g_error = e.what();
    g_field = e.field();
    return EOM_ERR_CONFIG;
  } catch (const eom::IntegratorError& e) {
    g_error = e.what();
    g_time = e.t_reached();
    return EOM_ERR_INTEGRATOR;
  } catch (const eom::Error& e) {
    g_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return EOM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return EOM_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw eom::Error(eom::ErrorKind::argument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

eom_rates to_c(const eom::DerivedRates& r) {
  return {r.g1,      r.g2,      r.gw,    r.drive, r.drive_w, r.n_c,     r.n_w,
          r.n_m,     r.gamma_m, r.omega_m, r.kappa, r.kappa_w, r.delta0c, r.delta0w};
}

void to_row_major(const eom::Mat6& m, double out[36]) {
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) out[6 * i + j] = m(i, j);
}

const eom::BranchAnalysis& branch_at(const eom_analysis* a, size_t i) {
  require(a, "analysis");
  if (i >= a->pa.branches.size())
    throw eom::Error(eom::ErrorKind::argument, "branch index " + std::to_string(i) + " out of range");
  return a->pa.branches[i];
}

std::ofstream open_output(const char* path) {
  require(path, "path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw eom::Error(eom::ErrorKind::io, std::string("cannot open '") + path + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const char* path) {
  out.flush();
  if (!out) throw eom::Error(eom::ErrorKind::io, std::string("failed writing '") + path + "'");
}

}  // namespace

extern "C" {

const char* eom_version(void) { return EOMECH_VERSION; }
const char* eom_last_error(void) { return g_error.c_str(); }
const char* eom_last_error_field(void) { return g_field.c_str(); }
double eom_last_error_time(void) { return g_time; }
void eom_string_free(char* s) { std::free(s); }

eom_status eom_config_parse(const char* text, size_t len, eom_config** out) {
  return guard([&] {
    require(text, "text");
    require(out, "out");
    auto c = std::make_unique<eom_config>();
    c->cfg = eom::load_config(std::string_view(text, len));
    *out = c.release();
  });
}

eom_status eom_config_load_file(const char* path, eom_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw eom::Error(eom::ErrorKind::io, std::string("cannot open config '") + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    auto c = std::make_unique<eom_config>();
    c->cfg = eom::load_config(ss.str());
    *out = c.release();
  });
}

eom_status eom_config_fig2(eom_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new eom_config{eom::fig2_config()};
  });
}

eom_status eom_config_clone(const eom_config* cfg, eom_config** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = new eom_config{cfg->cfg};
  });
}

void eom_config_free(eom_config* cfg) { delete cfg; }

eom_status eom_config_to_json(const eom_config* cfg, char** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup_string(eom::serialize_config(cfg->cfg));
  });
}

eom_status eom_config_set(eom_config* cfg, const char* param, double value) {
  return guard([&] {
    require(cfg, "cfg");
    require(param, "param");
    eom::PhysicalConfig next = cfg->cfg;
    eom::apply_param(next, eom::parse_sweep_param(param), value);
    eom::validate(next);
    cfg->cfg = next;
  });
}

eom_status eom_config_rates(const eom_config* cfg, eom_rates* out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = to_c(eom::derive_couplings(cfg->cfg));
  });
}

eom_status eom_analyze(const eom_config* cfg, eom_analysis** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    auto a = std::make_unique<eom_analysis>();
    a->pa = eom::analyze_point(cfg->cfg);
    *out = a.release();
  });
}

void eom_analysis_free(eom_analysis* a) { delete a; }

eom_status eom_analysis_rates(const eom_analysis* a, eom_rates* out) {
  return guard([&] {
    require(a, "analysis");
    require(out, "out");
    *out = to_c(a->pa.rates);
  });
}

size_t eom_analysis_branch_count(const eom_analysis* a) { return a ? a->pa.branches.size() : 0; }

size_t eom_analysis_stable_count(const eom_analysis* a) {
  size_t n = 0;
  if (a)
    for (const auto& b : a->pa.branches) n += b.branch.stable ? 1 : 0;
  return n;
}

eom_status eom_analysis_branch(const eom_analysis* a, size_t i, eom_branch* out) {
  return guard([&] {
    require(out, "out");
    const eom::BranchAnalysis& ba = branch_at(a, i);
    const eom::SteadyBranch& b = ba.branch;
    eom_branch r{};
    r.label = b.label;
    r.stable = b.stable;
    r.rh_stable = ba.rh.stable;
    r.degenerate = b.degenerate;
    r.Q = b.Q;
    r.Q2 = b.Q2;
    r.P2 = b.P2;
    r.a_re = b.a.real();
    r.a_im = b.a.imag();
    r.aw_re = b.aw.real();
    r.aw_im = b.aw.imag();
    r.I = b.I;
    r.Iw = b.Iw;
    r.delta_c = b.delta_c;
    r.delta_w = b.delta_w;
    r.omega_m_tilde = b.omega_m_tilde;
    r.omega_m_prime = b.omega_m_prime;
    r.g_tilde = b.g_tilde;
    r.residual = b.residual;
    r.abscissa = b.abscissa;
    for (int k = 0; k < 6; ++k) r.s[k] = ba.rh.s[k];
    r.has_observables = ba.has_covariance;
    if (ba.has_covariance) {
      const eom::Observables& o = ba.observables;
      r.en_ow = o.en_ow;
      r.en_om = o.en_om;
      r.en_mw = o.en_mw;
      r.n_eff = o.n_eff;
      r.var_q = o.var_q;
      r.var_p = o.var_p;
      r.s_q = o.s_q;
      r.s_p = o.s_p;
      r.physicality = o.physicality;
      r.lyapunov_residual = ba.covariance.residual;
      r.lyapunov_floor = ba.covariance.rounding_floor;
    }
    *out = r;
  });
}

const char* eom_analysis_branch_error(const eom_analysis* a, size_t i) {
  if (!a || i >= a->pa.branches.size()) return "";
  return a->pa.branches[i].error.c_str();
}

eom_status eom_analysis_drift(const eom_analysis* a, size_t i, double out[36]) {
  return guard([&] {
    require(out, "out");
    to_row_major(branch_at(a, i).drift, out);
  });
}

eom_status eom_analysis_covariance(const eom_analysis* a, size_t i, double out[36]) {
  return guard([&] {
    require(out, "out");
    const eom::BranchAnalysis& ba = branch_at(a, i);
    if (!ba.has_covariance)
      throw eom::Error(eom::ErrorKind::no_stable, "branch has no covariance matrix (not stable)");
    to_row_major(ba.covariance.V, out);
  });
}

eom_status eom_analysis_diffusion(const eom_analysis* a, double out[36]) {
  return guard([&] {
    require(a, "analysis");
    require(out, "out");
    to_row_major(a->pa.diffusion, out);
  });
}

eom_status eom_sweep_create(const eom_config* base, eom_sweep** out) {
  return guard([&] {
    require(base, "base");
    require(out, "out");
    auto s = std::make_unique<eom_sweep>();
    s->spec.base = base->cfg;
    *out = s.release();
  });
}

eom_status eom_sweep_from_preset(const char* id, const eom_config* base, const double* g2_ratio,
                                 eom_sweep** out) {
  return guard([&] {
    require(id, "id");
    require(out, "out");
    std::optional<double> g2;
    if (g2_ratio) g2 = *g2_ratio;
    eom::Preset p = eom::make_preset(id, base ? base->cfg : eom::fig2_config(), g2);
    auto s = std::make_unique<eom_sweep>();
    s->spec = p.spec;
    s->preset = p.id;
    *out = s.release();
  });
}

void eom_sweep_free(eom_sweep* s) { delete s; }

eom_status eom_sweep_add_axis(eom_sweep* s, const char* param, const double* values, size_t n) {
  return guard([&] {
    require(s, "sweep");
    require(param, "param");
    if (n > 0) require(values, "values");
    if (s->spec.axes.size() >= 2) throw eom::Error(eom::ErrorKind::argument, "a sweep has at most two axes");
    s->spec.axes.push_back({eom::parse_sweep_param(param), std::vector<double>(values, values + n)});
  });
}

eom_status eom_sweep_add_linear_axis(eom_sweep* s, const char* param, double lo, double hi, size_t n) {
  return guard([&] {
    require(s, "sweep");
    require(param, "param");
    if (s->spec.axes.size() >= 2) throw eom::Error(eom::ErrorKind::argument, "a sweep has at most two axes");
    s->spec.axes.push_back(eom::linear_axis(eom::parse_sweep_param(param), lo, hi, n));
  });
}

eom_status eom_sweep_clear_axes(eom_sweep* s) {
  return guard([&] {
    require(s, "sweep");
    s->spec.axes.clear();
  });
}

eom_status eom_sweep_set_policy(eom_sweep* s, const char* policy) {
  return guard([&] {
    require(s, "sweep");
    require(policy, "policy");
    s->spec.policy = eom::BranchPolicy::parse(policy);
  });
}

eom_status eom_sweep_set_jobs(eom_sweep* s, int jobs) {
  return guard([&] {
    require(s, "sweep");
    if (jobs < 1) throw eom::Error(eom::ErrorKind::argument, "jobs must be >= 1");
    s->spec.jobs = jobs;
  });
}

eom_status eom_sweep_set_g2_ratio(eom_sweep* s, double g2_over_g1) {
  return guard([&] {
    require(s, "sweep");
    eom::apply_param(s->spec.base, eom::SweepParam::g2_over_g1, g2_over_g1);
  });
}

eom_status eom_sweep_base_config(const eom_sweep* s, eom_config** out) {
  return guard([&] {
    require(s, "sweep");
    require(out, "out");
    *out = new eom_config{s->spec.base};
  });
}

eom_status eom_sweep_set_base_config(eom_sweep* s, const eom_config* cfg) {
  return guard([&] {
    require(s, "sweep");
    require(cfg, "cfg");
    s->spec.base = cfg->cfg;
  });
}

eom_status eom_sweep_describe(const eom_sweep* s, char** out) {
  return guard([&] {
    require(s, "sweep");
    require(out, "out");
    nlohmann::json d;
    d["preset"] = s->preset.empty() ? nlohmann::json(nullptr) : nlohmann::json(s->preset);
    d["base_config"] = nlohmann::json::parse(eom::serialize_config(s->spec.base));
    d["policy"] = eom::to_string(s->spec.policy);
    nlohmann::json axes = nlohmann::json::array();
    for (const eom::Axis& a : s->spec.axes) {
      nlohmann::json ax;
      ax["param"] = eom::to_string(a.param);
      ax["count"] = a.values.size();
      ax["first"] = a.values.empty() ? 0.0 : a.values.front();
      ax["last"] = a.values.empty() ? 0.0 : a.values.back();
      ax["values"] = a.values;
      axes.push_back(ax);
    }
    d["axes"] = axes;
    const eom::DerivedRates r = eom::derive_couplings(s->spec.base);
    d["base_rates"] = {{"g1", r.g1}, {"g2", r.g2}, {"gw", r.gw}, {"drive", r.drive},
                       {"drive_w", r.drive_w}, {"gamma_m", r.gamma_m}, {"n_m", r.n_m}, {"n_w", r.n_w}};
    *out = dup_string(d.dump(2));
  });
}

eom_status eom_sweep_run(const eom_sweep* s, eom_record_cb cb, void* user) {
  return guard([&] {
    require(s, "sweep");
    require(reinterpret_cast<const void*>(cb), "callback");
    struct Stop {};
    try {
      eom::run_sweep(s->spec, [&](const eom::ObservableRecord& r) {
        eom_record c{};
        c.n_coords = static_cast<int>(r.coords.size());
        for (int k = 0; k < c.n_coords && k < 2; ++k) c.coords[k] = r.coords[k];
        c.branch = r.branch;
        c.branch_count = r.branch_count;
        c.stable = r.stable;
        c.rh_stable = r.rh_stable;
        c.has_observables = r.has_observables;
        c.abscissa = r.abscissa;
        c.Q = r.Q;
        c.I = r.I;
        c.Iw = r.Iw;
        c.delta_c = r.delta_c;
        c.delta_w = r.delta_w;
        c.omega_m_tilde = r.omega_m_tilde;
        c.en_ow = r.obs.en_ow;
        c.en_om = r.obs.en_om;
        c.en_mw = r.obs.en_mw;
        c.n_eff = r.obs.n_eff;
        c.var_q = r.obs.var_q;
        c.var_p = r.obs.var_p;
        c.s_q = r.obs.s_q;
        c.s_p = r.obs.s_p;
        c.physicality = r.obs.physicality;
        c.error = r.error.c_str();
        if (cb(&c, user) != 0) throw Stop{};
      });
    } catch (const Stop&) {
    }
  });
}

eom_status eom_sweep_write(const eom_sweep* s, const char* path, const char* format) {
  return guard([&] {
    require(s, "sweep");
    require(format, "format");
    const eom::TableFormat fmt = eom::parse_table_format(format);
    eom::validate(s->spec);
    std::ofstream out = open_output(path);
    {
      eom::TableWriter w(out, fmt, eom::record_columns(s->spec.axes));
      eom::run_sweep(s->spec, [&](const eom::ObservableRecord& r) { w.row(eom::record_cells(r)); });
      w.finish();
    }
    check_written(out, path);
  });
}

eom_status eom_critical_temperature(const eom_config* cfg, const char* pair, double t_hi, double t_lo,
                                    double* tc, double* en_lo, double* en_hi) {
  return guard([&] {
    require(cfg, "cfg");
    require(pair, "pair");
    require(tc, "tc");
    const eom::CriticalTemperature ct =
        eom::critical_temperature(cfg->cfg, eom::parse_mode_pair(pair), t_hi, t_lo);
    *tc = ct.tc;
    if (en_lo) *en_lo = ct.en_lo;
    if (en_hi) *en_hi = ct.en_hi;
  });
}

eom_status eom_dynamics(const eom_config* cfg, const char* mode, const char* init, double t_end,
                        size_t samples, double tol, eom_series** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(mode, "mode");
    require(out, "out");
    const std::string m(mode);
    const std::string ini(init ? init : "vacuum");
    if (m != "full" && m != "adiabatic")
      throw eom::Error(eom::ErrorKind::argument, "mode must be full or adiabatic");
    if (ini != "vacuum" && ini != "adiabatic")
      throw eom::Error(eom::ErrorKind::argument, "init must be vacuum or adiabatic");
    const eom::DerivedRates r = eom::derive_couplings(cfg->cfg);
    const std::vector<double> times = eom::uniform_times(t_end, samples);
    auto series = std::make_unique<eom_series>();
    series->columns = eom::full_series_columns();
    auto push = [&](const eom::TimeSample& ts) {
      std::vector<double> row;
      for (const eom::Cell& c : eom::full_series_cells(ts)) row.push_back(std::get<double>(c));
      series->rows.push_back(std::move(row));
    };
    if (m == "full") {
      const eom::MeanFieldState s0 = ini == "vacuum" ? eom::vacuum_state() : eom::adiabatic_state(r, 0.0, 0.0);
      for (const auto& ts : eom::integrate_full(r, s0, times, tol)) push(ts);
    } else {
      for (const auto& as : eom::integrate_adiabatic(r, 0.0, 0.0, times, tol))
        push({as.t, eom::adiabatic_state(r, as.Q, as.P)});
    }
    *out = series.release();
  });
}

void eom_series_free(eom_series* s) { delete s; }
size_t eom_series_rows(const eom_series* s) { return s ? s->rows.size() : 0; }
size_t eom_series_columns(const eom_series* s) { return s ? s->columns.size() : 0; }

const char* eom_series_column_name(const eom_series* s, size_t j) {
  if (!s || j >= s->columns.size()) return "";
  return s->columns[j].c_str();
}

double eom_series_value(const eom_series* s, size_t row, size_t col) {
  if (!s || row >= s->rows.size() || col >= s->columns.size()) return std::numeric_limits<double>::quiet_NaN();
  return s->rows[row][col];
}

eom_status eom_series_write(const eom_series* s, const char* path, const char* format) {
  return guard([&] {
    require(s, "series");
    require(format, "format");
    const eom::TableFormat fmt = eom::parse_table_format(format);
    std::ofstream out = open_output(path);
    {
      eom::TableWriter w(out, fmt, s->columns);
      for (const auto& row : s->rows) w.row(std::vector<eom::Cell>(row.begin(), row.end()));
      w.finish();
    }
    check_written(out, path);
  });
}

}  // extern "C"
