// eomech command-line front end. Talks to the library only through eomech.h.
#include <openssl/evp.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "eomech/eomech.h"
#include "json.hpp"

using nlohmann::json;

namespace {

// Carries a status out of the command handlers; main turns it into an exit code.
struct Failure {
  eom_status status;
  std::string message;
};

[[noreturn]] void fail(eom_status st, std::string msg) { throw Failure{st, std::move(msg)}; }

void check(eom_status st) {
  if (st == EOM_OK) return;
  std::string msg = eom_last_error();
  const std::string field = eom_last_error_field();
  if (st == EOM_ERR_CONFIG && !field.empty() && msg.find(field) == std::string::npos)
    msg = field + ": " + msg;
  if (st == EOM_ERR_INTEGRATOR) {
    std::ostringstream os;
    os.precision(17);
    os << msg << " (last good time t = " << eom_last_error_time() << " s)";
    msg = os.str();
  }
  fail(st, msg);
}

int exit_code(eom_status st) {
  switch (st) {
    case EOM_OK: return 0;
    case EOM_ERR_CONFIG:
    case EOM_ERR_ARGUMENT: return 2;
    case EOM_ERR_NO_STABLE: return 3;
    case EOM_ERR_IO: return 4;
    case EOM_ERR_INTEGRATOR: return 5;
    default: return 1;
  }
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
  Handle& operator=(Handle&& o) noexcept {
    std::swap(p, o.p);
    return *this;
  }
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};
using Config = Handle<eom_config, eom_config_free>;
using Sweep = Handle<eom_sweep, eom_sweep_free>;
using Analysis = Handle<eom_analysis, eom_analysis_free>;
using Series = Handle<eom_series, eom_series_free>;

std::string take_string(char* s) {
  std::string out(s ? s : "");
  eom_string_free(s);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(EOM_ERR_INTERNAL, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(EOM_ERR_IO, "cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) fail(EOM_ERR_IO, "read error on '" + path + "'");
  return os.str();
}

// ISO-8601 UTC; SOURCE_DATE_EPOCH pins it for reproducible manifests.
std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(sde, &end, 10);
    if (end != sde && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const double m[36]) {
  json rows = json::array();
  for (int i = 0; i < 6; ++i) {
    json r = json::array();
    for (int j = 0; j < 6; ++j) r.push_back(num(m[6 * i + j]));
    rows.push_back(r);
  }
  return rows;
}

json rates_json(const eom_rates& r) {
  return {{"g1", r.g1},           {"g2", r.g2},           {"gw", r.gw},           {"drive", r.drive},
          {"drive_w", r.drive_w}, {"n_c", r.n_c},         {"n_w", r.n_w},         {"n_m", r.n_m},
          {"gamma_m", r.gamma_m}, {"omega_m", r.omega_m}, {"kappa", r.kappa},     {"kappa_w", r.kappa_w},
          {"delta0c", r.delta0c}, {"delta0w", r.delta0w}};
}

struct Globals {
  std::string config_path;
  std::string preset;
  std::optional<double> g2_ratio;
  std::vector<std::string> sets;  // name=value overrides applied last
  std::string out;
  std::string format;
  int jobs = 1;
  bool dump_matrices = false;
};

// The resolved parameter set plus what the manifest needs to say about where it came from.
struct Resolved {
  Config cfg;
  Sweep sweep;  // set when a preset was named
  std::string config_hash;
};

Resolved resolve(const Globals& g) {
  Resolved r;
  Config file_cfg;
  std::string bytes;
  if (!g.config_path.empty()) {
    bytes = read_file(g.config_path);
    check(eom_config_parse(bytes.data(), bytes.size(), file_cfg.out()));
  }
  if (!g.preset.empty()) {
    const double g2 = g.g2_ratio.value_or(0.0);
    check(eom_sweep_from_preset(g.preset.c_str(), file_cfg.get(), g.g2_ratio ? &g2 : nullptr, r.sweep.out()));
    check(eom_sweep_base_config(r.sweep.get(), r.cfg.out()));
  } else if (file_cfg.get()) {
    r.cfg = std::move(file_cfg);
    if (g.g2_ratio) check(eom_config_set(r.cfg.get(), "g2_over_g1", *g.g2_ratio));
  } else {
    fail(EOM_ERR_ARGUMENT, "one of --config or --preset is required");
  }
  for (const std::string& kv : g.sets) {
    const auto eq = kv.find('=');
    char* end = nullptr;
    const double v = eq == std::string::npos ? 0.0 : std::strtod(kv.c_str() + eq + 1, &end);
    if (eq == std::string::npos || end == kv.c_str() + eq + 1 || *end != '\0')
      fail(EOM_ERR_ARGUMENT, "--set expects name=value, got '" + kv + "'");
    const std::string name = kv.substr(0, eq);
    check(eom_config_set(r.cfg.get(), name.c_str(), v));
  }
  if (r.sweep.get() && !g.sets.empty()) check(eom_sweep_set_base_config(r.sweep.get(), r.cfg.get()));
  if (!bytes.empty()) {
    r.config_hash = sha256_hex(bytes);
  } else {
    char* text = nullptr;
    check(eom_config_to_json(r.cfg.get(), &text));
    r.config_hash = sha256_hex(take_string(text));
  }
  return r;
}

std::string pick_format(const Globals& g, const std::string& fallback) {
  if (!g.format.empty()) return g.format;
  const auto dot = g.out.rfind('.');
  if (dot != std::string::npos) {
    const std::string ext = g.out.substr(dot + 1);
    if (ext == "json" || ext == "csv") return ext;
  }
  return fallback;
}

void write_manifest(const std::string& command, const Globals& g, const Resolved& r, const std::string& format,
                    json extra) {
  char* text = nullptr;
  check(eom_config_to_json(r.cfg.get(), &text));
  json m;
  m["command"] = command;
  m["config_path"] = g.config_path.empty() ? json(nullptr) : json(g.config_path);
  m["config_sha256"] = r.config_hash;
  m["preset"] = g.preset.empty() ? json(nullptr) : json(g.preset);
  m["g2_ratio_override"] = g.g2_ratio ? json(*g.g2_ratio) : json(nullptr);
  m["resolved_config"] = json::parse(take_string(text));
  eom_rates rates{};
  check(eom_config_rates(r.cfg.get(), &rates));
  m["resolved_rates"] = rates_json(rates);
  if (r.sweep.get()) {
    char* d = nullptr;
    check(eom_sweep_describe(r.sweep.get(), &d));
    json desc = json::parse(take_string(d));
    m["axes"] = desc["axes"];
    m["policy"] = desc["policy"];
  }
  for (auto& [k, v] : extra.items()) m[k] = v;
  m["output"] = g.out;
  m["format"] = format;
  m["version"] = eom_version();
  m["timestamp"] = timestamp();

  const std::string path = g.out + ".manifest.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(EOM_ERR_IO, "cannot open '" + path + "' for writing");
  f << m.dump(2) << '\n';
  f.close();
  if (!f) fail(EOM_ERR_IO, "write error on '" + path + "'");
}

// Writes text to --out, or stdout when no path was given.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) fail(EOM_ERR_IO, "cannot open '" + g.out + "' for writing");
  f << text;
  f.close();
  if (!f) fail(EOM_ERR_IO, "write error on '" + g.out + "'");
}

struct BranchRow {
  eom_branch b;
  std::string error;
};

std::vector<BranchRow> branches(const eom_analysis* a) {
  std::vector<BranchRow> out;
  const size_t n = eom_analysis_branch_count(a);
  for (size_t i = 0; i < n; ++i) {
    BranchRow row{};
    check(eom_analysis_branch(a, i, &row.b));
    row.error = eom_analysis_branch_error(a, i);
    out.push_back(row);
  }
  return out;
}

json branch_json(const eom_analysis* a, size_t i, const BranchRow& row, bool observables, bool matrices) {
  const eom_branch& b = row.b;
  json j = {{"label", b.label},
            {"stable", b.stable != 0},
            {"rh_stable", b.rh_stable != 0},
            {"degenerate", b.degenerate != 0},
            {"Q", b.Q},
            {"Q2", b.Q2},
            {"P2", b.P2},
            {"a", {b.a_re, b.a_im}},
            {"aw", {b.aw_re, b.aw_im}},
            {"I", b.I},
            {"Iw", b.Iw},
            {"delta_c", b.delta_c},
            {"delta_w", b.delta_w},
            {"omega_m_tilde", b.omega_m_tilde},
            {"omega_m_prime", b.omega_m_prime},
            {"g_tilde", b.g_tilde},
            {"residual", b.residual},
            {"abscissa", b.abscissa},
            {"routh_hurwitz", {b.s[0], b.s[1], b.s[2], b.s[3], b.s[4], b.s[5]}}};
  if (!row.error.empty()) j["error"] = row.error;
  if (observables && b.has_observables) {
    j["observables"] = {{"EN_ow", num(b.en_ow)}, {"EN_om", num(b.en_om)}, {"EN_mw", num(b.en_mw)},
                        {"n_eff", num(b.n_eff)}, {"var_Q", num(b.var_q)}, {"var_P", num(b.var_p)},
                        {"S_Q", num(b.s_q)},     {"S_P", num(b.s_p)},     {"physicality", num(b.physicality)},
                        {"lyapunov_residual", num(b.lyapunov_residual)},
                        {"lyapunov_floor", num(b.lyapunov_floor)}};
    double v[36];
    check(eom_analysis_covariance(a, i, v));
    j["covariance"] = matrix_json(v);
  }
  if (matrices) {
    double d[36];
    check(eom_analysis_drift(a, i, d));
    j["drift"] = matrix_json(d);
  }
  return j;
}

const std::vector<std::string> kBranchColumns = {
    "branch", "stable", "rh_stable", "degenerate", "Q",   "I",     "Iw",    "delta_c", "delta_w",
    "omega_m_tilde", "abscissa", "s1", "s2", "s3", "s4", "s5", "s6", "EN_ow", "EN_om", "EN_mw",
    "n_eff", "var_Q", "var_P", "S_Q", "S_P", "physicality", "error"};

std::string branch_csv(const std::vector<BranchRow>& rows, bool observables) {
  std::string out;
  const size_t ncols = observables ? kBranchColumns.size() : 17;
  for (size_t c = 0; c < ncols; ++c) out += (c ? "," : "") + kBranchColumns[c];
  if (!observables) out += ",error";
  out += '\n';
  const double nan = std::nan("");
  for (const BranchRow& r : rows) {
    const eom_branch& b = r.b;
    std::vector<std::string> f = {std::to_string(b.label), std::to_string(b.stable), std::to_string(b.rh_stable),
                                  std::to_string(b.degenerate), fmt17(b.Q), fmt17(b.I), fmt17(b.Iw),
                                  fmt17(b.delta_c), fmt17(b.delta_w), fmt17(b.omega_m_tilde), fmt17(b.abscissa)};
    for (double s : b.s) f.push_back(fmt17(s));
    if (observables) {
      const bool h = b.has_observables != 0;
      for (double v : {b.en_ow, b.en_om, b.en_mw, b.n_eff, b.var_q, b.var_p, b.s_q, b.s_p, b.physicality})
        f.push_back(fmt17(h ? v : nan));
    }
    f.push_back(csv_field(r.error));
    for (size_t c = 0; c < f.size(); ++c) out += (c ? "," : "") + f[c];
    out += '\n';
  }
  return out;
}

// point and stability share everything except how much they print.
int cmd_point(const Globals& g, bool full) {
  Resolved r = resolve(g);
  const std::string format = pick_format(g, "json");
  if (format != "json" && format != "csv") fail(EOM_ERR_ARGUMENT, "--format must be csv or json");
  Analysis a;
  check(eom_analyze(r.cfg.get(), a.out()));
  eom_rates rates{};
  check(eom_analysis_rates(a.get(), &rates));
  const std::vector<BranchRow> rows = branches(a.get());

  std::string text;
  if (format == "csv") {
    text = branch_csv(rows, full);
  } else {
    json rep;
    rep["version"] = eom_version();
    rep["rates"] = rates_json(rates);
    rep["branch_count"] = rows.size();
    rep["stable_count"] = eom_analysis_stable_count(a.get());
    json bs = json::array();
    for (size_t i = 0; i < rows.size(); ++i) bs.push_back(branch_json(a.get(), i, rows[i], full, g.dump_matrices));
    rep["branches"] = bs;
    if (g.dump_matrices) {
      double d[36];
      check(eom_analysis_diffusion(a.get(), d));
      rep["diffusion"] = matrix_json(d);
    }
    text = rep.dump(2) + "\n";
  }
  emit(g, text);
  if (!g.out.empty()) write_manifest(full ? "point" : "stability", g, r, format, json::object());
  if (eom_analysis_stable_count(a.get()) == 0) {
    std::cerr << "eomech: no stable steady state (" << rows.size() << " branch"
              << (rows.size() == 1 ? "" : "es") << " found)\n";
    return 3;
  }
  return 0;
}

struct AxisArg {
  std::string param;
  double lo, hi;
  size_t n;
};

AxisArg parse_axis(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) fail(EOM_ERR_ARGUMENT, "--axis expects name:lo:hi:n, got '" + s + "'");
  auto number = [&](const std::string& t) {
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || !std::isfinite(v)) fail(EOM_ERR_ARGUMENT, "bad number '" + t + "' in --axis");
    return v;
  };
  const double n = number(parts[3]);
  if (n < 1 || n != std::floor(n)) fail(EOM_ERR_ARGUMENT, "--axis point count must be a positive integer");
  return {parts[0], number(parts[1]), number(parts[2]), static_cast<size_t>(n)};
}

int cmd_sweep(const Globals& g, const std::vector<std::string>& axes, const std::string& policy) {
  if (g.out.empty()) fail(EOM_ERR_ARGUMENT, "sweep needs --out");
  Resolved r;
  if (g.preset.empty()) {
    if (axes.empty()) fail(EOM_ERR_ARGUMENT, "sweep needs --preset or at least one --axis");
    if (g.config_path.empty()) {
      // Explicit axes over the built-in reference parameters.
      check(eom_config_fig2(r.cfg.out()));
      if (g.g2_ratio) check(eom_config_set(r.cfg.get(), "g2_over_g1", *g.g2_ratio));
      char* text = nullptr;
      check(eom_config_to_json(r.cfg.get(), &text));
      r.config_hash = sha256_hex(take_string(text));
    } else {
      r = resolve(g);
    }
    check(eom_sweep_create(r.cfg.get(), r.sweep.out()));
  } else {
    r = resolve(g);
  }
  if (!axes.empty()) {
    check(eom_sweep_clear_axes(r.sweep.get()));
    for (const std::string& s : axes) {
      const AxisArg a = parse_axis(s);
      check(eom_sweep_add_linear_axis(r.sweep.get(), a.param.c_str(), a.lo, a.hi, a.n));
    }
  }
  if (!policy.empty()) check(eom_sweep_set_policy(r.sweep.get(), policy.c_str()));
  check(eom_sweep_set_jobs(r.sweep.get(), g.jobs));
  const std::string format = pick_format(g, "csv");
  check(eom_sweep_write(r.sweep.get(), g.out.c_str(), format.c_str()));
  write_manifest("sweep", g, r, format, json::object());
  return 0;
}

struct DynamicsArgs {
  std::optional<double> t_end;
  std::string mode = "full";
  std::string init = "vacuum";
  size_t samples = 2001;
  double tol = 1e-8;
};

int cmd_dynamics(const Globals& g, const DynamicsArgs& d) {
  if (g.out.empty()) fail(EOM_ERR_ARGUMENT, "dynamics needs --out");
  Resolved r = resolve(g);
  eom_rates rates{};
  check(eom_config_rates(r.cfg.get(), &rates));
  const double t_end = d.t_end.value_or(5.0 / rates.gamma_m);
  const std::string format = pick_format(g, "csv");
  Series s;
  check(eom_dynamics(r.cfg.get(), d.mode.c_str(), d.init.c_str(), t_end, d.samples, d.tol, s.out()));
  check(eom_series_write(s.get(), g.out.c_str(), format.c_str()));
  json extra = {{"dynamics", {{"mode", d.mode}, {"init", d.init}, {"t_end", t_end}, {"samples", d.samples},
                              {"tol", d.tol}}}};
  write_manifest("dynamics", g, r, format, extra);
  return 0;
}

int cmd_tcrit(const Globals& g, const std::string& pair, double t_hi, double t_lo) {
  Resolved r = resolve(g);
  double tc = 0, en_lo = 0, en_hi = 0;
  check(eom_critical_temperature(r.cfg.get(), pair.c_str(), t_hi, t_lo, &tc, &en_lo, &en_hi));
  json rep = {{"pair", pair}, {"t_lo", t_lo},   {"t_hi", t_hi},
              {"tc", tc},     {"en_lo", en_lo}, {"en_hi", en_hi}, {"entangled_at_t_lo", tc > 0}};
  emit(g, rep.dump(2) + "\n");
  if (!g.out.empty()) write_manifest("tcrit", g, r, "json", json::object());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electro-optomechanical steady states, fluctuations and figure sweeps"};
  app.set_version_flag("--version", std::string(eom_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "JSON parameter file");
  app.add_option("--preset", g.preset, "figure preset (fig2 ... fig13)");
  app.add_option("--g2-ratio", g.g2_ratio, "override g2/g1");
  app.add_option("--set", g.sets, "name=value override of a sweepable parameter (SI units)");
  app.add_option("--out", g.out, "output path (stdout for point/stability/tcrit when omitted)");
  app.add_option("--format", g.format, "csv or json (default from the --out extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", g.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--dump-matrices", g.dump_matrices, "add drift and diffusion matrices to point reports");

  auto* point = app.add_subcommand("point", "steady states, stability and observables at one parameter point");
  auto* stability = app.add_subcommand("stability", "steady states with Routh-Hurwitz and eigenvalue verdicts");

  std::vector<std::string> axes;
  std::string policy;
  auto* sweep = app.add_subcommand("sweep", "tabulate observables over one or two parameter axes");
  sweep->add_option("--axis", axes, "name:lo:hi:n (SI units; repeat for a 2-D grid)");
  sweep->add_option("--policy", policy, "lowest-stable, all-stable, all or a branch number");

  DynamicsArgs dyn;
  auto* dynamics = app.add_subcommand("dynamics", "integrate the mean-field equations");
  dynamics->add_option("--t-end", dyn.t_end, "end time in s (default 5/gamma_m)");
  dynamics->add_option("--mode", dyn.mode, "full or adiabatic")->check(CLI::IsMember({"full", "adiabatic"}));
  dynamics->add_option("--init", dyn.init, "vacuum or adiabatic (full mode)")
      ->check(CLI::IsMember({"vacuum", "adiabatic"}));
  dynamics->add_option("--samples", dyn.samples, "number of output rows");
  dynamics->add_option("--tol", dyn.tol, "integrator tolerance");

  std::string pair = "ow";
  double t_hi = 0.3, t_lo = 1e-3;
  auto* tcrit = app.add_subcommand("tcrit", "temperature at which a pair's entanglement vanishes");
  tcrit->add_option("--pair", pair, "ow, om or mw");
  tcrit->add_option("--t-hi", t_hi, "upper bracket in K");
  tcrit->add_option("--t-lo", t_lo, "lower bracket in K");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (point->parsed()) return cmd_point(g, true);
    if (stability->parsed()) return cmd_point(g, false);
    if (sweep->parsed()) return cmd_sweep(g, axes, policy);
    if (dynamics->parsed()) return cmd_dynamics(g, dyn);
    if (tcrit->parsed()) return cmd_tcrit(g, pair, t_hi, t_lo);
  } catch (const Failure& f) {
    std::cerr << "eomech: error: " << f.message << "\n";
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "eomech: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
