// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "eomech/eomech.h"
#include "oracles/oracle_values.hpp"

namespace {

eom_config* fig2(double ratio = 0.0) {
  eom_config* c = nullptr;
  REQUIRE(eom_config_fig2(&c) == EOM_OK);
  REQUIRE(eom_config_set(c, "g2_over_g1", ratio) == EOM_OK);
  return c;
}

std::string to_json(const eom_config* c) {
  char* text = nullptr;
  REQUIRE(eom_config_to_json(c, &text) == EOM_OK);
  std::string s(text);
  eom_string_free(text);
  return s;
}

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::strlen(eom_version()) > 0);
  eom_config* c = nullptr;
  CHECK(eom_config_parse("{", 1, &c) == EOM_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(std::string(eom_last_error()).find("line 1") != std::string::npos);
  CHECK(std::string(eom_last_error_field()).empty());
  // A successful call clears the error.
  eom_config* ok = fig2();
  CHECK(std::string(eom_last_error()).empty());
  eom_config_free(ok);
}

TEST_CASE("config round trip and rates") {
  eom_config* c = fig2();
  const std::string text = to_json(c);
  eom_config* back = nullptr;
  REQUIRE(eom_config_parse(text.data(), text.size(), &back) == EOM_OK);
  CHECK(to_json(back) == text);

  eom_rates r{};
  REQUIRE(eom_config_rates(back, &r) == EOM_OK);
  CHECK(r.g1 == doctest::Approx(oracle::kG1).epsilon(1e-12));
  CHECK(r.gw == doctest::Approx(oracle::kGw).epsilon(1e-12));
  CHECK(r.drive == doctest::Approx(oracle::kDriveOptical).epsilon(1e-12));

  eom_config* copy = nullptr;
  REQUIRE(eom_config_clone(back, &copy) == EOM_OK);
  REQUIRE(eom_config_set(copy, "temperature", 0.1) == EOM_OK);
  eom_rates r2{};
  REQUIRE(eom_config_rates(copy, &r2) == EOM_OK);
  CHECK(r2.n_m == doctest::Approx(oracle::kBoseMech100mK).epsilon(1e-12));
  CHECK(eom_config_rates(back, &r) == EOM_OK);
  CHECK(r.n_m == doctest::Approx(oracle::kBoseMech1mK).epsilon(1e-12));

  CHECK(eom_config_set(copy, "mass", 1.0) == EOM_ERR_ARGUMENT);
  // Invalid values are rejected up front and leave the config unchanged.
  CHECK(eom_config_set(copy, "kappa", -1.0) == EOM_ERR_CONFIG);
  CHECK(std::string(eom_last_error_field()) == "kappa_rad_s");
  CHECK(eom_config_rates(copy, &r2) == EOM_OK);
  CHECK(r2.kappa > 0.0);

  eom_config_free(copy);
  eom_config_free(back);
  eom_config_free(c);
}

TEST_CASE("config errors name the field") {
  const std::string text = R"({"mass_kg": 5e-12})";
  eom_config* c = nullptr;
  CHECK(eom_config_parse(text.data(), text.size(), &c) == EOM_ERR_CONFIG);
  CHECK(std::string(eom_last_error_field()) == "cavity_length_m");
  CHECK(eom_config_load_file("/nonexistent/dir/cfg.json", &c) == EOM_ERR_IO);
  CHECK(eom_config_parse(nullptr, 0, &c) == EOM_ERR_ARGUMENT);
  CHECK(eom_config_fig2(nullptr) == EOM_ERR_ARGUMENT);
}

TEST_CASE("point analysis") {
  eom_config* c = fig2();
  eom_analysis* a = nullptr;
  REQUIRE(eom_analyze(c, &a) == EOM_OK);
  REQUIRE(eom_analysis_branch_count(a) == 1);
  CHECK(eom_analysis_stable_count(a) == 1);
  eom_branch b{};
  REQUIRE(eom_analysis_branch(a, 0, &b) == EOM_OK);
  CHECK(b.label == 1);
  CHECK(b.stable == 1);
  CHECK(b.rh_stable == 1);
  CHECK(b.has_observables == 1);
  CHECK(b.Q == doctest::Approx(oracle::Fig2Zero::Q).epsilon(1e-9));
  CHECK(b.en_ow == doctest::Approx(oracle::Fig2Zero::EN_ow).epsilon(1e-8));
  CHECK(b.en_mw == doctest::Approx(oracle::Fig2Zero::EN_mw).epsilon(1e-8));
  CHECK(b.n_eff == doctest::Approx(oracle::Fig2Zero::n_eff).epsilon(1e-8));
  CHECK(b.lyapunov_residual < 1e-9);
  CHECK(b.lyapunov_floor > 0.0);
  CHECK(std::string(eom_analysis_branch_error(a, 0)).empty());

  double V[36], A[36], D[36];
  REQUIRE(eom_analysis_covariance(a, 0, V) == EOM_OK);
  REQUIRE(eom_analysis_drift(a, 0, A) == EOM_OK);
  REQUIRE(eom_analysis_diffusion(a, D) == EOM_OK);
  CHECK(V[2 * 6 + 2] == doctest::Approx(oracle::Fig2Zero::var_Q).epsilon(1e-8));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(V[6 * i + j] == V[6 * j + i]);
  CHECK(A[0] < 0.0);
  CHECK(A[2 * 6 + 3] == doctest::Approx(2 * M_PI * 1e7));
  CHECK(D[2 * 6 + 2] == 0.0);

  CHECK(eom_analysis_branch(a, 1, &b) == EOM_ERR_ARGUMENT);
  CHECK(eom_analysis_covariance(a, 5, V) == EOM_ERR_ARGUMENT);
  eom_analysis_free(a);
  eom_config_free(c);
}

TEST_CASE("unstable branches carry no covariance") {
  // Inside the bistable window the middle branch is unstable.
  eom_sweep* s = nullptr;
  REQUIRE(eom_sweep_from_preset("fig3", nullptr, nullptr, &s) == EOM_OK);
  eom_config* c = nullptr;
  REQUIRE(eom_sweep_base_config(s, &c) == EOM_OK);
  eom_rates r{};
  REQUIRE(eom_config_rates(c, &r) == EOM_OK);
  REQUIRE(eom_config_set(c, "delta0c", 1.895 * r.kappa) == EOM_OK);
  eom_analysis* a = nullptr;
  REQUIRE(eom_analyze(c, &a) == EOM_OK);
  REQUIRE(eom_analysis_branch_count(a) == 3);
  CHECK(eom_analysis_stable_count(a) == 2);
  int unstable = 0;
  for (size_t i = 0; i < 3; ++i) {
    eom_branch b{};
    REQUIRE(eom_analysis_branch(a, i, &b) == EOM_OK);
    if (!b.stable) {
      ++unstable;
      double V[36];
      CHECK(b.has_observables == 0);
      CHECK(eom_analysis_covariance(a, i, V) != EOM_OK);
    }
  }
  CHECK(unstable == 1);
  eom_analysis_free(a);
  eom_config_free(c);
  eom_sweep_free(s);
}

TEST_CASE("sweeps") {
  eom_sweep* s = nullptr;
  CHECK(eom_sweep_from_preset("nope", nullptr, nullptr, &s) == EOM_ERR_CONFIG);
  const double ratio = -4e-3;
  REQUIRE(eom_sweep_from_preset("fig4", nullptr, &ratio, &s) == EOM_OK);
  REQUIRE(eom_sweep_clear_axes(s) == EOM_OK);
  REQUIRE(eom_sweep_add_linear_axis(s, "delta0w", -2e8, 2e8, 5) == EOM_OK);
  const double temps[] = {1e-3, 2e-3};
  REQUIRE(eom_sweep_add_axis(s, "temperature", temps, 2) == EOM_OK);
  CHECK(eom_sweep_add_axis(s, "kappa", temps, 2) == EOM_ERR_ARGUMENT);
  CHECK(eom_sweep_set_policy(s, "bogus") == EOM_ERR_ARGUMENT);
  CHECK(eom_sweep_set_jobs(s, 0) == EOM_ERR_ARGUMENT);
  REQUIRE(eom_sweep_set_jobs(s, 2) == EOM_OK);

  std::vector<eom_record> rows;
  auto collect = [](const eom_record* r, void* user) {
    static_cast<std::vector<eom_record>*>(user)->push_back(*r);
    return 0;
  };
  REQUIRE(eom_sweep_run(s, collect, &rows) == EOM_OK);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].n_coords == 2);
  CHECK(rows[0].coords[0] == -2e8);
  CHECK(rows[1].coords[1] == 2e-3);

  int seen = 0;
  auto stop_after_three = [](const eom_record*, void* user) { return ++*static_cast<int*>(user) >= 3 ? 1 : 0; };
  REQUIRE(eom_sweep_run(s, stop_after_three, &seen) == EOM_OK);
  CHECK(seen == 3);

  char* desc = nullptr;
  REQUIRE(eom_sweep_describe(s, &desc) == EOM_OK);
  const std::string d(desc);
  eom_string_free(desc);
  CHECK(d.find("\"g2_over_g1\": -0.004") != std::string::npos);
  CHECK(d.find("delta0w") != std::string::npos);

  eom_config* base = nullptr;
  REQUIRE(eom_sweep_base_config(s, &base) == EOM_OK);
  REQUIRE(eom_config_set(base, "power", 3e-6) == EOM_OK);
  REQUIRE(eom_sweep_set_base_config(s, base) == EOM_OK);
  REQUIRE(eom_sweep_describe(s, &desc) == EOM_OK);
  CHECK(std::string(desc).find("3e-06") != std::string::npos);
  eom_string_free(desc);

  CHECK(eom_sweep_write(s, "/nonexistent/dir/out.csv", "csv") == EOM_ERR_IO);
  CHECK(eom_sweep_write(s, "/tmp/eomech_capi.csv", "xml") == EOM_ERR_ARGUMENT);
  eom_config_free(base);
  eom_sweep_free(s);
}

TEST_CASE("critical temperature") {
  eom_config* c = fig2();
  double tc = -1, lo = 0, hi = 0;
  REQUIRE(eom_critical_temperature(c, "ow", 0.3, 1e-3, &tc, &lo, &hi) == EOM_OK);
  CHECK(tc > 0.0);
  CHECK(lo > 0.0);
  CHECK(hi < 1e-6);
  CHECK(eom_critical_temperature(c, "xx", 0.3, 1e-3, &tc, nullptr, nullptr) == EOM_ERR_ARGUMENT);
  eom_config_free(c);
}

TEST_CASE("dynamics series") {
  eom_config* c = fig2();
  eom_series* s = nullptr;
  REQUIRE(eom_dynamics(c, "full", "vacuum", 0.0, 100, 1e-8, &s) == EOM_OK);
  CHECK(eom_series_rows(s) == 1);
  CHECK(std::string(eom_series_column_name(s, 0)) == "t");
  CHECK(eom_series_value(s, 0, 4) == 0.0);
  CHECK(std::isnan(eom_series_value(s, 3, 0)));
  eom_series_free(s);

  REQUIRE(eom_dynamics(c, "adiabatic", nullptr, 1e-5, 11, 1e-8, &s) == EOM_OK);
  CHECK(eom_series_rows(s) == 11);
  CHECK(eom_series_value(s, 10, 0) == doctest::Approx(1e-5));
  CHECK(eom_series_write(s, "/nonexistent/dir/s.csv", "csv") == EOM_ERR_IO);
  eom_series_free(s);

  CHECK(eom_dynamics(c, "sideways", nullptr, 1e-5, 11, 1e-8, &s) == EOM_ERR_ARGUMENT);
  CHECK(eom_dynamics(c, "full", "thermal", 1e-5, 11, 1e-8, &s) == EOM_ERR_ARGUMENT);
  CHECK(eom_dynamics(c, "full", nullptr, -1.0, 11, 1e-8, &s) == EOM_ERR_ARGUMENT);
  eom_config_free(c);
}

TEST_CASE("null handles are rejected") {
  eom_analysis* a = nullptr;
  CHECK(eom_analyze(nullptr, &a) == EOM_ERR_ARGUMENT);
  CHECK(eom_sweep_run(nullptr, nullptr, nullptr) == EOM_ERR_ARGUMENT);
  CHECK(eom_analysis_branch_count(nullptr) == 0);
  CHECK(eom_series_rows(nullptr) == 0);
  eom_config_free(nullptr);
  eom_analysis_free(nullptr);
  eom_sweep_free(nullptr);
  eom_series_free(nullptr);
}
