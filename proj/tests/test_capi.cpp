#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <string>

#include "fano_shg.h"

namespace {

struct Params {
    fano_params* h = nullptr;
    explicit Params(const char* preset = nullptr)
        : h(preset ? fano_params_create_preset(preset) : fano_params_create()) {}
    ~Params() { fano_params_destroy(h); }
    Params(const Params&) = delete;
    Params& operator=(const Params&) = delete;
    operator fano_params*() const { return h; }
};

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { fano_string_free(s); }
    std::string view() const { return s ? std::string(s) : std::string(); }
};

void set_linear(fano_params* p, double gamma1, double eps) {
    REQUIRE(fano_params_set(p, "chi2", 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "f1", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "f2", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "g", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_params_set(p, "gamma1", gamma1) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "eps_p", eps, 0.0) == FANO_OK);
}

void set_stable(fano_params* p) {
    REQUIRE(fano_params_set(p, "omega2", 2.08) == FANO_OK);
    REQUIRE(fano_params_set(p, "omega_eg1", 2.12) == FANO_OK);
    REQUIRE(fano_params_set(p, "omega_eg2", 2.40) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "f1", 0.07, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "f2", 0.07, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "g", 0.004, 0.002) == FANO_OK);
    REQUIRE(fano_params_set(p, "gamma_ee1", 5e-4) == FANO_OK);
    REQUIRE(fano_params_set(p, "gamma_ee2", 5e-4) == FANO_OK);
    REQUIRE(fano_params_set(p, "chi2", 1e-4) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "eps_p", 0.08, 0.0) == FANO_OK);
}

} // namespace

TEST_CASE("parameter handles round-trip every field") {
    Params p;
    REQUIRE(p.h != nullptr);

    CHECK(fano_params_set(p, "omega1", 1.25) == FANO_OK);
    double v = 0.0;
    CHECK(fano_params_get(p, "omega1", &v) == FANO_OK);
    CHECK(v == 1.25);

    CHECK(fano_params_set_complex(p, "g", 0.3, -0.4) == FANO_OK);
    double re = 0.0, im = 0.0;
    CHECK(fano_params_get_complex(p, "g", &re, &im) == FANO_OK);
    CHECK(re == 0.3);
    CHECK(im == -0.4);

    // plain get on a complex field reports the magnitude
    CHECK(fano_params_get(p, "g", &v) == FANO_OK);
    CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

    fano_params* c = fano_params_clone(p);
    REQUIRE(c != nullptr);
    CHECK(fano_params_get(c, "omega1", &v) == FANO_OK);
    CHECK(v == 1.25);
    fano_params_destroy(c);
}

TEST_CASE("unknown fields and invalid values are rejected with messages") {
    Params p;
    CHECK(fano_params_set(p, "not_a_field", 1.0) == FANO_ERR_BAD_INPUT);
    CHECK(std::strlen(fano_last_error()) > 0);

    CHECK(fano_params_set(p, "gamma1", -1.0) == FANO_OK);  // stored...
    CHECK(fano_params_validate(p) == FANO_ERR_INVALID_PARAM);  // ...rejected here
    CHECK(std::string(fano_last_error()).find("gamma1") != std::string::npos);

    CHECK(fano_params_set(p, "gamma1", 0.01) == FANO_OK);
    CHECK(fano_params_validate(p) == FANO_OK);

    double v;
    CHECK(fano_params_get(nullptr, "omega1", &v) == FANO_ERR_BAD_INPUT);
    CHECK(fano_params_get(p, "omega1", nullptr) == FANO_ERR_BAD_INPUT);
}

TEST_CASE("presets are exposed by name") {
    Params bare("bare");
    REQUIRE(bare.h != nullptr);
    double chi = -1.0;
    CHECK(fano_params_get(bare, "chi2", &chi) == FANO_OK);
    CHECK(chi > 0.0);
    double re, im;
    CHECK(fano_params_get_complex(bare, "f1", &re, &im) == FANO_OK);
    CHECK(re == 0.0);
    CHECK(im == 0.0);

    Params opt("paper-optimum");
    REQUIRE(opt.h != nullptr);
    Params osc("self-oscillation");
    REQUIRE(osc.h != nullptr);

    CHECK(fano_params_create_preset("no-such-preset") == nullptr);
    CHECK(std::strlen(fano_last_error()) > 0);
}

TEST_CASE("integrator config defaults are populated") {
    fano_integrator_config cfg;
    std::memset(&cfg, 0xAB, sizeof cfg);
    fano_integrator_config_init(&cfg);
    CHECK(cfg.rel_tol > 0.0);
    CHECK(cfg.abs_tol > 0.0);
    CHECK(cfg.t_max > 0.0);
    CHECK(cfg.convergence_eps > 0.0);
    CHECK(cfg.max_steps > 0);
    CHECK(cfg.convergence_window == 0.0);  // 0 = automatic
}

TEST_CASE("time evolution reaches the linear steady state") {
    Params p;
    set_linear(p, 0.01, 0.05);
    fano_integrator_config cfg;
    fano_integrator_config_init(&cfg);
    cfg.t_max = 2e4;

    fano_steady_state s;
    REQUIRE(fano_integrate(p, &cfg, &s) == FANO_OK);
    CHECK(s.converged == 1);
    CHECK(s.stiffness_detected == 0);
    CHECK(s.residual < 1e-9);
    CHECK(s.steps > 0);
    CHECK(s.t_elapsed > 0.0);

    // closed form: alpha1 = eps / (i(omega1 - omega) + gamma1) with omega = omega1
    const std::complex<double> want = 0.05 / std::complex<double>(0.01, 0.0);
    CHECK(s.alpha1_re == doctest::Approx(want.real()).epsilon(1e-6));
    CHECK(std::abs(s.alpha1_im - want.imag()) < 1e-6);
    CHECK(std::abs(s.alpha2_re) < 1e-12);
    CHECK(s.y1 == doctest::Approx(-1.0).epsilon(1e-9));

    double dev = -1.0;
    CHECK(fano_verify_ansatz(p, &s, 16, &dev) == FANO_OK);
    CHECK(dev < 1e-7);
}

TEST_CASE("closed-form helpers agree across the reduction chain") {
    Params p;
    REQUIRE(fano_params_set_complex(p, "f2", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "g", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "f1", 0.08, 0.01) == FANO_OK);

    double tre, tim, sre, sim, bre, bim;
    REQUIRE(fano_alpha2_two_qe(p, -0.7, -1.0, 0.9, 0.1, &tre, &tim) == FANO_OK);
    REQUIRE(fano_alpha2_single_qe(p, -0.7, 0.9, 0.1, &sre, &sim) == FANO_OK);
    CHECK(tre == doctest::Approx(sre).epsilon(1e-12));
    CHECK(tim == doctest::Approx(sim).epsilon(1e-12));

    REQUIRE(fano_params_set_complex(p, "f1", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_alpha2_two_qe(p, -0.7, -1.0, 0.9, 0.1, &tre, &tim) == FANO_OK);
    REQUIRE(fano_alpha2_bare(p, 0.9, 0.1, &bre, &bim) == FANO_OK);
    CHECK(tre == doctest::Approx(bre).epsilon(1e-12));
    CHECK(tim == doctest::Approx(bim).epsilon(1e-12));

    // inversions must stay physical
    CHECK(fano_alpha2_two_qe(p, 1.5, -1.0, 1.0, 0.0, &tre, &tim) ==
          FANO_ERR_BAD_INPUT);
}

TEST_CASE("fixed-point solver reports and fills both outcomes") {
    Params p;
    set_stable(p);

    fano_steady_state s;
    REQUIRE(fano_solve_fixed_point(p, nullptr, 20000, 1e-12, &s) == FANO_OK);
    CHECK(s.converged == 1);
    CHECK(s.residual < 1e-10);
    CHECK(s.y1 > -1.0);
    CHECK(s.y1 < 0.0);

    // warm start from the solution lands immediately
    fano_steady_state s2;
    REQUIRE(fano_solve_fixed_point(p, &s, 20000, 1e-12, &s2) == FANO_OK);
    CHECK(s2.steps <= 5);

    // an impossible budget still returns the last iterate
    fano_steady_state s3;
    CHECK(fano_solve_fixed_point(p, nullptr, 2, 1e-14, &s3) ==
          FANO_ERR_NO_CONVERGENCE);
    CHECK(s3.converged == 0);
    CHECK(s3.steps == 2);
    CHECK(std::isfinite(s3.alpha1_re));
    CHECK(std::isfinite(s3.residual));
}

TEST_CASE("enhancement of the uncoupled converter is exactly one") {
    Params p;
    REQUIRE(fano_params_set_complex(p, "f1", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "f2", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "g", 0.0, 0.0) == FANO_OK);
    REQUIRE(fano_params_set_complex(p, "eps_p", 0.01, 0.0) == FANO_OK);

    fano_enhancement_report rep;
    REQUIRE(fano_enhancement(p, FANO_METHOD_FIXED_POINT, nullptr, &rep) == FANO_OK);
    CHECK(rep.intensity_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.alpha2_coupled_re == rep.alpha2_bare_re);
    CHECK(rep.alpha2_coupled_im == rep.alpha2_bare_im);
}

TEST_CASE("drive calibration brackets and converges") {
    Params p;
    set_stable(p);

    fano_steady_state ref;
    REQUIRE(fano_solve_fixed_point(p, nullptr, 20000, 1e-12, &ref) == FANO_OK);

    double eps_out = 0.0;
    REQUIRE(fano_calibrate_drive(p, ref.y2, 0.01, 0.3, FANO_METHOD_FIXED_POINT,
                                 nullptr, 1e-6, &eps_out) == FANO_OK);
    CHECK(eps_out == doctest::Approx(0.08).epsilon(0.05));

    // the handle now carries the calibrated drive
    double re, im;
    CHECK(fano_params_get_complex(p, "eps_p", &re, &im) == FANO_OK);
    CHECK(re == doctest::Approx(eps_out).epsilon(1e-12));

    double unused;
    CHECK(fano_calibrate_drive(p, 0.5, 0.01, 0.3, FANO_METHOD_FIXED_POINT,
                               nullptr, 1e-6, &unused) == FANO_ERR_BAD_INPUT);
}

TEST_CASE("search runs from a JSON spec") {
    const char* spec = R"({
        "base": {"omega_eg1": 2.111, "omega_eg2": 2.571,
                 "f1": [-0.0994, 0.0], "f2": [-0.0994, 0.0],
                 "g": [0.0066, -0.036], "omega2": 2.1,
                 "chi2": 1e-4, "eps_p": [0.01, 0.0]},
        "variables": [{"name": "omega_eg1", "lower": 2.10, "upper": 2.12}],
        "strategy": "Grid",
        "objective": "CrudeEq9",
        "grid_points": 5,
        "max_evals": 5
    })";

    OwnedString summary, trace;
    REQUIRE(fano_run_search(spec, &summary.s, &trace.s) == FANO_OK);
    const std::string sm = summary.view();
    CHECK(sm.find("\"best_objective\"") != std::string::npos);
    CHECK(sm.find("\"eval_count\": 5") != std::string::npos);
    CHECK(trace.view().rfind("index,digest,objective,pole_flag\n", 0) == 0);

    OwnedString s2, t2;
    CHECK(fano_run_search("{\"strategy\": \"Magic\"}", &s2.s, &t2.s) ==
          FANO_ERR_BAD_INPUT);
}

TEST_CASE("sweeps emit CSV through the boundary") {
    Params p;
    set_stable(p);
    const double values[3] = {2.10, 2.12, 2.14};
    OwnedString csv;
    REQUIRE(fano_sweep(p, "omega_eg1", values, 3, 0, nullptr, 12, &csv.s) == FANO_OK);
    const std::string text = csv.view();
    CHECK(text.rfind("omega_eg1,objective_crude,objective_full,pole_flag\n", 0) == 0);
    // header + three rows, newline-terminated
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);

    OwnedString bad;
    CHECK(fano_sweep(p, "bogus", values, 3, 0, nullptr, 12, &bad.s) ==
          FANO_ERR_BAD_INPUT);
}

TEST_CASE("full run report serializes the pipeline") {
    Params p;
    set_linear(p, 0.01, 0.05);
    fano_integrator_config cfg;
    fano_integrator_config_init(&cfg);
    cfg.t_max = 2e4;

    OwnedString json;
    REQUIRE(fano_run_report_json(p, &cfg, FANO_METHOD_FIXED_POINT, nullptr, 0,
                                 &json.s) == FANO_OK);
    const std::string text = json.view();
    CHECK(text.find("\"schema_version\": \"1\"") != std::string::npos);
    CHECK(text.find("\"steady_state\"") != std::string::npos);
    CHECK(text.find("\"enhancement\"") != std::string::npos);
    CHECK(text.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("self-checks pass clean and catch an injected fault") {
    OwnedString table;
    REQUIRE(fano_validate(0, &table.s) == FANO_OK);
    CHECK(table.view().find("[ OK ]") != std::string::npos);
    CHECK(table.view().find("FAIL") == std::string::npos);

    OwnedString faulted;
    CHECK(fano_validate(1, &faulted.s) == FANO_ERR_ORACLE);
    CHECK(faulted.view().find("FAIL") != std::string::npos);
}

TEST_CASE("small contract details hold") {
    CHECK(fano_version() != nullptr);
    CHECK(std::string(fano_version()).find("fano-shg") != std::string::npos);
    fano_string_free(nullptr);  // must be a no-op
    CHECK(fano_integrate(nullptr, nullptr, nullptr) == FANO_ERR_BAD_INPUT);
    CHECK(fano_run_search(nullptr, nullptr, nullptr) == FANO_ERR_BAD_INPUT);
}
