#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "model.hpp"
#include "rng.hpp"

using namespace fanoshg;

namespace {

// Transcribed independently from the model documentation (header comments
// and the derived-rates convention), NOT from model.cpp — any sign or
// conjugation slip in either copy shows up as a mismatch here.
DynamicState reference_rhs(const DynamicState& s, const SystemParams& p) {
    const cplx i{0.0, 1.0};
    const double w = p.omega_drive;
    const cplx xi1 = i * (p.omega1 - w) + p.gamma1;
    const cplx xi2 = i * (p.omega2 - 2.0 * w) + p.gamma2;
    const cplx b1 = i * (p.omega_eg1 - 2.0 * w) + 0.5 * p.gamma_ee1;
    const cplx b2 = i * (p.omega_eg2 - 2.0 * w) + 0.5 * p.gamma_ee2;
    const double y1 = 2.0 * s.rho_ee1 - 1.0;
    const double y2 = 2.0 * s.rho_ee2 - 1.0;
    const cplx O1 = std::conj(p.f1) * s.alpha2 + std::conj(p.g) * s.rho_ge2;
    const cplx O2 = std::conj(p.f2) * s.alpha2 + std::conj(p.g) * s.rho_ge1;

    DynamicState d;
    d.alpha1 = p.eps_p - xi1 * s.alpha1 - 2.0 * i * p.chi2 * std::conj(s.alpha1) * s.alpha2;
    d.alpha2 = -xi2 * s.alpha2 - i * p.chi2 * s.alpha1 * s.alpha1 - i * p.f1 * s.rho_ge1 -
               i * p.f2 * s.rho_ge2;
    d.rho_ge1 = -b1 * s.rho_ge1 + i * y1 * O1;
    d.rho_ge2 = -b2 * s.rho_ge2 + i * y2 * O2;
    d.rho_ee1 = -p.gamma_ee1 * s.rho_ee1 - 2.0 * std::imag(std::conj(O1) * s.rho_ge1);
    d.rho_ee2 = -p.gamma_ee2 * s.rho_ee2 - 2.0 * std::imag(std::conj(O2) * s.rho_ge2);
    return d;
}

SystemParams draw_params(SplitMix64& rng) {
    SystemParams p;
    p.omega2 = rng.range(1.9, 2.2);
    p.omega_eg1 = rng.range(2.0, 2.6);
    p.omega_eg2 = rng.range(2.0, 2.6);
    p.gamma1 = rng.range(0.001, 0.05);
    p.gamma2 = rng.range(0.001, 0.05);
    p.gamma_ee1 = rng.range(1e-5, 1e-3);
    p.gamma_ee2 = rng.range(1e-5, 1e-3);
    p.f1 = {rng.range(-0.2, 0.2), rng.range(-0.2, 0.2)};
    p.f2 = {rng.range(-0.2, 0.2), rng.range(-0.2, 0.2)};
    p.g = {rng.range(-0.05, 0.05), rng.range(-0.05, 0.05)};
    p.chi2 = rng.range(1e-5, 1e-3);
    p.eps_p = {rng.range(-0.3, 0.3), rng.range(-0.3, 0.3)};
    return p;
}

DynamicState draw_state(SplitMix64& rng) {
    DynamicState s;
    s.alpha1 = {rng.range(-3.0, 3.0), rng.range(-3.0, 3.0)};
    s.alpha2 = {rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)};
    s.rho_ge1 = {rng.range(-0.5, 0.5), rng.range(-0.5, 0.5)};
    s.rho_ge2 = {rng.range(-0.5, 0.5), rng.range(-0.5, 0.5)};
    s.rho_ee1 = rng.range(0.0, 1.0);
    s.rho_ee2 = rng.range(0.0, 1.0);
    return s;
}

double max_component_diff(const DynamicState& a, const DynamicState& b) {
    double m = std::abs(a.alpha1 - b.alpha1);
    m = std::max(m, std::abs(a.alpha2 - b.alpha2));
    m = std::max(m, std::abs(a.rho_ge1 - b.rho_ge1));
    m = std::max(m, std::abs(a.rho_ge2 - b.rho_ge2));
    m = std::max(m, std::abs(a.rho_ee1 - b.rho_ee1));
    m = std::max(m, std::abs(a.rho_ee2 - b.rho_ee2));
    return m;
}

} // namespace

TEST_CASE("envelope equations match an independent transcription") {
    SplitMix64 rng(101);
    for (int i = 0; i < 300; ++i) {
        const SystemParams p = draw_params(rng);
        const DynamicState s = draw_state(rng);
        const DynamicState got = rhs_rotating(s, p);
        const DynamicState want = reference_rhs(s, p);
        const double scale = std::max(rhs_max_norm(want), 1e-12);
        CHECK(max_component_diff(got, want) / scale < 1e-14);
    }
}

TEST_CASE("frame maps are inverse bijections preserving invariants") {
    SplitMix64 rng(202);
    for (int i = 0; i < 100; ++i) {
        const SystemParams p = draw_params(rng);
        const DynamicState s = draw_state(rng);
        const double t = rng.range(-50.0, 50.0);
        const DynamicState lab = to_lab(s, t, p);
        const DynamicState back = from_lab(lab, t, p);
        CHECK(max_component_diff(back, s) < 1e-14);
        // magnitudes and populations are frame invariant
        CHECK(std::abs(lab.alpha1) == doctest::Approx(std::abs(s.alpha1)).epsilon(1e-12));
        CHECK(std::abs(lab.alpha2) == doctest::Approx(std::abs(s.alpha2)).epsilon(1e-12));
        CHECK(std::abs(lab.rho_ge1) == doctest::Approx(std::abs(s.rho_ge1)).epsilon(1e-12));
        CHECK(lab.rho_ee1 == s.rho_ee1);
        CHECK(lab.rho_ee2 == s.rho_ee2);
    }
}

TEST_CASE("lab and rotating flows agree through the frame map") {
    SplitMix64 rng(303);
    for (int i = 0; i < 100; ++i) {
        const SystemParams p = draw_params(rng);
        const DynamicState env = draw_state(rng);
        const double t = rng.range(0.0, 200.0);
        const double w = p.omega_drive;

        const DynamicState rot_d = rhs_rotating(env, p);
        const DynamicState lab_d = rhs_lab(to_lab(env, t, p), p, t);

        // envelope rule: d(env)/dt = d(lab)/dt * e^{+ikwt} + ikw * env
        const cplx iw{0.0, w};
        const cplx ph1 = std::exp(cplx{0.0, w * t});
        const cplx ph2 = std::exp(cplx{0.0, 2.0 * w * t});
        DynamicState mapped;
        mapped.alpha1 = lab_d.alpha1 * ph1 + iw * env.alpha1;
        mapped.alpha2 = lab_d.alpha2 * ph2 + 2.0 * iw * env.alpha2;
        mapped.rho_ge1 = lab_d.rho_ge1 * ph2 + 2.0 * iw * env.rho_ge1;
        mapped.rho_ge2 = lab_d.rho_ge2 * ph2 + 2.0 * iw * env.rho_ge2;
        mapped.rho_ee1 = lab_d.rho_ee1;
        mapped.rho_ee2 = lab_d.rho_ee2;

        const double scale = std::max(rhs_max_norm(rot_d), 1e-12);
        CHECK(max_component_diff(mapped, rot_d) / scale < 1e-12);
    }
}

TEST_CASE("drive phase rotates the solution covariantly") {
    SplitMix64 rng(404);
    for (int i = 0; i < 100; ++i) {
        const SystemParams p = draw_params(rng);
        const DynamicState s = draw_state(rng);
        const double phi = rng.range(0.0, 6.2831853);
        const cplx u1 = std::exp(cplx{0.0, phi});
        const cplx u2 = u1 * u1;

        SystemParams p2 = p;
        p2.eps_p = p.eps_p * u1;
        DynamicState s2 = s;
        s2.alpha1 = s.alpha1 * u1;
        s2.alpha2 = s.alpha2 * u2;
        s2.rho_ge1 = s.rho_ge1 * u2;
        s2.rho_ge2 = s.rho_ge2 * u2;

        const DynamicState d = rhs_rotating(s, p);
        const DynamicState d2 = rhs_rotating(s2, p2);
        DynamicState d_expected;
        d_expected.alpha1 = d.alpha1 * u1;
        d_expected.alpha2 = d.alpha2 * u2;
        d_expected.rho_ge1 = d.rho_ge1 * u2;
        d_expected.rho_ge2 = d.rho_ge2 * u2;
        d_expected.rho_ee1 = d.rho_ee1;
        d_expected.rho_ee2 = d.rho_ee2;

        const double scale = std::max(rhs_max_norm(d), 1e-12);
        CHECK(max_component_diff(d2, d_expected) / scale < 1e-13);
    }
}

TEST_CASE("state packing round-trips exactly") {
    SplitMix64 rng(505);
    for (int i = 0; i < 20; ++i) {
        const DynamicState s = draw_state(rng);
        const DynamicState r = unpack(pack(s));
        CHECK(r.alpha1 == s.alpha1);
        CHECK(r.alpha2 == s.alpha2);
        CHECK(r.rho_ge1 == s.rho_ge1);
        CHECK(r.rho_ge2 == s.rho_ge2);
        CHECK(r.rho_ee1 == s.rho_ee1);
        CHECK(r.rho_ee2 == s.rho_ee2);
    }
}

TEST_CASE("purity excess is zero on the pure manifold, positive past it") {
    DynamicState s;
    s.rho_ee1 = 0.3;
    s.rho_ee2 = 0.5;
    // |rho_ge|^2 = rho_ee (1 - rho_ee) -> exactly pure
    s.rho_ge1 = {std::sqrt(0.3 * 0.7), 0.0};
    s.rho_ge2 = {0.0, std::sqrt(0.25)};
    CHECK(purity_excess(s) == doctest::Approx(0.0).epsilon(1e-15));

    s.rho_ge1 *= 1.01;  // overshoot
    CHECK(purity_excess(s) > 0.0);

    s.rho_ge1 = {0.0, 0.0};
    s.rho_ge2 = {0.0, 0.0};
    CHECK(purity_excess(s) < 0.0);  // mixed states sit below the boundary
}

TEST_CASE("inversions are the standard population map") {
    DynamicState s;
    s.rho_ee1 = 0.0;
    s.rho_ee2 = 1.0;
    const Inversions y = inversions_of(s);
    CHECK(y.y1 == doctest::Approx(-1.0));
    CHECK(y.y2 == doctest::Approx(1.0));
}

TEST_CASE("fault hook flips exactly the SH source term in both frames") {
    SplitMix64 rng(606);
    const SystemParams p = draw_params(rng);
    const DynamicState s = draw_state(rng);
    const double t = 3.7;

    const DynamicState clean_rot = rhs_rotating(s, p);
    const DynamicState clean_lab = rhs_lab(s, p, t);
    g_flip_sh_source.store(true);
    const DynamicState faulty_rot = rhs_rotating(s, p);
    const DynamicState faulty_lab = rhs_lab(s, p, t);
    g_flip_sh_source.store(false);

    const cplx expected_delta = 2.0 * cplx{0.0, 1.0} * p.chi2 * s.alpha1 * s.alpha1;
    CHECK(std::abs((clean_rot.alpha2 - faulty_rot.alpha2) - (-expected_delta)) < 1e-15);
    CHECK(std::abs((clean_lab.alpha2 - faulty_lab.alpha2) - (-expected_delta)) < 1e-15);
    // every other component untouched
    CHECK(std::abs(clean_rot.alpha1 - faulty_rot.alpha1) == 0.0);
    CHECK(std::abs(clean_rot.rho_ge1 - faulty_rot.rho_ge1) == 0.0);
    CHECK(std::abs(clean_rot.rho_ge2 - faulty_rot.rho_ge2) == 0.0);
    CHECK(clean_rot.rho_ee1 == faulty_rot.rho_ee1);
    CHECK(clean_rot.rho_ee2 == faulty_rot.rho_ee2);
}

TEST_CASE("parameter validation names the offending field") {
    SystemParams p;
    p.gamma1 = -0.5;
    try {
        p.validate();
        FAIL("expected InvalidParamError");
    } catch (const InvalidParamError& e) {
        CHECK(e.field == "gamma1");
        CHECK(std::string(e.what()).find("gamma1") != std::string::npos);
    }

    SystemParams q;
    q.f2 = {std::nan(""), 0.0};
    CHECK_THROWS_AS(q.validate(), InvalidParamError);
}

TEST_CASE("derived coherence decay is half the population decay") {
    SystemParams p;
    p.gamma_ee1 = 4e-4;
    p.gamma_ee2 = 6e-4;
    CHECK(p.gamma_eg1() == doctest::Approx(2e-4));
    CHECK(p.gamma_eg2() == doctest::Approx(3e-4));
    const Shorthands sh = shorthands(p);
    CHECK(sh.beta1.real() == doctest::Approx(2e-4));
    CHECK(sh.beta2.real() == doctest::Approx(3e-4));
    CHECK(sh.beta1.imag() == doctest::Approx(p.omega_eg1 - 2.0));
}
