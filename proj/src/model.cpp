#include "model.hpp"

#include <algorithm>
#include <cmath>

namespace fanoshg {

std::atomic<bool> g_flip_sh_source{false};

StateVec pack(const DynamicState& s) {
    return {s.alpha1.real(),  s.alpha1.imag(),  s.alpha2.real(),  s.alpha2.imag(),
            s.rho_ge1.real(), s.rho_ge1.imag(), s.rho_ge2.real(), s.rho_ge2.imag(),
            s.rho_ee1,        s.rho_ee2};
}

DynamicState unpack(const StateVec& v) {
    DynamicState s;
    s.alpha1 = {v[0], v[1]};
    s.alpha2 = {v[2], v[3]};
    s.rho_ge1 = {v[4], v[5]};
    s.rho_ge2 = {v[6], v[7]};
    s.rho_ee1 = v[8];
    s.rho_ee2 = v[9];
    return s;
}

DynamicState rhs_lab(const DynamicState& s, const SystemParams& p, double t) {
    const double w = p.omega_drive;
    const double sh_sign = g_flip_sh_source.load(std::memory_order_relaxed) ? -1.0 : 1.0;
    const double y1 = 2.0 * s.rho_ee1 - 1.0;
    const double y2 = 2.0 * s.rho_ee2 - 1.0;
    // Effective field seen by each emitter: the SH mode plus the partner
    // coherence. The same bracket pumps the coherence and the population, so
    // each emitter is an exact two-level system in its local drive.
    const cplx om1 = std::conj(p.f1) * s.alpha2 + std::conj(p.g) * s.rho_ge2;
    const cplx om2 = std::conj(p.f2) * s.alpha2 + std::conj(p.g) * s.rho_ge1;

    DynamicState d;
    d.alpha1 = p.eps_p * std::exp(-I * w * t) - (I * p.omega1 + p.gamma1) * s.alpha1 -
               2.0 * I * p.chi2 * std::conj(s.alpha1) * s.alpha2;
    d.alpha2 = -(I * p.omega2 + p.gamma2) * s.alpha2 -
               sh_sign * I * p.chi2 * s.alpha1 * s.alpha1 - I * p.f1 * s.rho_ge1 -
               I * p.f2 * s.rho_ge2;
    d.rho_ge1 = -(I * p.omega_eg1 + p.gamma_eg1()) * s.rho_ge1 + I * y1 * om1;
    d.rho_ge2 = -(I * p.omega_eg2 + p.gamma_eg2()) * s.rho_ge2 + I * y2 * om2;
    d.rho_ee1 = -p.gamma_ee1 * s.rho_ee1 - 2.0 * std::imag(std::conj(om1) * s.rho_ge1);
    d.rho_ee2 = -p.gamma_ee2 * s.rho_ee2 - 2.0 * std::imag(std::conj(om2) * s.rho_ge2);
    return d;
}

DynamicState rhs_rotating(const DynamicState& s, const SystemParams& p) {
    const auto sh = shorthands(p);
    const double sh_sign = g_flip_sh_source.load(std::memory_order_relaxed) ? -1.0 : 1.0;
    const double y1 = 2.0 * s.rho_ee1 - 1.0;
    const double y2 = 2.0 * s.rho_ee2 - 1.0;
    const cplx om1 = std::conj(p.f1) * s.alpha2 + std::conj(p.g) * s.rho_ge2;
    const cplx om2 = std::conj(p.f2) * s.alpha2 + std::conj(p.g) * s.rho_ge1;

    DynamicState d;
    d.alpha1 = p.eps_p - sh.xi1 * s.alpha1 - 2.0 * I * p.chi2 * std::conj(s.alpha1) * s.alpha2;
    d.alpha2 = -sh.xi2 * s.alpha2 - sh_sign * I * p.chi2 * s.alpha1 * s.alpha1 -
               I * p.f1 * s.rho_ge1 - I * p.f2 * s.rho_ge2;
    d.rho_ge1 = -sh.beta1 * s.rho_ge1 + I * y1 * om1;
    d.rho_ge2 = -sh.beta2 * s.rho_ge2 + I * y2 * om2;
    d.rho_ee1 = -p.gamma_ee1 * s.rho_ee1 - 2.0 * std::imag(std::conj(om1) * s.rho_ge1);
    d.rho_ee2 = -p.gamma_ee2 * s.rho_ee2 - 2.0 * std::imag(std::conj(om2) * s.rho_ge2);
    return d;
}

DynamicState to_lab(const DynamicState& env, double t, const SystemParams& p) {
    const double w = p.omega_drive;
    const cplx e1 = std::exp(-I * w * t);
    const cplx e2 = std::exp(-2.0 * I * w * t);
    DynamicState s = env;
    s.alpha1 = env.alpha1 * e1;
    s.alpha2 = env.alpha2 * e2;
    s.rho_ge1 = env.rho_ge1 * e2;
    s.rho_ge2 = env.rho_ge2 * e2;
    return s;
}

DynamicState from_lab(const DynamicState& lab, double t, const SystemParams& p) {
    const double w = p.omega_drive;
    const cplx e1 = std::exp(I * w * t);
    const cplx e2 = std::exp(2.0 * I * w * t);
    DynamicState s = lab;
    s.alpha1 = lab.alpha1 * e1;
    s.alpha2 = lab.alpha2 * e2;
    s.rho_ge1 = lab.rho_ge1 * e2;
    s.rho_ge2 = lab.rho_ge2 * e2;
    return s;
}

double purity_excess(const DynamicState& s) {
    const double e1 = std::norm(s.rho_ge1) - s.rho_ee1 * (1.0 - s.rho_ee1);
    const double e2 = std::norm(s.rho_ge2) - s.rho_ee2 * (1.0 - s.rho_ee2);
    return std::max(e1, e2);
}

double rhs_max_norm(const DynamicState& d) {
    const StateVec v = pack(d);
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace fanoshg
