#pragma once
#include <array>
#include <atomic>

#include "params.hpp"

namespace fanoshg {

// The six evolving quantities. In the Lab frame these are the physical
// amplitudes; in the Rotating frame the same struct carries the tilde
// envelopes (alpha1 ~ e^{+i w t} alpha1_lab, alpha2 and the coherences
// ~ e^{+2 i w t} x their lab values). Populations are frame invariant.
struct DynamicState {
    cplx alpha1{0.0, 0.0};
    cplx alpha2{0.0, 0.0};
    cplx rho_ge1{0.0, 0.0};
    cplx rho_ge2{0.0, 0.0};
    double rho_ee1 = 0.0;
    double rho_ee2 = 0.0;
};

enum class Frame { Lab, Rotating };

// Population inversions y_i = rho_ee_i - rho_gg_i = 2 rho_ee_i - 1.
struct Inversions {
    double y1 = -1.0;
    double y2 = -1.0;
};

inline Inversions inversions_of(const DynamicState& s) {
    return {2.0 * s.rho_ee1 - 1.0, 2.0 * s.rho_ee2 - 1.0};
}

// Flat layout used by the integrator:
// [Re a1, Im a1, Re a2, Im a2, Re r1, Im r1, Re r2, Im r2, ee1, ee2]
using StateVec = std::array<double, 10>;

StateVec pack(const DynamicState& s);
DynamicState unpack(const StateVec& v);

// Test hook for the oracle-sensitivity (mutation) check: flips the sign of
// the chi2*alpha1^2 source feeding the SH mode in both frames. Never enabled
// outside `validate --inject-fault`.
extern std::atomic<bool> g_flip_sh_source;

// Equations of motion in the lab frame, explicit drive eps_p e^{-i w t}.
DynamicState rhs_lab(const DynamicState& s, const SystemParams& p, double t);

// Envelope equations in the frame rotating with the drive (autonomous).
DynamicState rhs_rotating(const DynamicState& s, const SystemParams& p);

// Phase maps between frames at time t. from_lab(to_lab(E, t), t) == E to
// machine precision; |components| and populations are invariant.
DynamicState to_lab(const DynamicState& env, double t, const SystemParams& p);
DynamicState from_lab(const DynamicState& lab, double t, const SystemParams& p);

// Physical-state diagnostic: max over emitters of
// |rho_ge|^2 - rho_ee (1 - rho_ee), positive when the state overshoots
// purity. The semiclassical equations may transiently reach ~1e-6.
double purity_excess(const DynamicState& s);

// Max-norm of the flattened derivative; the integrator's residual measure.
double rhs_max_norm(const DynamicState& d);

} // namespace fanoshg
