#pragma once
#include "integrate.hpp"

namespace fanoshg {

// Closed-form steady-state SH amplitude of the full two-emitter system at
// frozen inversions y, given the fundamental envelope. Exact consequence of
// the linear steady-state subsystem (coherences + SH mode at fixed y).
cplx alpha2_two_qe(const SystemParams& p, Inversions y, cplx alpha1_t);

// The same denominator, exposed for pole tracking in sweeps.
cplx two_qe_denominator(const SystemParams& p, Inversions y);

// Single-emitter reduction (f_c = f1; f2 = g = 0 implied).
cplx alpha2_single_qe(const SystemParams& p, double y, cplx alpha1_t);

// Emitter-free converter baseline: -i chi2 alpha1^2 / xi2.
cplx alpha2_bare(const SystemParams& p, cplx alpha1_t);

// Single-emitter response diagnostic F = |f_c|^2 y / beta1.
cplx qe_response_F(const SystemParams& p, double y);

struct FixedPointNoConvergence : FanoError {
    SteadyState last;  // last iterate, residual attached
    FixedPointNoConvergence(SteadyState s, const std::string& msg)
        : FanoError(ErrorCode::NoConvergence, msg), last(std::move(s)) {}
};

// Damped Picard iteration on the algebraic steady-state system:
//   (1) at fixed y solve the linear coherence/SH subsystem, then update the
//       fundamental (undepleted on the first pass, with the 2 chi2 a1* a2
//       back-action afterwards);
//   (2) update populations from the steady population balance;
//   (3) relax and repeat until the successive-iterate max-norm < tol.
// init == nullptr selects the cold guess (zero coherences, y = -1).
SteadyState solve_fixed_point(const SystemParams& p, const SteadyState* init, int max_iter,
                              double tol);

enum class Method { TimeEvolution, FixedPoint };

struct EnhancementReport {
    cplx alpha2_coupled{0.0, 0.0};
    cplx alpha2_bare{0.0, 0.0};
    double intensity_ratio = 0.0;
    double chi2 = 0.0;    // drive context
    cplx eps_p{0.0, 0.0}; // drive context
    bool coupled_converged = false;
    bool bare_converged = false;
};

// Steady SH intensity of the coupled system over the decoupled copy
// (f1 = f2 = g = 0) at identical chi2 and eps_p.
EnhancementReport enhancement(const SystemParams& p, Method method,
                              const IntegratorConfig* cfg = nullptr);

// Holds chi2 fixed and bisects on |eps_p| inside [bracket_lo, bracket_hi]
// until the steady inversion y2 lands within tol_y2 of target_y2. An 8-point
// pre-scan first checks that y2 is monotone in |eps_p| and brackets the
// target; otherwise NoBracketError. Returns params with the calibrated
// drive.
SystemParams calibrate_drive(const SystemParams& p, double target_y2, double bracket_lo,
                             double bracket_hi, Method method = Method::FixedPoint,
                             const IntegratorConfig* cfg = nullptr, double tol_y2 = 1e-3);

} // namespace fanoshg
