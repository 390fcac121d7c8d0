#pragma once
#include <optional>
#include <string>

#include "model.hpp"

namespace fanoshg {

struct IntegratorConfig {
    double dt_initial = 0.01;
    // Tolerances are set so the accepted-step noise floor sits below
    // convergence_eps even for weakly damped detuned modes; with looser
    // tolerances the residual plateaus above the threshold and stable
    // configurations run the full horizon without ever "converging".
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double t_max = 5e6;
    // <= 0 selects the default window min(20/gamma_ee_min, t_max/10).
    double convergence_window = 0.0;
    double convergence_eps = 1e-9;
    long long max_steps = 500'000'000;

    void validate() const;
    double effective_window(const SystemParams& p) const;
};

struct SteadyState {
    cplx alpha1_t{0.0, 0.0};
    cplx alpha2_t{0.0, 0.0};
    cplx rho_ge1_t{0.0, 0.0};
    cplx rho_ge2_t{0.0, 0.0};
    double rho_ee1 = 0.0;
    double rho_ee2 = 0.0;
    Inversions inversions{};
    double residual = 0.0;
    bool converged = false;
    double t_elapsed = 0.0;
    long long steps = 0;
    bool stiffness_detected = false;  // accepted step collapsed below 1e-6
    double purity_excess_max = 0.0;   // diagnostic, see purity_excess()
};

DynamicState state_of(const SteadyState& s);
SteadyState steady_of(const DynamicState& s);

// Optional fixed-schema trajectory dump written during integrate().
struct TrajectoryDump {
    std::string path;
    int digits = 12;
    double sample_dt = 0.0;  // <= 0 selects t_max / 20000
};

// Integrates the envelope equations from the all-zero initial state until
// the derivative max-norm stays below convergence_eps for a full window, or
// t_max is reached (converged=false, best-effort values). Throws
// IntegrationBlowup when the state leaves the finite/physical region.
SteadyState integrate(const SystemParams& p, const IntegratorConfig& cfg,
                      const TrajectoryDump* dump = nullptr);

// Continues the converged solution in the lab frame over one drive period,
// sampling t_probe_count times, and returns the maximum relative deviation
// of the envelope magnitudes from constancy. Throws NotConvergedError when
// the input is not converged.
double verify_ansatz(const SystemParams& p, const SteadyState& steady, int t_probe_count);

struct IntegrationBlowup : NonFiniteError {
    DynamicState last_state;
    IntegrationBlowup(double t, DynamicState s, const std::string& msg)
        : NonFiniteError(t, msg), last_state(s) {}
};

// Fixed-step integrators used for order validation and cross-frame oracles.
enum class Stepper { RK4, DP5 };
DynamicState integrate_fixed(const SystemParams& p, DynamicState y0, Frame frame, double t0,
                             double t1, double dt, Stepper stepper);

} // namespace fanoshg
