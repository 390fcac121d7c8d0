#include "integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace fanoshg {
namespace {

// Dormand-Prince 5(4) tableau (FSAL).
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0,
                 A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0,
                 B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights (error estimator).
constexpr double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0,
                 E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0;
constexpr double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0;

constexpr int N = 10;

using Rhs = std::function<StateVec(const StateVec&, double)>;

bool all_finite(const StateVec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double max_abs(const StateVec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// One DP5 stage evaluation; fills y_new, the FSAL derivative k7 = f(y_new)
// and the scaled error norm. Returns false if anything went non-finite.
struct Dp5Step {
    StateVec y_new;
    StateVec k7;
    double err = 0.0;
};

bool dp5_step(const Rhs& f, const StateVec& y, const StateVec& k1, double t, double h,
              double rel_tol, double abs_tol, Dp5Step& out) {
    StateVec k2, k3, k4, k5, k6, tmp;
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * A21 * k1[i];
    k2 = f(tmp, t + C2 * h);
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    k3 = f(tmp, t + C3 * h);
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    k4 = f(tmp, t + C4 * h);
    for (int i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    k5 = f(tmp, t + C5 * h);
    for (int i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    k6 = f(tmp, t + h);
    for (int i = 0; i < N; ++i)
        out.y_new[i] =
            y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    if (!all_finite(out.y_new)) return false;
    out.k7 = f(out.y_new, t + h);
    if (!all_finite(out.k7)) return false;

    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        const double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] +
                              E7 * out.k7[i]);
        const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(out.y_new[i]));
        acc += (e / sc) * (e / sc);
    }
    out.err = std::sqrt(acc / N);
    return std::isfinite(out.err);
}

// Adaptive DP5(4) driver with a PI step controller. Calls on_accept after
// every accepted step with (t_new, y_new, k7, h_used).
struct AdaptiveDriver {
    Rhs f;
    double rel_tol, abs_tol;
    double t = 0.0;
    StateVec y{};
    StateVec k1{};
    double h;
    double err_prev = 1.0;
    long long accepted = 0;
    bool stiffness = false;

    AdaptiveDriver(Rhs rhs, const StateVec& y0, double t0, double h0, double rtol, double atol)
        : f(std::move(rhs)), rel_tol(rtol), abs_tol(atol), t(t0), y(y0), h(h0) {
        k1 = f(y, t);
        if (!all_finite(k1))
            throw IntegrationBlowup(t, unpack(y), "non-finite derivative at initial state");
    }

    // Advances up to t_target (the final step is clamped to land exactly).
    template <class CB>
    void advance_to(double t_target, long long max_steps, CB&& on_accept) {
        constexpr double kHugeState = 1e100;
        while (t < t_target) {
            if (accepted >= max_steps) return;  // caller decides what a budget hit means
            bool clamped = false;
            double h_try = h;
            if (t + h_try >= t_target) {
                h_try = t_target - t;
                clamped = true;
            }
            Dp5Step s;
            const bool finite = dp5_step(f, y, k1, t, h_try, rel_tol, abs_tol, s);
            if (!finite || s.err > 1.0) {
                // Rejected. Shrink; a collapse to nothing means the solution
                // is leaving the finite region faster than we can follow.
                const double fac =
                    finite ? std::max(0.2, 0.9 * std::pow(s.err, -0.2)) : 0.25;
                h = h_try * fac;
                if (h < 1e-14 * std::max(1.0, std::abs(t)))
                    throw IntegrationBlowup(t, unpack(y),
                                            "step size collapsed; state is diverging");
                continue;
            }
            t += h_try;
            y = s.y_new;
            k1 = s.k7;  // FSAL
            ++accepted;
            if (h_try < 1e-6 && !clamped) stiffness = true;
            if (max_abs(y) > kHugeState)
                throw IntegrationBlowup(t, unpack(y), "state magnitude exceeded 1e100");
            on_accept(t, y, k1, h_try);
            // PI controller (only grow from genuinely accepted error sizes;
            // a clamped final step should not inflate the next h).
            const double e = std::max(s.err, 1e-10);
            double fac = 0.9 * std::pow(e, -0.2) * std::pow(err_prev, 0.04);
            fac = std::clamp(fac, 0.2, 5.0);
            err_prev = e;
            if (!clamped) h = h_try * fac;
        }
    }
};

void check_population_bounds(const StateVec& y, double t) {
    constexpr double tol = 1e-9;
    if (y[8] < -tol || y[8] > 1.0 + tol || y[9] < -tol || y[9] > 1.0 + tol)
        throw IntegrationBlowup(t, unpack(y), "population left [0,1] beyond tolerance");
}

struct CsvWriter {
    FILE* fp = nullptr;
    int digits = 12;
    ~CsvWriter() {
        if (fp) std::fclose(fp);
    }
    void open(const std::string& path, int d) {
        digits = d;
        fp = std::fopen(path.c_str(), "w");
        if (!fp) throw FanoError(ErrorCode::Io, "cannot open trajectory file: " + path);
        std::fprintf(fp, "t,re_alpha1,im_alpha1,re_alpha2,im_alpha2,re_rho_ge1,im_rho_ge1,"
                         "re_rho_ge2,im_rho_ge2,rho_ee1,rho_ee2\n");
    }
    void row(double t, const StateVec& y) {
        if (!fp) return;
        std::fprintf(fp, "%.*g", digits, t);
        for (int i = 0; i < N; ++i) std::fprintf(fp, ",%.*g", digits, y[i]);
        std::fprintf(fp, "\n");
    }
};

} // namespace

void IntegratorConfig::validate() const {
    auto bad = [](const std::string& msg) { throw FanoError(ErrorCode::BadInput, msg); };
    if (!(dt_initial > 0)) bad("integrator.dt_initial: must be > 0");
    if (!(rel_tol > 0)) bad("integrator.rel_tol: must be > 0");
    if (!(abs_tol > 0)) bad("integrator.abs_tol: must be > 0");
    if (!(t_max > 0)) bad("integrator.t_max: must be > 0");
    if (!(convergence_eps > 0)) bad("integrator.convergence_eps: must be > 0");
    if (convergence_window > 0 && !(t_max > convergence_window))
        bad("integrator.convergence_window: must be < t_max");
    if (max_steps <= 0) bad("integrator.max_steps: must be > 0");
}

double IntegratorConfig::effective_window(const SystemParams& p) const {
    if (convergence_window > 0) return convergence_window;
    const double gmin = std::min(p.gamma_ee1, p.gamma_ee2);
    const double cap = t_max / 10.0;
    if (gmin <= 0) return cap;
    return std::min(20.0 / gmin, cap);
}

DynamicState state_of(const SteadyState& s) {
    DynamicState d;
    d.alpha1 = s.alpha1_t;
    d.alpha2 = s.alpha2_t;
    d.rho_ge1 = s.rho_ge1_t;
    d.rho_ge2 = s.rho_ge2_t;
    d.rho_ee1 = s.rho_ee1;
    d.rho_ee2 = s.rho_ee2;
    return d;
}

SteadyState steady_of(const DynamicState& d) {
    SteadyState s;
    s.alpha1_t = d.alpha1;
    s.alpha2_t = d.alpha2;
    s.rho_ge1_t = d.rho_ge1;
    s.rho_ge2_t = d.rho_ge2;
    s.rho_ee1 = d.rho_ee1;
    s.rho_ee2 = d.rho_ee2;
    s.inversions = inversions_of(d);
    return s;
}

SteadyState integrate(const SystemParams& p, const IntegratorConfig& cfg,
                      const TrajectoryDump* dump) {
    p.validate();
    cfg.validate();
    const double window = cfg.effective_window(p);

    Rhs f = [&p](const StateVec& v, double) { return pack(rhs_rotating(unpack(v), p)); };
    StateVec y0{};  // all-zero initial conditions, exactly
    AdaptiveDriver drv(std::move(f), y0, 0.0, cfg.dt_initial, cfg.rel_tol, cfg.abs_tol);

    CsvWriter csv;
    double sample_dt = 0.0, next_sample = 0.0, last_sample_t = 0.0;
    if (dump && !dump->path.empty()) {
        csv.open(dump->path, dump->digits);
        sample_dt = dump->sample_dt > 0 ? dump->sample_dt : cfg.t_max / 20000.0;
        csv.row(0.0, y0);
        next_sample = sample_dt;
    }

    double residual = max_abs(drv.k1);
    double below_since = residual < cfg.convergence_eps ? 0.0 : -1.0;
    bool converged = false;
    double purity_max = 0.0;

    while (drv.t < cfg.t_max && !converged && drv.accepted < cfg.max_steps) {
        // Advance in one-window chunks so the convergence bookkeeping stays
        // simple even when the PI controller takes very long steps.
        const double t_chunk = std::min(cfg.t_max, drv.t + window);
        drv.advance_to(t_chunk, cfg.max_steps,
                       [&](double t, const StateVec& y, const StateVec& k, double) {
                           check_population_bounds(y, t);
                           residual = max_abs(k);
                           if (residual < cfg.convergence_eps) {
                               if (below_since < 0) below_since = t;
                               if (t - below_since >= window) converged = true;
                           } else {
                               below_since = -1.0;
                           }
                           purity_max = std::max(purity_max, purity_excess(unpack(y)));
                           if (csv.fp && t >= next_sample) {
                               csv.row(t, y);
                               last_sample_t = t;
                               next_sample += sample_dt * std::ceil((t - next_sample) / sample_dt + 1.0);
                           }
                       });
        if (converged) break;
    }
    if (csv.fp && drv.t > last_sample_t) csv.row(drv.t, drv.y);

    SteadyState out = steady_of(unpack(drv.y));
    out.residual = residual;
    out.converged = converged;
    out.t_elapsed = drv.t;
    out.steps = drv.accepted;
    out.stiffness_detected = drv.stiffness;
    out.purity_excess_max = purity_max;
    return out;
}

double verify_ansatz(const SystemParams& p, const SteadyState& steady, int t_probe_count) {
    p.validate();
    if (!steady.converged)
        throw NotConvergedError("verify_ansatz requires a converged steady state");
    const int n = std::max(2, t_probe_count);
    const double T = 2.0 * M_PI / p.omega_drive;

    const DynamicState env0 = state_of(steady);
    const StateVec ref = pack(env0);
    // Reference magnitudes: four complex envelopes and two populations.
    double mag0[6], floor_v = 1e-12;
    auto mags = [](const DynamicState& s, double* m) {
        m[0] = std::abs(s.alpha1);
        m[1] = std::abs(s.alpha2);
        m[2] = std::abs(s.rho_ge1);
        m[3] = std::abs(s.rho_ge2);
        m[4] = std::abs(s.rho_ee1);
        m[5] = std::abs(s.rho_ee2);
    };
    mags(env0, mag0);

    // Lab-frame continuation: at t=0 the phase factors are unity, so the lab
    // state coincides with the envelopes.
    Rhs f = [&p](const StateVec& v, double t) { return pack(rhs_lab(unpack(v), p, t)); };
    AdaptiveDriver drv(std::move(f), ref, 0.0, 1e-3, 1e-10, 1e-14);

    double dev = 0.0;
    for (int j = 1; j <= n; ++j) {
        const double tj = T * static_cast<double>(j) / n;
        drv.advance_to(tj, 200'000'000, [](double, const StateVec&, const StateVec&, double) {});
        const DynamicState env = from_lab(unpack(drv.y), drv.t, p);
        double m[6];
        mags(env, m);
        for (int c = 0; c < 6; ++c)
            dev = std::max(dev, std::abs(m[c] - mag0[c]) / std::max(mag0[c], floor_v));
    }
    return dev;
}

DynamicState integrate_fixed(const SystemParams& p, DynamicState y0, Frame frame, double t0,
                             double t1, double dt, Stepper stepper) {
    p.validate();
    if (!(dt > 0) || !(t1 > t0)) throw FanoError(ErrorCode::BadInput, "bad fixed-step interval");
    Rhs f;
    if (frame == Frame::Lab)
        f = [&p](const StateVec& v, double t) { return pack(rhs_lab(unpack(v), p, t)); };
    else
        f = [&p](const StateVec& v, double) { return pack(rhs_rotating(unpack(v), p)); };

    StateVec y = pack(y0);
    double t = t0;
    const long long nsteps = static_cast<long long>(std::llround((t1 - t0) / dt));
    for (long long step = 0; step < nsteps; ++step) {
        const double h = dt;
        if (stepper == Stepper::RK4) {
            StateVec k1 = f(y, t), tmp;
            for (int i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            StateVec k2 = f(tmp, t + 0.5 * h);
            for (int i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            StateVec k3 = f(tmp, t + 0.5 * h);
            for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
            StateVec k4 = f(tmp, t + h);
            for (int i = 0; i < N; ++i)
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        } else {
            StateVec k1 = f(y, t);
            Dp5Step s;
            if (!dp5_step(f, y, k1, t, h, 1.0, 1.0, s))
                throw IntegrationBlowup(t, unpack(y), "non-finite state in fixed-step run");
            y = s.y_new;
        }
        t = t0 + (step + 1) * dt;
        if (!all_finite(y)) throw IntegrationBlowup(t, unpack(y), "non-finite state");
    }
    return unpack(y);
}

} // namespace fanoshg
