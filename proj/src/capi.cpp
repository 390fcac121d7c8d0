#include "fano_shg.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "errors.hpp"
#include "explore.hpp"
#include "integrate.hpp"
#include "model.hpp"
#include "oracles.hpp"
#include "params.hpp"
#include "serialize.hpp"

using namespace fanoshg;

struct fano_params {
    SystemParams p;
};

namespace {

thread_local std::string t_last_error;

fano_status fail(ErrorCode c, const std::string& msg) {
    t_last_error = msg;
    return static_cast<fano_status>(static_cast<int>(c));
}

template <typename F>
fano_status guarded(F&& f) {
    try {
        f();
        return FANO_OK;
    } catch (const FanoError& e) {
        return fail(e.code, e.what());
    } catch (const std::bad_alloc&) {
        return fail(ErrorCode::Io, "out of memory");
    } catch (const std::exception& e) {
        return fail(ErrorCode::BadInput, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void fill_steady(const SteadyState& s, fano_steady_state* out) {
    out->alpha1_re = s.alpha1_t.real();
    out->alpha1_im = s.alpha1_t.imag();
    out->alpha2_re = s.alpha2_t.real();
    out->alpha2_im = s.alpha2_t.imag();
    out->rho_ge1_re = s.rho_ge1_t.real();
    out->rho_ge1_im = s.rho_ge1_t.imag();
    out->rho_ge2_re = s.rho_ge2_t.real();
    out->rho_ge2_im = s.rho_ge2_t.imag();
    out->rho_ee1 = s.rho_ee1;
    out->rho_ee2 = s.rho_ee2;
    out->y1 = s.inversions.y1;
    out->y2 = s.inversions.y2;
    out->residual = s.residual;
    out->converged = s.converged ? 1 : 0;
    out->t_elapsed = s.t_elapsed;
    out->steps = s.steps;
    out->stiffness_detected = s.stiffness_detected ? 1 : 0;
    out->purity_excess_max = s.purity_excess_max;
}

SteadyState read_steady(const fano_steady_state* in) {
    SteadyState s;
    s.alpha1_t = cplx(in->alpha1_re, in->alpha1_im);
    s.alpha2_t = cplx(in->alpha2_re, in->alpha2_im);
    s.rho_ge1_t = cplx(in->rho_ge1_re, in->rho_ge1_im);
    s.rho_ge2_t = cplx(in->rho_ge2_re, in->rho_ge2_im);
    s.rho_ee1 = in->rho_ee1;
    s.rho_ee2 = in->rho_ee2;
    s.inversions = {2.0 * in->rho_ee1 - 1.0, 2.0 * in->rho_ee2 - 1.0};
    s.residual = in->residual;
    s.converged = in->converged != 0;
    s.t_elapsed = in->t_elapsed;
    s.steps = in->steps;
    s.stiffness_detected = in->stiffness_detected != 0;
    s.purity_excess_max = in->purity_excess_max;
    return s;
}

IntegratorConfig read_config(const fano_integrator_config* cfg) {
    IntegratorConfig c;  // defaults
    if (cfg != nullptr) {
        c.dt_initial = cfg->dt_initial;
        c.rel_tol = cfg->rel_tol;
        c.abs_tol = cfg->abs_tol;
        c.t_max = cfg->t_max;
        c.convergence_window = cfg->convergence_window;
        c.convergence_eps = cfg->convergence_eps;
        c.max_steps = cfg->max_steps;
    }
    return c;
}

double* real_field(SystemParams& p, const std::string& name) {
    if (name == "omega_drive") return &p.omega_drive;
    if (name == "omega1") return &p.omega1;
    if (name == "omega2") return &p.omega2;
    if (name == "omega_eg1") return &p.omega_eg1;
    if (name == "omega_eg2") return &p.omega_eg2;
    if (name == "gamma1") return &p.gamma1;
    if (name == "gamma2") return &p.gamma2;
    if (name == "gamma_ee1") return &p.gamma_ee1;
    if (name == "gamma_ee2") return &p.gamma_ee2;
    if (name == "chi2") return &p.chi2;
    return nullptr;
}

cplx* complex_field(SystemParams& p, const std::string& name) {
    if (name == "f1") return &p.f1;
    if (name == "f2") return &p.f2;
    if (name == "g") return &p.g;
    if (name == "eps_p") return &p.eps_p;
    return nullptr;
}

fano_status field_not_found(const std::string& name) {
    return fail(ErrorCode::BadInput, "unknown parameter field: " + name);
}

} // namespace

extern "C" {

fano_params* fano_params_create(void) {
    return new (std::nothrow) fano_params{};
}

fano_params* fano_params_create_preset(const char* name) {
    if (name == nullptr) {
        fail(ErrorCode::BadInput, "preset name is null");
        return nullptr;
    }
    try {
        auto* h = new fano_params{presets::by_name(name)};
        return h;
    } catch (const FanoError& e) {
        fail(e.code, e.what());
        return nullptr;
    } catch (const std::exception& e) {
        fail(ErrorCode::BadInput, e.what());
        return nullptr;
    }
}

fano_params* fano_params_clone(const fano_params* p) {
    if (p == nullptr) return nullptr;
    return new (std::nothrow) fano_params{p->p};
}

void fano_params_destroy(fano_params* p) {
    delete p;
}

fano_status fano_params_set(fano_params* p, const char* field, double value) {
    if (p == nullptr || field == nullptr) return fail(ErrorCode::BadInput, "null argument");
    const std::string name(field);
    if (double* slot = real_field(p->p, name)) {
        *slot = value;
        return FANO_OK;
    }
    if (cplx* slot = complex_field(p->p, name)) {
        *slot = cplx(value, 0.0);
        return FANO_OK;
    }
    return field_not_found(name);
}

fano_status fano_params_set_complex(fano_params* p, const char* field, double re, double im) {
    if (p == nullptr || field == nullptr) return fail(ErrorCode::BadInput, "null argument");
    const std::string name(field);
    if (cplx* slot = complex_field(p->p, name)) {
        *slot = cplx(re, im);
        return FANO_OK;
    }
    if (real_field(p->p, name) != nullptr)
        return fail(ErrorCode::BadInput, "field is real-valued: " + name);
    return field_not_found(name);
}

fano_status fano_params_get(const fano_params* p, const char* field, double* out) {
    if (p == nullptr || field == nullptr || out == nullptr)
        return fail(ErrorCode::BadInput, "null argument");
    const std::string name(field);
    SystemParams& mp = const_cast<fano_params*>(p)->p;
    if (double* slot = real_field(mp, name)) {
        *out = *slot;
        return FANO_OK;
    }
    if (cplx* slot = complex_field(mp, name)) {
        *out = std::abs(*slot);
        return FANO_OK;
    }
    return field_not_found(name);
}

fano_status fano_params_get_complex(const fano_params* p, const char* field, double* re,
                                    double* im) {
    if (p == nullptr || field == nullptr || re == nullptr || im == nullptr)
        return fail(ErrorCode::BadInput, "null argument");
    const std::string name(field);
    SystemParams& mp = const_cast<fano_params*>(p)->p;
    if (cplx* slot = complex_field(mp, name)) {
        *re = slot->real();
        *im = slot->imag();
        return FANO_OK;
    }
    if (double* slot = real_field(mp, name)) {
        *re = *slot;
        *im = 0.0;
        return FANO_OK;
    }
    return field_not_found(name);
}

fano_status fano_params_validate(const fano_params* p) {
    if (p == nullptr) return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] { p->p.validate(); });
}

void fano_integrator_config_init(fano_integrator_config* cfg) {
    if (cfg == nullptr) return;
    const IntegratorConfig d;
    cfg->dt_initial = d.dt_initial;
    cfg->rel_tol = d.rel_tol;
    cfg->abs_tol = d.abs_tol;
    cfg->t_max = d.t_max;
    cfg->convergence_window = d.convergence_window;
    cfg->convergence_eps = d.convergence_eps;
    cfg->max_steps = d.max_steps;
}

fano_status fano_integrate(const fano_params* p, const fano_integrator_config* cfg,
                           fano_steady_state* out) {
    if (p == nullptr || out == nullptr) return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        const SteadyState s = integrate(p->p, read_config(cfg));
        fill_steady(s, out);
    });
}

fano_status fano_integrate_dump(const fano_params* p, const fano_integrator_config* cfg,
                                const char* csv_path, int digits, fano_steady_state* out) {
    if (p == nullptr || out == nullptr || csv_path == nullptr)
        return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        TrajectoryDump dump;
        dump.path = csv_path;
        dump.digits = digits > 0 ? digits : 12;
        const SteadyState s = integrate(p->p, read_config(cfg), &dump);
        fill_steady(s, out);
    });
}

fano_status fano_verify_ansatz(const fano_params* p, const fano_steady_state* steady,
                               int t_probe_count, double* max_deviation) {
    if (p == nullptr || steady == nullptr || max_deviation == nullptr)
        return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        *max_deviation = verify_ansatz(p->p, read_steady(steady), t_probe_count);
    });
}

fano_status fano_alpha2_two_qe(const fano_params* p, double y1, double y2, double a1_re,
                               double a1_im, double* out_re, double* out_im) {
    if (p == nullptr || out_re == nullptr || out_im == nullptr)
        return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        const cplx a2 = alpha2_two_qe(p->p, Inversions{y1, y2}, cplx(a1_re, a1_im));
        *out_re = a2.real();
        *out_im = a2.imag();
    });
}

fano_status fano_alpha2_single_qe(const fano_params* p, double y, double a1_re, double a1_im,
                                  double* out_re, double* out_im) {
    if (p == nullptr || out_re == nullptr || out_im == nullptr)
        return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        const cplx a2 = alpha2_single_qe(p->p, y, cplx(a1_re, a1_im));
        *out_re = a2.real();
        *out_im = a2.imag();
    });
}

fano_status fano_alpha2_bare(const fano_params* p, double a1_re, double a1_im, double* out_re,
                             double* out_im) {
    if (p == nullptr || out_re == nullptr || out_im == nullptr)
        return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        const cplx a2 = alpha2_bare(p->p, cplx(a1_re, a1_im));
        *out_re = a2.real();
        *out_im = a2.imag();
    });
}

fano_status fano_solve_fixed_point(const fano_params* p, const fano_steady_state* init,
                                   int max_iter, double tol, fano_steady_state* out) {
    if (p == nullptr || out == nullptr) return fail(ErrorCode::BadInput, "null argument");
    try {
        SteadyState start;
        const SteadyState* start_ptr = nullptr;
        if (init != nullptr) {
            start = read_steady(init);
            start_ptr = &start;
        }
        const SteadyState s = solve_fixed_point(p->p, start_ptr, max_iter, tol);
        fill_steady(s, out);
        return FANO_OK;
    } catch (const FixedPointNoConvergence& e) {
        fill_steady(e.last, out);  // last iterate is still useful diagnostics
        return fail(e.code, e.what());
    } catch (const FanoError& e) {
        return fail(e.code, e.what());
    } catch (const std::exception& e) {
        return fail(ErrorCode::BadInput, e.what());
    }
}

fano_status fano_enhancement(const fano_params* p, fano_method method,
                             const fano_integrator_config* cfg,
                             fano_enhancement_report* out) {
    if (p == nullptr || out == nullptr) return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        const IntegratorConfig c = read_config(cfg);
        const Method m =
            method == FANO_METHOD_FIXED_POINT ? Method::FixedPoint : Method::TimeEvolution;
        const EnhancementReport r = enhancement(p->p, m, cfg != nullptr ? &c : nullptr);
        out->alpha2_coupled_re = r.alpha2_coupled.real();
        out->alpha2_coupled_im = r.alpha2_coupled.imag();
        out->alpha2_bare_re = r.alpha2_bare.real();
        out->alpha2_bare_im = r.alpha2_bare.imag();
        out->intensity_ratio = r.intensity_ratio;
        out->chi2 = r.chi2;
        out->eps_p_re = r.eps_p.real();
        out->eps_p_im = r.eps_p.imag();
        out->coupled_converged = r.coupled_converged ? 1 : 0;
        out->bare_converged = r.bare_converged ? 1 : 0;
    });
}

fano_status fano_calibrate_drive(fano_params* p, double target_y2, double eps_lo,
                                 double eps_hi, fano_method method,
                                 const fano_integrator_config* cfg, double tol_y2,
                                 double* eps_out) {
    if (p == nullptr) return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        const IntegratorConfig c = read_config(cfg);
        const Method m =
            method == FANO_METHOD_FIXED_POINT ? Method::FixedPoint : Method::TimeEvolution;
        const SystemParams calibrated =
            calibrate_drive(p->p, target_y2, eps_lo, eps_hi, m, cfg != nullptr ? &c : nullptr,
                            tol_y2 > 0 ? tol_y2 : 1e-3);
        p->p = calibrated;
        if (eps_out != nullptr) *eps_out = std::abs(calibrated.eps_p);
    });
}

fano_status fano_run_search(const char* spec_json, char** out_summary_json,
                            char** out_trace_csv) {
    if (spec_json == nullptr) return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        const SearchSpec spec = search_spec_from_json_text(spec_json);
        const SearchResult result = run_search(spec);
        if (out_summary_json != nullptr) *out_summary_json = dup_string(search_summary_json(result));
        if (out_trace_csv != nullptr) *out_trace_csv = dup_string(trace_csv(result));
    });
}

fano_status fano_sweep(const fano_params* p, const char* variable, const double* values,
                       size_t n_values, int with_full, const fano_integrator_config* cfg,
                       int csv_digits, char** out_csv) {
    if (p == nullptr || variable == nullptr || values == nullptr || out_csv == nullptr)
        return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        const std::vector<double> vals(values, values + n_values);
        const IntegratorConfig c = read_config(cfg);
        const std::vector<SweepRow> rows =
            sweep(p->p, variable, vals, with_full != 0, with_full != 0 ? &c : nullptr);
        *out_csv = dup_string(sweep_csv(variable, rows, csv_digits > 0 ? csv_digits : 12));
    });
}

fano_status fano_run_report_json(const fano_params* p, const fano_integrator_config* cfg,
                                 fano_method enhancement_method,
                                 const char* trajectory_csv_path, int csv_digits,
                                 char** out_json) {
    if (p == nullptr || out_json == nullptr) return fail(ErrorCode::BadInput, "null argument");
    return guarded([&] {
        p->p.validate();
        const IntegratorConfig c = read_config(cfg);
        c.validate();
        TrajectoryDump dump;
        const TrajectoryDump* dump_ptr = nullptr;
        if (trajectory_csv_path != nullptr) {
            dump.path = trajectory_csv_path;
            dump.digits = csv_digits > 0 ? csv_digits : 12;
            dump_ptr = &dump;
        }
        const SteadyState s = integrate(p->p, c, dump_ptr);

        double dev = 0.0;
        const double* dev_ptr = nullptr;
        std::string dev_error;
        try {
            dev = verify_ansatz(p->p, s, 32);
            dev_ptr = &dev;
        } catch (const FanoError& e) {
            dev_error = e.what();
        }

        EnhancementReport enh;
        const EnhancementReport* enh_ptr = nullptr;
        std::string enh_error;
        try {
            const Method m = enhancement_method == FANO_METHOD_FIXED_POINT
                                 ? Method::FixedPoint
                                 : Method::TimeEvolution;
            enh = enhancement(p->p, m, &c);
            enh_ptr = &enh;
        } catch (const FanoError& e) {
            enh_error = e.what();
        }

        *out_json = dup_string(run_report_json(p->p, c, s, dev_ptr, dev_error, enh_ptr, enh_error));
    });
}

fano_status fano_validate(int inject_fault, char** out_table) {
    return guarded([&] {
        const OracleOutcome outcome = run_oracle_suite(inject_fault != 0);
        if (out_table != nullptr) *out_table = dup_string(outcome.table);
        if (outcome.failures > 0)
            throw FanoError(ErrorCode::OracleFailure,
                            std::to_string(outcome.failures) + " oracle(s) failed");
    });
}

void fano_string_free(char* s) {
    std::free(s);
}

const char* fano_last_error(void) {
    return t_last_error.c_str();
}

const char* fano_version(void) {
    return "fano-shg 1.0.0";
}

} // extern "C"
