#include "explore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <thread>

#include "rng.hpp"

namespace fanoshg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* kFreeNames[] = {"f1_re", "f1_im", "f2_re", "f2_im",
                            "g_re",  "g_im",  "omega_eg1", "omega_eg2"};
const char* kConstrainedNames[] = {"f", "g_re", "g_im", "omega_eg1", "omega_eg2"};

std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

bool variable_allowed(const std::string& name, bool constrained) {
    if (constrained) {
        for (const char* n : kConstrainedNames)
            if (name == n) return true;
        return false;
    }
    for (const char* n : kFreeNames)
        if (name == n) return true;
    return false;
}

void apply_variable(SystemParams& p, const std::string& name, double value) {
    if (name == "f1_re") p.f1 = {value, p.f1.imag()};
    else if (name == "f1_im") p.f1 = {p.f1.real(), value};
    else if (name == "f2_re") p.f2 = {value, p.f2.imag()};
    else if (name == "f2_im") p.f2 = {p.f2.real(), value};
    else if (name == "g_re") p.g = {value, p.g.imag()};
    else if (name == "g_im") p.g = {p.g.real(), value};
    else if (name == "omega_eg1") p.omega_eg1 = value;
    else if (name == "omega_eg2") p.omega_eg2 = value;
    else if (name == "f") { p.f1 = {value, 0.0}; p.f2 = {value, 0.0}; }
    else
        throw FanoError(ErrorCode::BadInput,
                        "unknown search variable: " + name +
                            " (expected f1_re f1_im f2_re f2_im g_re g_im omega_eg1 "
                            "omega_eg2, or f in constrained mode)");
}

void SearchSpec::validate() const {
    base.validate();
    integrator.validate();
    if (max_evals <= 0) throw FanoError(ErrorCode::BadInput, "search.max_evals: must be > 0");
    if (grid_points <= 0) throw FanoError(ErrorCode::BadInput, "search.grid_points: must be > 0");
    if (restarts <= 0) throw FanoError(ErrorCode::BadInput, "search.restarts: must be > 0");
    if (threads <= 0) throw FanoError(ErrorCode::BadInput, "search.threads: must be > 0");
    if (variables.empty())
        throw FanoError(ErrorCode::BadInput, "search.variables: at least one variable required");
    const bool constrained = constrain_crude && objective == SearchObjective::CrudeEq9;
    for (const auto& v : variables) {
        if (!variable_allowed(v.name, constrained))
            throw FanoError(ErrorCode::BadInput, "search.variables: name '" + v.name +
                                                     "' not valid in this mode");
        if (!(v.lower < v.upper))
            throw FanoError(ErrorCode::BadInput,
                            "search.variables: lower must be < upper for " + v.name);
    }
}

double objective_crude(const SystemParams& p, bool* pole) {
    if (pole) *pole = false;
    try {
        return std::abs(alpha2_two_qe(p, Inversions{-1.0, -1.0}, cplx{1.0, 0.0}));
    } catch (const DegenerateDenominatorError&) {
        if (pole) *pole = true;
        return kInf;  // unbounded-gain point; recorded, never selected
    }
}

double objective_full(const SystemParams& p, const IntegratorConfig& cfg, bool* failed) {
    if (failed) *failed = false;
    try {
        const EnhancementReport rep = enhancement(p, Method::TimeEvolution, &cfg);
        if (!rep.coupled_converged || !rep.bare_converged) {
            if (failed) *failed = true;
            return -kInf;
        }
        return rep.intensity_ratio;
    } catch (const FanoError&) {
        if (failed) *failed = true;
        return -kInf;
    }
}

namespace {

struct Evaluator {
    const SearchSpec& spec;

    SystemParams materialize(const std::vector<double>& x) const {
        SystemParams p = spec.base;
        for (size_t j = 0; j < spec.variables.size(); ++j)
            apply_variable(p, spec.variables[j].name, x[j]);
        return p;
    }

    TraceEntry evaluate(const std::vector<double>& x) const {
        TraceEntry e;
        for (size_t j = 0; j < spec.variables.size(); ++j) {
            if (j) e.digest += ';';
            e.digest += spec.variables[j].name + "=" + fmt_value(x[j]);
        }
        try {
            const SystemParams p = materialize(x);
            if (spec.objective == SearchObjective::CrudeEq9) {
                p.validate();
                e.objective = objective_crude(p, &e.pole_flag);
            } else {
                bool failed = false;
                e.objective = objective_full(p, spec.integrator, &failed);
            }
        } catch (const FanoError&) {
            e.objective = -kInf;  // invalid point counts as a failure
        }
        return e;
    }
};

// Evaluates a batch of coordinate vectors, optionally across threads.
// Results land by index, so traces are identical for any thread count.
std::vector<TraceEntry> evaluate_batch(const Evaluator& ev,
                                       const std::vector<std::vector<double>>& xs, int threads) {
    std::vector<TraceEntry> out(xs.size());
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(xs.size())));
    if (nt == 1) {
        for (size_t i = 0; i < xs.size(); ++i) out[i] = ev.evaluate(xs[i]);
        return out;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < xs.size(); i = next.fetch_add(1))
                out[i] = ev.evaluate(xs[i]);
        });
    for (auto& th : pool) th.join();
    return out;
}

struct BestTracker {
    double best = -kInf;
    long long best_idx = -1;

    // Only finite objectives can win: poles (+inf) are recorded as
    // unbounded-gain markers, failures (-inf) as failures.
    void consider(const std::vector<TraceEntry>& trace, long long from = 0) {
        for (size_t i = from; i < trace.size(); ++i) {
            const double v = trace[i].objective;
            if (std::isfinite(v) && v > best) {
                best = v;
                best_idx = static_cast<long long>(i);
            }
        }
    }
};

std::vector<double> clamp_to_box(std::vector<double> x, const std::vector<SearchVariable>& vars) {
    for (size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], vars[j].lower, vars[j].upper);
    return x;
}

void run_grid(const SearchSpec& spec, const Evaluator& ev, SearchResult& res) {
    const size_t dims = spec.variables.size();
    std::vector<std::vector<double>> axes(dims);
    for (size_t j = 0; j < dims; ++j) {
        const auto& v = spec.variables[j];
        const int n = spec.grid_points;
        if (n == 1) {
            axes[j] = {0.5 * (v.lower + v.upper)};
        } else {
            for (int i = 0; i < n; ++i)
                axes[j].push_back(v.lower + (v.upper - v.lower) * i / (n - 1));
        }
    }
    // Full factorial, last axis fastest, truncated at the evaluation budget.
    std::vector<std::vector<double>> xs;
    std::vector<size_t> idx(dims, 0);
    while (static_cast<int>(xs.size()) < spec.max_evals) {
        std::vector<double> x(dims);
        for (size_t j = 0; j < dims; ++j) x[j] = axes[j][idx[j]];
        xs.push_back(std::move(x));
        size_t j = dims;
        while (j > 0) {
            --j;
            if (++idx[j] < axes[j].size()) break;
            idx[j] = 0;
            if (j == 0) goto done;
        }
    }
done:
    res.trace = evaluate_batch(ev, xs, spec.threads);
}

void run_random_restart(const SearchSpec& spec, const Evaluator& ev, SearchResult& res) {
    SplitMix64 rng(spec.seed);
    const size_t dims = spec.variables.size();
    const int n_draws = std::max(1, spec.max_evals * 4 / 5);
    std::vector<std::vector<double>> xs(n_draws, std::vector<double>(dims));
    for (auto& x : xs)
        for (size_t j = 0; j < dims; ++j)
            x[j] = rng.range(spec.variables[j].lower, spec.variables[j].upper);
    res.trace = evaluate_batch(ev, xs, spec.threads);

    BestTracker bt;
    bt.consider(res.trace);
    if (bt.best_idx < 0) return;  // nothing finite to polish

    // Local polish: coordinate descent with shrinking steps around the best
    // draw, spending the remaining evaluation budget.
    std::vector<double> x = xs[bt.best_idx];
    double best = bt.best;
    std::vector<double> step(dims);
    for (size_t j = 0; j < dims; ++j)
        step[j] = 0.25 * (spec.variables[j].upper - spec.variables[j].lower);
    int budget = spec.max_evals - static_cast<int>(res.trace.size());
    while (budget > 0) {
        bool improved = false;
        for (size_t j = 0; j < dims && budget > 0; ++j) {
            for (double sgn : {+1.0, -1.0}) {
                if (budget <= 0) break;
                std::vector<double> cand = x;
                cand[j] = std::clamp(cand[j] + sgn * step[j], spec.variables[j].lower,
                                     spec.variables[j].upper);
                if (cand[j] == x[j]) continue;
                TraceEntry e = ev.evaluate(cand);
                res.trace.push_back(e);
                --budget;
                if (std::isfinite(e.objective) && e.objective > best) {
                    best = e.objective;
                    x = cand;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            double mx = 0.0;
            for (size_t j = 0; j < dims; ++j) {
                step[j] *= 0.5;
                mx = std::max(mx, step[j] / (spec.variables[j].upper - spec.variables[j].lower));
            }
            if (mx < 1e-9) break;
        }
    }
}

void run_nelder_mead(const SearchSpec& spec, const Evaluator& ev, SearchResult& res) {
    SplitMix64 rng(spec.seed);
    const size_t dims = spec.variables.size();
    const int per_restart = std::max(static_cast<int>(dims) + 2, spec.max_evals / spec.restarts);
    int budget = spec.max_evals;

    std::vector<double> global_best_x;
    double global_best = -kInf;

    auto eval_tracked = [&](const std::vector<double>& x) {
        TraceEntry e = ev.evaluate(x);
        res.trace.push_back(e);
        --budget;
        if (std::isfinite(e.objective) && e.objective > global_best) {
            global_best = e.objective;
            global_best_x = x;
        }
        return e.objective;
    };

    for (int r = 0; r < spec.restarts && budget > 0; ++r) {
        // Restart 0 from the box centre; later restarts jitter around the
        // best point found so far (deterministic through the seeded stream).
        std::vector<double> x0(dims);
        for (size_t j = 0; j < dims; ++j) {
            const auto& v = spec.variables[j];
            if (r == 0 || global_best_x.empty())
                x0[j] = 0.5 * (v.lower + v.upper);
            else
                x0[j] = global_best_x[j] + 0.1 * (v.upper - v.lower) * (2.0 * rng.uniform() - 1.0);
        }
        x0 = clamp_to_box(std::move(x0), spec.variables);

        // Initial simplex: offset each coordinate by a quarter range, flipped
        // inward at the box edge.
        std::vector<std::vector<double>> verts{x0};
        for (size_t j = 0; j < dims; ++j) {
            std::vector<double> v = x0;
            const double d = 0.25 * (spec.variables[j].upper - spec.variables[j].lower);
            v[j] = (v[j] + d <= spec.variables[j].upper) ? v[j] + d : v[j] - d;
            verts.push_back(std::move(v));
        }
        std::vector<double> fv(verts.size());
        int used = 0;
        for (size_t i = 0; i < verts.size() && budget > 0; ++i, ++used)
            fv[i] = eval_tracked(verts[i]);
        if (budget <= 0) break;

        // Maximization: order descending by objective (NaN-free: failures
        // are -inf and sink to the worst slot).
        auto order = [&] {
            std::vector<size_t> ord(verts.size());
            for (size_t i = 0; i < ord.size(); ++i) ord[i] = i;
            std::stable_sort(ord.begin(), ord.end(),
                             [&](size_t a, size_t b) { return fv[a] > fv[b]; });
            std::vector<std::vector<double>> nv;
            std::vector<double> nf;
            for (size_t i : ord) {
                nv.push_back(verts[i]);
                nf.push_back(fv[i]);
            }
            verts = std::move(nv);
            fv = std::move(nf);
        };
        order();

        while (used < per_restart && budget > 0) {
            // Simplex spread as a stopping measure.
            double spread = 0.0;
            for (size_t j = 0; j < dims; ++j) {
                double lo = verts[0][j], hi = verts[0][j];
                for (const auto& v : verts) {
                    lo = std::min(lo, v[j]);
                    hi = std::max(hi, v[j]);
                }
                spread = std::max(spread, (hi - lo) /
                                              (spec.variables[j].upper - spec.variables[j].lower));
            }
            if (spread < 1e-12) break;

            std::vector<double> centroid(dims, 0.0);
            for (size_t i = 0; i + 1 < verts.size(); ++i)
                for (size_t j = 0; j < dims; ++j) centroid[j] += verts[i][j];
            for (size_t j = 0; j < dims; ++j) centroid[j] /= static_cast<double>(dims);

            auto blend = [&](double coef) {
                std::vector<double> x(dims);
                for (size_t j = 0; j < dims; ++j)
                    x[j] = centroid[j] + coef * (centroid[j] - verts.back()[j]);
                return clamp_to_box(std::move(x), spec.variables);
            };

            const std::vector<double> xr = blend(1.0);
            const double fr = eval_tracked(xr);
            ++used;
            if (fr > fv[0]) {
                if (budget <= 0) break;
                const std::vector<double> xe = blend(2.0);
                const double fe = eval_tracked(xe);
                ++used;
                verts.back() = fe > fr ? xe : xr;
                fv.back() = std::max(fe, fr);
            } else if (fr > fv[fv.size() - 2]) {
                verts.back() = xr;
                fv.back() = fr;
            } else {
                if (budget <= 0) break;
                const std::vector<double> xc = blend(-0.5);
                const double fc = eval_tracked(xc);
                ++used;
                if (fc > fv.back()) {
                    verts.back() = xc;
                    fv.back() = fc;
                } else {
                    // Shrink toward the best vertex.
                    for (size_t i = 1; i < verts.size() && budget > 0; ++i, ++used) {
                        for (size_t j = 0; j < dims; ++j)
                            verts[i][j] = verts[0][j] + 0.5 * (verts[i][j] - verts[0][j]);
                        fv[i] = eval_tracked(verts[i]);
                    }
                }
            }
            order();
        }
    }
}

} // namespace

SearchResult run_search(const SearchSpec& spec) {
    spec.validate();
    SearchResult res;
    Evaluator ev{spec};
    switch (spec.strategy) {
        case Strategy::Grid: run_grid(spec, ev, res); break;
        case Strategy::RandomRestart: run_random_restart(spec, ev, res); break;
        case Strategy::NelderMeadLike: run_nelder_mead(spec, ev, res); break;
    }
    res.eval_count = static_cast<long long>(res.trace.size());
    for (const auto& e : res.trace)
        if (e.objective == -kInf) ++res.failures;

    BestTracker bt;
    bt.consider(res.trace);
    res.best_objective = bt.best;
    res.best_params = spec.base;
    if (bt.best_idx >= 0) {
        // Reconstruct the winning coordinates from the digest (exact: the
        // digest stores full round-trip precision).
        const std::string& d = res.trace[bt.best_idx].digest;
        size_t pos = 0;
        while (pos < d.size()) {
            const size_t eq = d.find('=', pos);
            size_t sep = d.find(';', eq);
            if (sep == std::string::npos) sep = d.size();
            apply_variable(res.best_params, d.substr(pos, eq - pos),
                           std::strtod(d.c_str() + eq + 1, nullptr));
            pos = sep + 1;
        }
    }
    return res;
}

std::vector<SweepRow> sweep(const SystemParams& p, const std::string& variable,
                            const std::vector<double>& values, bool with_full,
                            const IntegratorConfig* cfg) {
    p.validate();
    if (!variable_allowed(variable, false) && variable != "f")
        throw FanoError(ErrorCode::BadInput, "sweep: unknown variable " + variable);

    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    std::vector<cplx> dens;
    dens.reserve(values.size());
    const IntegratorConfig def{};
    for (double v : values) {
        SystemParams q = p;
        apply_variable(q, variable, v);
        q.validate();
        SweepRow row;
        row.value = v;
        row.objective_crude = objective_crude(q, &row.pole_flag);
        if (with_full) {
            row.has_full = true;
            row.objective_full = objective_full(q, cfg ? *cfg : def);
        }
        dens.push_back(two_qe_denominator(q, Inversions{-1.0, -1.0}));
        rows.push_back(row);
    }

    // Pole bracketing: a sign change of Im(den) between neighbours marks a
    // candidate; it is a genuine gain pole only if |den| collapses at the
    // interpolated crossing. The collapse is judged against the larger
    // endpoint (the local scale): a node can land arbitrarily close to the
    // pole itself, which would make the smaller endpoint useless as a scale.
    auto den_at = [&](double v) {
        SystemParams q = p;
        apply_variable(q, variable, v);
        return two_qe_denominator(q, Inversions{-1.0, -1.0});
    };
    for (size_t k = 0; k + 1 < rows.size(); ++k) {
        const double i0 = dens[k].imag(), i1 = dens[k + 1].imag();
        if (i0 == 0.0) {  // exact zero on a node
            if (std::abs(dens[k]) < 0.1 * std::abs(dens[k + 1])) rows[k].pole_flag = true;
            continue;
        }
        if (i0 * i1 >= 0.0) continue;
        double lo = rows[k].value, hi = rows[k + 1].value, flo = i0;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = den_at(mid).imag();
            if (flo * fm <= 0.0) hi = mid;
            else { lo = mid; flo = fm; }
        }
        const double mag_cross = std::abs(den_at(0.5 * (lo + hi)));
        if (mag_cross < 0.1 * std::max(std::abs(dens[k]), std::abs(dens[k + 1]))) {
            rows[k].pole_flag = true;
            rows[k + 1].pole_flag = true;
        }
    }
    return rows;
}

} // namespace fanoshg
