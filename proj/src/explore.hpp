#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "analytics.hpp"

namespace fanoshg {

struct SearchVariable {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
};

enum class Strategy { Grid, NelderMeadLike, RandomRestart };
enum class SearchObjective { CrudeEq9, FullSteadyState };

struct SearchSpec {
    SystemParams base{};
    std::vector<SearchVariable> variables;
    Strategy strategy = Strategy::Grid;
    SearchObjective objective = SearchObjective::CrudeEq9;
    // Collapses the crude search space to (f real with f1 = f2 = f, g
    // complex, omega_eg1, omega_eg2): variable name "f" becomes valid and
    // the per-component f names become invalid.
    bool constrain_crude = false;
    int grid_points = 3;  // per dimension, Grid strategy
    int restarts = 4;     // NelderMeadLike / RandomRestart
    int max_evals = 200;
    uint64_t seed = 0;
    int threads = 1;
    IntegratorConfig integrator{};  // used by the full objective

    void validate() const;
};

struct TraceEntry {
    std::string digest;  // "name=value;..." for the varied coordinates
    double objective = 0.0;
    bool pole_flag = false;
};

struct SearchResult {
    SystemParams best_params{};
    double best_objective = 0.0;
    std::vector<TraceEntry> trace;
    long long eval_count = 0;
    long long failures = 0;  // divergent / non-converged full evaluations
};

// Coefficient magnitude of the closed-form SH amplitude at frozen
// inversions y1 = y2 = -1 and unit fundamental. An exact pole maps to +inf
// with *pole set; such entries are recorded but never selected as best.
double objective_crude(const SystemParams& p, bool* pole = nullptr);

// Dynamic intensity ratio (time-evolution enhancement). Non-converged or
// divergent runs map to -inf with *failed set.
double objective_full(const SystemParams& p, const IntegratorConfig& cfg, bool* failed = nullptr);

// True when `name` addresses a coordinate valid under the given constraint
// mode. Unconstrained names: f1_re f1_im f2_re f2_im g_re g_im omega_eg1
// omega_eg2. Constrained names: f g_re g_im omega_eg1 omega_eg2.
bool variable_allowed(const std::string& name, bool constrained);

// Writes one search coordinate into the parameter set ("f" sets both
// couplings to the real value). Throws BadInput for unknown names.
void apply_variable(SystemParams& p, const std::string& name, double value);

SearchResult run_search(const SearchSpec& spec);

struct SweepRow {
    double value = 0.0;
    double objective_crude = 0.0;
    bool has_full = false;
    double objective_full = 0.0;
    bool pole_flag = false;
};

// One-axis sweep holding everything else fixed. The pole flag marks at most
// the pair of rows bracketing a zero of the closed-form denominator (sign
// change of its imaginary part + collapse of its magnitude in between).
std::vector<SweepRow> sweep(const SystemParams& p, const std::string& variable,
                            const std::vector<double>& values, bool with_full,
                            const IntegratorConfig* cfg = nullptr);

} // namespace fanoshg
