#include "serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace fanoshg {
namespace {

using nlohmann::json;

std::string ind(int n) { return std::string(static_cast<size_t>(n), ' '); }

void kv(std::ostringstream& os, int indent, const char* key, const std::string& val,
        bool last = false) {
    os << ind(indent) << '"' << key << "\": " << val << (last ? "\n" : ",\n");
}

std::string jstr(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string jpair(cplx v) { return "[" + json_number(v.real()) + ", " + json_number(v.imag()) + "]"; }

std::string jbool(bool b) { return b ? "true" : "false"; }

} // namespace

std::string format_double(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string json_number(double v) {
    if (std::isnan(v)) return "\"nan\"";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    return format_double(v, 17);
}

std::string params_json(const SystemParams& p, int indent) {
    std::ostringstream os;
    const int in = indent + 2;
    os << "{\n";
    kv(os, in, "omega_drive", json_number(p.omega_drive));
    kv(os, in, "omega1", json_number(p.omega1));
    kv(os, in, "omega2", json_number(p.omega2));
    kv(os, in, "omega_eg1", json_number(p.omega_eg1));
    kv(os, in, "omega_eg2", json_number(p.omega_eg2));
    kv(os, in, "gamma1", json_number(p.gamma1));
    kv(os, in, "gamma2", json_number(p.gamma2));
    kv(os, in, "gamma_ee1", json_number(p.gamma_ee1));
    kv(os, in, "gamma_ee2", json_number(p.gamma_ee2));
    kv(os, in, "f1", jpair(p.f1));
    kv(os, in, "f2", jpair(p.f2));
    kv(os, in, "g", jpair(p.g));
    kv(os, in, "chi2", json_number(p.chi2));
    kv(os, in, "eps_p", jpair(p.eps_p), true);
    os << ind(indent) << "}";
    return os.str();
}

std::string integrator_json(const IntegratorConfig& c, int indent) {
    std::ostringstream os;
    const int in = indent + 2;
    os << "{\n";
    kv(os, in, "dt_initial", json_number(c.dt_initial));
    kv(os, in, "rel_tol", json_number(c.rel_tol));
    kv(os, in, "abs_tol", json_number(c.abs_tol));
    kv(os, in, "t_max", json_number(c.t_max));
    kv(os, in, "convergence_window", json_number(c.convergence_window));
    kv(os, in, "convergence_eps", json_number(c.convergence_eps));
    kv(os, in, "max_steps", std::to_string(c.max_steps), true);
    os << ind(indent) << "}";
    return os.str();
}

namespace {

std::string steady_json(const SteadyState& s, int indent) {
    std::ostringstream os;
    const int in = indent + 2;
    os << "{\n";
    kv(os, in, "alpha1_t", jpair(s.alpha1_t));
    kv(os, in, "alpha2_t", jpair(s.alpha2_t));
    kv(os, in, "rho_ge1_t", jpair(s.rho_ge1_t));
    kv(os, in, "rho_ge2_t", jpair(s.rho_ge2_t));
    kv(os, in, "rho_ee1", json_number(s.rho_ee1));
    kv(os, in, "rho_ee2", json_number(s.rho_ee2));
    kv(os, in, "y1", json_number(s.inversions.y1));
    kv(os, in, "y2", json_number(s.inversions.y2));
    kv(os, in, "residual", json_number(s.residual));
    kv(os, in, "converged", jbool(s.converged));
    kv(os, in, "t_elapsed", json_number(s.t_elapsed));
    kv(os, in, "steps", std::to_string(s.steps));
    kv(os, in, "stiffness_detected", jbool(s.stiffness_detected));
    kv(os, in, "purity_excess_max", json_number(s.purity_excess_max), true);
    os << ind(indent) << "}";
    return os.str();
}

std::string enhancement_json(const EnhancementReport& e, int indent) {
    std::ostringstream os;
    const int in = indent + 2;
    os << "{\n";
    kv(os, in, "alpha2_coupled", jpair(e.alpha2_coupled));
    kv(os, in, "alpha2_bare", jpair(e.alpha2_bare));
    kv(os, in, "intensity_ratio", json_number(e.intensity_ratio));
    kv(os, in, "chi2", json_number(e.chi2));
    kv(os, in, "eps_p", jpair(e.eps_p));
    kv(os, in, "coupled_converged", jbool(e.coupled_converged));
    kv(os, in, "bare_converged", jbool(e.bare_converged), true);
    os << ind(indent) << "}";
    return os.str();
}

} // namespace

std::string run_report_json(const SystemParams& p, const IntegratorConfig& cfg,
                            const SteadyState& s, const double* ansatz_dev,
                            const std::string& ansatz_error, const EnhancementReport* enh,
                            const std::string& enhancement_error) {
    std::ostringstream os;
    os << "{\n";
    kv(os, 2, "schema_version", "\"1\"");
    kv(os, 2, "params", params_json(p, 2));
    kv(os, 2, "integrator", integrator_json(cfg, 2));
    kv(os, 2, "steady_state", steady_json(s, 2));
    if (ansatz_dev)
        kv(os, 2, "verify_ansatz", "{ \"max_deviation\": " + json_number(*ansatz_dev) + " }");
    else
        kv(os, 2, "verify_ansatz", "{ \"error\": " + jstr(ansatz_error) + " }");
    if (enh)
        kv(os, 2, "enhancement", enhancement_json(*enh, 2), true);
    else
        kv(os, 2, "enhancement", "{ \"error\": " + jstr(enhancement_error) + " }", true);
    os << "}\n";
    return os.str();
}

std::string search_summary_json(const SearchResult& r) {
    std::ostringstream os;
    os << "{\n";
    kv(os, 2, "schema_version", "\"1\"");
    kv(os, 2, "best_params", params_json(r.best_params, 2));
    kv(os, 2, "best_objective", json_number(r.best_objective));
    kv(os, 2, "eval_count", std::to_string(r.eval_count));
    kv(os, 2, "failures", std::to_string(r.failures), true);
    os << "}\n";
    return os.str();
}

std::string trace_csv(const SearchResult& r) {
    std::ostringstream os;
    os << "index,digest,objective,pole_flag\n";
    for (size_t i = 0; i < r.trace.size(); ++i) {
        const auto& e = r.trace[i];
        os << i << ',' << e.digest << ',' << format_double(e.objective, 17) << ','
           << (e.pole_flag ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string sweep_csv(const std::string& variable, const std::vector<SweepRow>& rows,
                      int digits) {
    std::ostringstream os;
    os << variable << ",objective_crude,objective_full,pole_flag\n";
    for (const auto& row : rows) {
        os << format_double(row.value, digits) << ',' << format_double(row.objective_crude, digits)
           << ',';
        if (row.has_full) os << format_double(row.objective_full, digits);
        os << ',' << (row.pole_flag ? 1 : 0) << '\n';
    }
    return os.str();
}

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
    throw FanoError(ErrorCode::BadInput, path + ": " + why);
}

double num_at(const json& j, const std::string& path) {
    if (!j.is_number()) bad_field(path, "expected a number");
    return j.get<double>();
}

cplx cplx_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        bad_field(path, "expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

SystemParams params_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) bad_field(path, "expected an object");
    SystemParams p;
    for (const auto& [key, val] : j.items()) {
        const std::string fp = path + "." + key;
        if (key == "omega_drive") p.omega_drive = num_at(val, fp);
        else if (key == "omega1") p.omega1 = num_at(val, fp);
        else if (key == "omega2") p.omega2 = num_at(val, fp);
        else if (key == "omega_eg1") p.omega_eg1 = num_at(val, fp);
        else if (key == "omega_eg2") p.omega_eg2 = num_at(val, fp);
        else if (key == "gamma1") p.gamma1 = num_at(val, fp);
        else if (key == "gamma2") p.gamma2 = num_at(val, fp);
        else if (key == "gamma_ee1") p.gamma_ee1 = num_at(val, fp);
        else if (key == "gamma_ee2") p.gamma_ee2 = num_at(val, fp);
        else if (key == "chi2") p.chi2 = num_at(val, fp);
        else if (key == "f1") p.f1 = cplx_at(val, fp);
        else if (key == "f2") p.f2 = cplx_at(val, fp);
        else if (key == "g") p.g = cplx_at(val, fp);
        else if (key == "eps_p") p.eps_p = cplx_at(val, fp);
        else bad_field(fp, "unknown parameter field");
    }
    return p;
}

IntegratorConfig integrator_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) bad_field(path, "expected an object");
    IntegratorConfig c;
    for (const auto& [key, val] : j.items()) {
        const std::string fp = path + "." + key;
        if (key == "dt_initial") c.dt_initial = num_at(val, fp);
        else if (key == "rel_tol") c.rel_tol = num_at(val, fp);
        else if (key == "abs_tol") c.abs_tol = num_at(val, fp);
        else if (key == "t_max") c.t_max = num_at(val, fp);
        else if (key == "convergence_window") c.convergence_window = num_at(val, fp);
        else if (key == "convergence_eps") c.convergence_eps = num_at(val, fp);
        else if (key == "max_steps") c.max_steps = static_cast<long long>(num_at(val, fp));
        else bad_field(fp, "unknown integrator field");
    }
    return c;
}

} // namespace

SystemParams params_from_json_text(const std::string& json_text, const std::string& path) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FanoError(ErrorCode::BadInput, path + ": " + e.what());
    }
    return params_from_json(j, path);
}

SearchSpec search_spec_from_json_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FanoError(ErrorCode::BadInput, std::string("search spec: ") + e.what());
    }
    if (!j.is_object()) throw FanoError(ErrorCode::BadInput, "search spec: expected an object");

    SearchSpec spec;
    if (j.contains("base")) spec.base = params_from_json(j["base"], "base");
    if (j.contains("integrator"))
        spec.integrator = integrator_from_json(j["integrator"], "integrator");
    if (j.contains("variables")) {
        const auto& vars = j["variables"];
        if (!vars.is_array()) bad_field("variables", "expected an array");
        for (size_t i = 0; i < vars.size(); ++i) {
            const auto& v = vars[i];
            const std::string fp = "variables[" + std::to_string(i) + "]";
            if (!v.is_object() || !v.contains("name") || !v.contains("lower") ||
                !v.contains("upper"))
                bad_field(fp, "expected {name, lower, upper}");
            SearchVariable sv;
            if (!v["name"].is_string()) bad_field(fp + ".name", "expected a string");
            sv.name = v["name"].get<std::string>();
            sv.lower = num_at(v["lower"], fp + ".lower");
            sv.upper = num_at(v["upper"], fp + ".upper");
            spec.variables.push_back(std::move(sv));
        }
    }
    if (j.contains("strategy")) {
        const std::string s = j["strategy"].is_string() ? j["strategy"].get<std::string>() : "";
        if (s == "Grid") spec.strategy = Strategy::Grid;
        else if (s == "NelderMeadLike") spec.strategy = Strategy::NelderMeadLike;
        else if (s == "RandomRestart") spec.strategy = Strategy::RandomRestart;
        else bad_field("strategy", "expected Grid | NelderMeadLike | RandomRestart");
    }
    if (j.contains("objective")) {
        const std::string s = j["objective"].is_string() ? j["objective"].get<std::string>() : "";
        if (s == "CrudeEq9") spec.objective = SearchObjective::CrudeEq9;
        else if (s == "FullSteadyState") spec.objective = SearchObjective::FullSteadyState;
        else bad_field("objective", "expected CrudeEq9 | FullSteadyState");
    }
    if (j.contains("constrain_crude")) {
        if (!j["constrain_crude"].is_boolean()) bad_field("constrain_crude", "expected a boolean");
        spec.constrain_crude = j["constrain_crude"].get<bool>();
    }
    auto int_at = [&](const char* key, int& out) {
        if (j.contains(key)) {
            if (!j[key].is_number_integer()) bad_field(key, "expected an integer");
            out = j[key].get<int>();
        }
    };
    int_at("grid_points", spec.grid_points);
    int_at("restarts", spec.restarts);
    int_at("max_evals", spec.max_evals);
    int_at("threads", spec.threads);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) bad_field("seed", "expected an integer");
        spec.seed = j["seed"].get<uint64_t>();
    }
    return spec;
}

} // namespace fanoshg
