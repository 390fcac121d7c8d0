// fano — command-line front end. Talks to the simulation core exclusively
// through the public C API (fano_shg.h); config parsing and file plumbing
// live here, all numerics and digit contracts live in the library.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fano_shg.h"

namespace {

using nlohmann::json;

struct CliError {
    int exit_code;
    std::string message;
};

// 0 success, 2 config error, 3 non-convergence, 4 numerical blow-up,
// 5 oracle failure.
int exit_code_for(fano_status s) {
    switch (s) {
        case FANO_OK:
            return 0;
        case FANO_ERR_NON_FINITE:
        case FANO_ERR_DEGENERATE_DENOMINATOR:
            return 4;
        case FANO_ERR_ORACLE:
            return 5;
        case FANO_ERR_NO_CONVERGENCE:
        case FANO_ERR_NOT_CONVERGED:
        case FANO_ERR_NO_BRACKET:
            return 3;
        default:
            return 2;  // invalid params, bad input, I/O
    }
}

[[noreturn]] void throw_status(fano_status s, const std::string& context) {
    throw CliError{exit_code_for(s), context + ": " + fano_last_error()};
}

void check(fano_status s, const std::string& context) {
    if (s != FANO_OK) throw_status(s, context);
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw CliError{2, "cannot open config file: " + path};
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        throw CliError{2, "config parse error in " + path + ": " + e.what()};
    }
}

struct ParamsHandle {
    fano_params* p = nullptr;
    ~ParamsHandle() { fano_params_destroy(p); }
    ParamsHandle() = default;
    ParamsHandle(const ParamsHandle&) = delete;
    ParamsHandle& operator=(const ParamsHandle&) = delete;
    ParamsHandle(ParamsHandle&& o) noexcept : p(o.p) { o.p = nullptr; }
    ParamsHandle& operator=(ParamsHandle&& o) noexcept {
        if (this != &o) {
            fano_params_destroy(p);
            p = o.p;
            o.p = nullptr;
        }
        return *this;
    }
};

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { fano_string_free(s); }
    std::string str() const { return s != nullptr ? std::string(s) : std::string(); }
};

void apply_param_overrides(fano_params* p, const json& obj) {
    for (const auto& [key, val] : obj.items()) {
        if (val.is_array()) {
            if (val.size() != 2 || !val[0].is_number() || !val[1].is_number())
                throw CliError{2, "params." + key + ": complex values are [re, im]"};
            check(fano_params_set_complex(p, key.c_str(), val[0].get<double>(),
                                          val[1].get<double>()),
                  "params." + key);
        } else if (val.is_number()) {
            check(fano_params_set(p, key.c_str(), val.get<double>()), "params." + key);
        } else {
            throw CliError{2, "params." + key + ": expected number or [re, im]"};
        }
    }
}

ParamsHandle make_params(const json& cfg, const std::string& preset_flag) {
    std::string preset = preset_flag;
    if (preset.empty() && cfg.contains("preset")) preset = cfg["preset"].get<std::string>();
    ParamsHandle h;
    if (!preset.empty()) {
        h.p = fano_params_create_preset(preset.c_str());
        if (h.p == nullptr) throw CliError{2, std::string("preset: ") + fano_last_error()};
    } else {
        h.p = fano_params_create();
        if (h.p == nullptr) throw CliError{2, "out of memory"};
    }
    if (cfg.contains("params")) {
        if (!cfg["params"].is_object()) throw CliError{2, "config \"params\" must be an object"};
        apply_param_overrides(h.p, cfg["params"]);
    }
    return h;
}

fano_integrator_config make_integrator(const json& cfg) {
    fano_integrator_config c;
    fano_integrator_config_init(&c);
    if (!cfg.contains("integrator")) return c;
    const json& j = cfg["integrator"];
    if (!j.is_object()) throw CliError{2, "config \"integrator\" must be an object"};
    auto num = [&](const char* key, double& slot) {
        if (j.contains(key)) slot = j[key].get<double>();
    };
    num("dt_initial", c.dt_initial);
    num("rel_tol", c.rel_tol);
    num("abs_tol", c.abs_tol);
    num("t_max", c.t_max);
    num("convergence_window", c.convergence_window);
    num("convergence_eps", c.convergence_eps);
    if (j.contains("max_steps")) c.max_steps = j["max_steps"].get<long long>();
    return c;
}

fano_method method_from(const std::string& name, const std::string& context) {
    if (name == "fixed-point") return FANO_METHOD_FIXED_POINT;
    if (name == "time-evolution") return FANO_METHOD_TIME_EVOLUTION;
    throw CliError{2, context + ": unknown method \"" + name +
                          "\" (expected fixed-point or time-evolution)"};
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError{2, "cannot write " + path};
    out << content;
    if (!out) throw CliError{2, "write failed: " + path};
}

// Reads the full parameter set back through the C API into the JSON shape
// the library's search-spec parser expects (complex fields as [re, im]).
json params_as_json(const fano_params* p) {
    json j = json::object();
    static const char* real_fields[] = {"omega_drive", "omega1",    "omega2",
                                        "omega_eg1",   "omega_eg2", "gamma1",
                                        "gamma2",      "gamma_ee1", "gamma_ee2",
                                        "chi2"};
    static const char* complex_fields[] = {"f1", "f2", "g", "eps_p"};
    for (const char* f : real_fields) {
        double v = 0.0;
        check(fano_params_get(p, f, &v), std::string("read ") + f);
        j[f] = v;
    }
    for (const char* f : complex_fields) {
        double re = 0.0, im = 0.0;
        check(fano_params_get_complex(p, f, &re, &im), std::string("read ") + f);
        j[f] = json::array({re, im});
    }
    return j;
}

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    if (dir.back() == '/') return dir + name;
    return dir + "/" + name;
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty() || dir == ".") return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw CliError{2, "cannot create output directory " + dir + ": " + ec.message()};
}

int cmd_run(const std::string& config_path, const std::string& preset, const std::string& out_dir,
            bool dump_trajectory, const std::string& method_name, double t_max_override) {
    ensure_out_dir(out_dir);
    const json cfg = load_config(config_path);
    ParamsHandle params = make_params(cfg, preset);
    fano_integrator_config icfg = make_integrator(cfg);
    if (t_max_override > 0) icfg.t_max = t_max_override;

    std::string method = method_name;
    if (method.empty() && cfg.contains("enhancement_method"))
        method = cfg["enhancement_method"].get<std::string>();
    if (method.empty()) method = "fixed-point";

    int csv_digits = 12;
    if (cfg.contains("output") && cfg["output"].contains("csv_digits"))
        csv_digits = cfg["output"]["csv_digits"].get<int>();

    const std::string trajectory_path = join_path(out_dir, "trajectory.csv");
    OwnedString report;
    check(fano_run_report_json(params.p, &icfg, method_from(method, "enhancement_method"),
                               dump_trajectory ? trajectory_path.c_str() : nullptr, csv_digits,
                               &report.s),
          "run");

    const std::string report_path = join_path(out_dir, "report.json");
    write_file(report_path, report.str());
    std::cout << "report: " << report_path << "\n";
    if (dump_trajectory) std::cout << "trajectory: " << trajectory_path << "\n";

    // Short human summary pulled from the report itself; a run that hit
    // t_max without settling exits 3 (the report is still written).
    bool converged = false;
    try {
        const json r = json::parse(report.str());
        const json& ss = r.at("steady_state");
        converged = ss.at("converged").get<bool>();
        std::cout << "converged: " << (converged ? "yes" : "no")
                  << "  residual: " << ss.at("residual").dump() << "\n";
        if (r.contains("enhancement") && r["enhancement"].contains("intensity_ratio"))
            std::cout << "intensity_ratio: " << r["enhancement"]["intensity_ratio"].dump()
                      << "\n";
    } catch (const std::exception&) {
        // report is still on disk; summary is best-effort
    }
    return converged ? 0 : 3;
}

int cmd_search(const std::string& config_path, const std::string& preset,
               const std::string& out_dir, std::optional<uint64_t> seed,
               std::optional<int> threads, std::optional<int> max_evals) {
    ensure_out_dir(out_dir);
    const json cfg = load_config(config_path);
    if (!cfg.contains("search") || !cfg["search"].is_object())
        throw CliError{2, "search requires a config with a \"search\" object"};

    ParamsHandle params = make_params(cfg, preset);
    json spec = cfg["search"];
    spec["base"] = params_as_json(params.p);
    if (!spec.contains("integrator") && cfg.contains("integrator"))
        spec["integrator"] = cfg["integrator"];
    if (seed) spec["seed"] = *seed;
    if (threads) spec["threads"] = *threads;
    if (max_evals) spec["max_evals"] = *max_evals;

    OwnedString summary, trace;
    check(fano_run_search(spec.dump().c_str(), &summary.s, &trace.s), "search");

    const std::string summary_path = join_path(out_dir, "summary.json");
    const std::string trace_path = join_path(out_dir, "trace.csv");
    write_file(summary_path, summary.str());
    write_file(trace_path, trace.str());
    std::cout << "summary: " << summary_path << "\n";
    std::cout << "trace: " << trace_path << "\n";
    try {
        const json s = json::parse(summary.str());
        std::cout << "best_objective: " << s.at("best_objective").dump()
                  << "  evals: " << s.at("eval_count").dump() << "\n";
    } catch (const std::exception&) {
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& preset,
              const std::string& out_dir, std::string variable, std::vector<double> values,
              double start, double stop, int count, bool full, int digits_flag) {
    ensure_out_dir(out_dir);
    const json cfg = load_config(config_path);
    ParamsHandle params = make_params(cfg, preset);
    fano_integrator_config icfg = make_integrator(cfg);

    if (cfg.contains("sweep")) {
        const json& sw = cfg["sweep"];
        if (variable.empty() && sw.contains("variable"))
            variable = sw["variable"].get<std::string>();
        if (values.empty()) {
            if (sw.contains("values")) {
                values = sw["values"].get<std::vector<double>>();
            } else if (sw.contains("start") && sw.contains("stop") && sw.contains("count")) {
                start = sw["start"].get<double>();
                stop = sw["stop"].get<double>();
                count = sw["count"].get<int>();
            }
        }
        if (sw.contains("full")) full = full || sw["full"].get<bool>();
    }
    if (values.empty()) {
        if (count < 2) throw CliError{2, "sweep needs --values or --start/--stop/--count >= 2"};
        values.reserve(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i)
            values.push_back(start + (stop - start) * static_cast<double>(i) /
                                         static_cast<double>(count - 1));
    }
    if (variable.empty()) throw CliError{2, "sweep needs a variable name"};

    int csv_digits = digits_flag;
    if (csv_digits <= 0 && cfg.contains("output") && cfg["output"].contains("csv_digits"))
        csv_digits = cfg["output"]["csv_digits"].get<int>();
    if (csv_digits <= 0) csv_digits = 12;

    OwnedString csv;
    check(fano_sweep(params.p, variable.c_str(), values.data(), values.size(), full ? 1 : 0,
                     &icfg, csv_digits, &csv.s),
          "sweep");
    const std::string csv_path = join_path(out_dir, "sweep.csv");
    write_file(csv_path, csv.str());
    std::cout << "sweep: " << csv_path << " (" << values.size() << " points)\n";
    return 0;
}

int cmd_validate(bool inject_fault) {
    OwnedString table;
    const fano_status s = fano_validate(inject_fault ? 1 : 0, &table.s);
    std::cout << table.str();
    if (s != FANO_OK && s != FANO_ERR_ORACLE) throw_status(s, "validate");
    return exit_code_for(s);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fano — driven three-resonator SHG simulator and optimizer"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir = ".";

    auto* run = app.add_subcommand("run", "integrate to steady state and report");
    std::string run_method;
    bool dump_trajectory = false;
    double t_max_override = 0.0;
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--preset", preset, "parameter preset (paper-optimum|bare|self-oscillation)");
    run->add_option("--out", out_dir, "output directory (default .)");
    run->add_flag("--dump-trajectory", dump_trajectory, "also write trajectory.csv");
    run->add_option("--method", run_method, "enhancement method (fixed-point|time-evolution)");
    run->add_option("--t-max", t_max_override, "override integration horizon");

    auto* search = app.add_subcommand("search", "optimize couplings/detunings");
    std::optional<uint64_t> seed;
    std::optional<int> threads, max_evals;
    search->add_option("--config", config_path, "JSON config file with a \"search\" object")
        ->required();
    search->add_option("--preset", preset, "base parameter preset");
    search->add_option("--out", out_dir, "output directory (default .)");
    search->add_option("--seed", seed, "override search seed");
    search->add_option("--threads", threads, "override evaluation thread count");
    search->add_option("--max-evals", max_evals, "override evaluation budget");

    auto* sweep = app.add_subcommand("sweep", "1D objective sweep");
    std::string variable;
    std::vector<double> values;
    double start = 0.0, stop = 0.0;
    int count = 0, digits = 0;
    bool full = false;
    sweep->add_option("--config", config_path, "JSON config file");
    sweep->add_option("--preset", preset, "base parameter preset");
    sweep->add_option("--out", out_dir, "output directory (default .)");
    sweep->add_option("--variable", variable, "swept coordinate name");
    sweep->add_option("--values", values, "explicit sample values (comma separated)")
        ->delimiter(',');
    sweep->add_option("--start", start, "range start");
    sweep->add_option("--stop", stop, "range stop");
    sweep->add_option("--count", count, "range sample count");
    sweep->add_flag("--full", full, "also evaluate the dynamic objective");
    sweep->add_option("--digits", digits, "CSV significant digits (default 12)");

    auto* validate = app.add_subcommand("validate", "run the built-in oracle suite");
    bool inject_fault = false;
    validate->add_flag("--inject-fault", inject_fault,
                       "flip the SH source sign to prove the suite detects it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; every other usage problem is a config
        // error under this tool's exit-code contract.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, preset, out_dir, dump_trajectory, run_method,
                           t_max_override);
        if (search->parsed()) return cmd_search(config_path, preset, out_dir, seed, threads, max_evals);
        if (sweep->parsed())
            return cmd_sweep(config_path, preset, out_dir, variable, values, start, stop, count,
                             full, digits);
        if (validate->parsed()) return cmd_validate(inject_fault);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
