#pragma once
#include <string>

#include "explore.hpp"

namespace fanoshg {

// All JSON artifacts carry schema_version "1" and print doubles with 17
// significant digits (full 64-bit round trip). Non-finite values appear as
// the strings "inf", "-inf", "nan". CSV precision is configurable, default
// 12 digits.

std::string format_double(double v, int digits);
std::string json_number(double v);  // 17 digits or quoted non-finite

std::string params_json(const SystemParams& p, int indent = 0);
std::string integrator_json(const IntegratorConfig& c, int indent = 0);

std::string run_report_json(const SystemParams& p, const IntegratorConfig& cfg,
                            const SteadyState& s, const double* ansatz_dev,
                            const std::string& ansatz_error, const EnhancementReport* enh,
                            const std::string& enhancement_error);

std::string search_summary_json(const SearchResult& r);
std::string trace_csv(const SearchResult& r);
std::string sweep_csv(const std::string& variable, const std::vector<SweepRow>& rows,
                      int digits = 12);

// Parses a SystemParams object from a JSON document (complex fields are
// [re, im] pairs). Unknown keys and malformed values throw BadInput with the
// offending field path. `path` prefixes error messages ("params").
SystemParams params_from_json_text(const std::string& json_text, const std::string& path);

// Full search-spec payload for the C API: {"base": {...}, "variables":
// [{"name","lower","upper"}...], "strategy", "objective", "constrain_crude",
// "grid_points", "restarts", "max_evals", "seed", "threads", "integrator"}.
SearchSpec search_spec_from_json_text(const std::string& json_text);

} // namespace fanoshg
