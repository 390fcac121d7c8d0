#pragma once
#include <string>

namespace fanoshg {

struct OracleOutcome {
    std::string table;
    int failures = 0;
};

// Built-in oracle suite behind `validate`: frame consistency, reduction
// chain, single-emitter ceiling, closed-form/fixed-point self-consistency,
// and fixed-point vs time-evolution equivalence on a pinned stable point.
// inject_fault flips the sign of the SH source term in the equations of
// motion for the duration, which the equivalence oracle must detect.
OracleOutcome run_oracle_suite(bool inject_fault);

} // namespace fanoshg
