#pragma once

#include <optional>
#include <string>
#include <vector>

#include "expcomp/core_model.hpp"
#include "expcomp/value_oracle.hpp"

namespace expcomp {

enum class Status { sufficient, not_sufficient, inconclusive };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::sufficient: return "Sufficient";
        case Status::not_sufficient: return "NotSufficient";
        case Status::inconclusive: return "Inconclusive";
    }
    return "?";
}

/// Evidence that a comparison fails.
struct Certificate {
    /// Farkas multipliers over the rows of the system that was solved.
    std::vector<Rational> dual;
    std::vector<std::string> row_labels;
    /// Separating payoff in state-summed form, indexed [action][state]:
    /// f_value = sum_x max_a sum_theta P(x,theta) u(a,theta) < g_value.
    std::vector<std::string> actions;
    std::vector<std::vector<Rational>> payoff;
    Rational f_value;
    Rational g_value;
    /// Control map attached to controlled separations (kappa = refuting kernel).
    std::vector<std::vector<std::vector<std::vector<Rational>>>> control_map;
    /// Prior-weighted problem confirmed by the value oracle, when built.
    std::optional<DecisionProblem> problem;
    std::optional<Rational> problem_value_f;
    std::optional<Rational> problem_value_g;
    std::optional<std::size_t> failing_period;
    std::optional<Rational> breakpoint;
    std::string refuting_kernel;
    std::string reason;
};

struct ComparisonVerdict {
    Status status = Status::inconclusive;
    /// Garbling or garbling family; empty unless Sufficient.
    std::vector<Garbling> witness;
    std::optional<Certificate> certificate;
    std::string route;
    std::vector<std::string> notes;

    bool sufficient() const { return status == Status::sufficient; }
    bool not_sufficient() const { return status == Status::not_sufficient; }
};

}  // namespace expcomp
