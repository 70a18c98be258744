#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "expcomp/core_model.hpp"
#include "expcomp/lp.hpp"
#include "expcomp/parallel.hpp"

namespace expcomp {

/// Finite decision problem. The optional control map gives
/// kappa_t(k_t | a, k^{t-1}) for t = 1..T-1, indexed as
/// control_map[t-1][action][control history index].
struct DecisionProblem {
    std::vector<std::string> actions;
    std::vector<std::vector<Rational>> payoff;  // payoff[action][state]
    std::vector<std::vector<std::vector<std::vector<Rational>>>> control_map;

    bool has_control_map() const { return !control_map.empty(); }

    void validate(std::size_t states) const {
        if (actions.empty()) throw std::invalid_argument("decision problem without actions");
        if (payoff.size() != actions.size()) throw std::invalid_argument("payoff table does not match actions");
        for (const auto& row : payoff)
            if (row.size() != states) throw std::invalid_argument("payoff row does not match the state count");
        for (const auto& period : control_map) {
            if (period.size() != actions.size()) throw std::invalid_argument("control map does not match actions");
            for (const auto& per_action : period)
                for (const auto& row : per_action)
                    if (!is_probability_vector(row)) throw std::invalid_argument("control map row is not a distribution");
        }
    }
};

/// Per-history action distributions for an uncontrolled experiment:
/// rows[t-1][signal history index] is a distribution over actions.
struct Strategy {
    std::vector<std::vector<std::vector<Rational>>> rows;
};

inline void check_problem_against(const Experiment& e, const DecisionProblem& dp, const DiscountFactor& delta,
                                  std::span<const Rational> prior) {
    if (delta.horizon() != e.horizon()) throw std::invalid_argument("horizon mismatch between experiment and discount");
    require_full_support_prior(prior, e.state_count());
    dp.validate(e.state_count());
}

/// Per-history myopic optimum: actions do not influence signals.
inline Rational optimal_value_uncontrolled(const Experiment& e, const DecisionProblem& dp, const DiscountFactor& delta,
                                           std::span<const Rational> prior) {
    if (e.is_controlled()) throw std::invalid_argument("controlled experiment passed to the uncontrolled oracle");
    check_problem_against(e, dp, delta, prior);
    auto laws = cumulative_laws(e);
    Rational total = 0;
    for (std::size_t t = 1; t <= e.horizon(); ++t) {
        if (sgn(delta.weight(t)) == 0) continue;
        const auto& s = laws[t - 1];
        Rational period_value = 0;
        for (std::size_t x = 0; x < s.outcome_count(); ++x) {
            std::optional<Rational> best;
            for (std::size_t a = 0; a < dp.actions.size(); ++a) {
                Rational v = 0;
                for (std::size_t th = 0; th < e.state_count(); ++th) v += prior[th] * s.laws[th][x] * dp.payoff[a][th];
                if (!best || v > *best) best = v;
            }
            period_value += *best;
        }
        total += delta.weight(t) * period_value;
    }
    return total;
}

namespace detail {

struct ControlledDp {
    const Experiment& e;
    const DecisionProblem& dp;
    const DiscountFactor& delta;

    const std::vector<Rational>& kappa(std::size_t t, std::size_t action, std::size_t control_index) const {
        return dp.control_map.at(t - 1).at(action).at(control_index);
    }

    // weight[theta] = prior(theta) * P(x^t | k^{t-1}, theta), control factors excluded.
    Rational value(std::size_t t, std::size_t sig, std::size_t ctl, const std::vector<Rational>& weight) const {
        bool any = false;
        for (const auto& w : weight)
            if (sgn(w) != 0) any = true;
        if (!any) return 0;
        std::size_t T = e.horizon();
        std::vector<Rational> continuation;
        if (t < T) {
            std::size_t nk = e.controls(t).size();
            continuation.assign(nk, Rational(0));
            std::size_t width = e.signals(t + 1).size();
            for (std::size_t k = 0; k < nk; ++k) {
                std::size_t next_ctl = ctl * nk + k;
                std::size_t prefix = e.prefix_index(t + 1, sig, next_ctl);
                for (std::size_t x = 0; x < width; ++x) {
                    std::vector<Rational> w(weight.size());
                    for (std::size_t th = 0; th < weight.size(); ++th)
                        w[th] = weight[th] * e.kernel(t + 1, th, prefix)[x];
                    continuation[k] += value(t + 1, sig * width + x, next_ctl, w);
                }
            }
        }
        std::optional<Rational> best;
        for (std::size_t a = 0; a < dp.actions.size(); ++a) {
            Rational v = 0;
            if (sgn(delta.weight(t)) != 0) {
                for (std::size_t th = 0; th < weight.size(); ++th) v += weight[th] * dp.payoff[a][th];
                v *= delta.weight(t);
            }
            if (t < T) {
                const auto& row = kappa(t, a, ctl);
                for (std::size_t k = 0; k < row.size(); ++k)
                    if (sgn(row[k]) != 0) v += row[k] * continuation[k];
            }
            if (!best || v > *best) best = v;
        }
        return *best;
    }
};

inline std::size_t info_state_count(const Experiment& e) {
    std::size_t total = 0;
    for (std::size_t t = 1; t <= e.horizon(); ++t)
        total += e.signal_histories(t).size() * e.control_histories(t - 1).size();
    return total;
}

}  // namespace detail

/// Backward induction over (x^t, k^{t-1}); exact.
inline Rational optimal_value_controlled(const Experiment& e, const DecisionProblem& dp, const DiscountFactor& delta,
                                         std::span<const Rational> prior, std::size_t history_cap = 2'000'000) {
    check_problem_against(e, dp, delta, prior);
    require_valid(e);
    if (detail::info_state_count(e) > history_cap) throw std::runtime_error("history count exceeds the configured cap");
    DecisionProblem local = dp;
    if (!dp.has_control_map()) {
        if (e.is_controlled()) throw std::invalid_argument("controlled experiment needs a control map");
        for (std::size_t t = 1; t < e.horizon(); ++t)
            local.control_map.push_back(std::vector<std::vector<std::vector<Rational>>>(
                dp.actions.size(), std::vector<std::vector<Rational>>(1, {Rational(1)})));
    }
    if (local.control_map.size() != e.horizon() - 1) throw std::invalid_argument("control map has wrong horizon");
    for (std::size_t t = 1; t < e.horizon(); ++t)
        for (const auto& per_action : local.control_map[t - 1]) {
            if (per_action.size() != e.control_histories(t - 1).size())
                throw std::invalid_argument("control map does not cover every control history");
            for (const auto& row : per_action)
                if (row.size() != e.controls(t).size()) throw std::invalid_argument("control map row has wrong length");
        }
    detail::ControlledDp solver{e, local, delta};
    Rational total = 0;
    for (std::size_t x = 0; x < e.signals(1).size(); ++x) {
        std::vector<Rational> w(e.state_count());
        for (std::size_t th = 0; th < e.state_count(); ++th) w[th] = prior[th] * e.kernel(1, th, 0)[x];
        total += solver.value(1, x, 0, w);
    }
    return total;
}

/// Chooses the oracle matching the inputs.
inline Rational optimal_value(const Experiment& e, const DecisionProblem& dp, const DiscountFactor& delta,
                              std::span<const Rational> prior) {
    if (e.is_controlled() || dp.has_control_map()) return optimal_value_controlled(e, dp, delta, prior);
    return optimal_value_uncontrolled(e, dp, delta, prior);
}

/// Per-state expected payoff of a strategy in an uncontrolled experiment.
inline std::vector<Rational> strategy_payoff_vector(const Experiment& e, const DecisionProblem& dp,
                                                    const DiscountFactor& delta, const Strategy& sigma) {
    auto laws = cumulative_laws(e);
    std::vector<Rational> out(e.state_count());
    for (std::size_t t = 1; t <= e.horizon(); ++t) {
        const auto& s = laws[t - 1];
        for (std::size_t x = 0; x < s.outcome_count(); ++x) {
            const auto& row = sigma.rows.at(t - 1).at(x);
            for (std::size_t a = 0; a < row.size(); ++a) {
                if (sgn(row[a]) == 0) continue;
                for (std::size_t th = 0; th < e.state_count(); ++th)
                    out[th] += delta.weight(t) * s.laws[th][x] * row[a] * dp.payoff[a][th];
            }
        }
    }
    return out;
}

/// Whether some strategy under `e` attains at least `target` in every state.
inline bool payoff_vector_attainable(const Experiment& e, const DecisionProblem& dp, const DiscountFactor& delta,
                                     std::span<const Rational> target) {
    if (e.is_controlled()) throw std::invalid_argument("per-state check needs an uncontrolled experiment");
    auto laws = cumulative_laws(e);
    lp::FeasibilityProblem p;
    std::vector<std::vector<lp::Term>> state_rows(e.state_count());
    for (std::size_t t = 1; t <= e.horizon(); ++t) {
        const auto& s = laws[t - 1];
        for (std::size_t x = 0; x < s.outcome_count(); ++x) {
            std::vector<lp::Term> row_sum;
            for (std::size_t a = 0; a < dp.actions.size(); ++a) {
                auto v = p.add_variable("s" + std::to_string(t) + "_" + std::to_string(x) + "_" + std::to_string(a));
                row_sum.push_back({v, 1});
                for (std::size_t th = 0; th < e.state_count(); ++th) {
                    Rational c = delta.weight(t) * s.laws[th][x] * dp.payoff[a][th];
                    if (sgn(c) != 0) state_rows[th].push_back({v, c});
                }
            }
            p.add_equality(std::move(row_sum), 1);
        }
    }
    for (std::size_t th = 0; th < e.state_count(); ++th) {
        auto slack = p.add_variable("slack" + std::to_string(th));
        state_rows[th].push_back({slack, -1});
        p.add_equality(std::move(state_rows[th]), target[th]);
    }
    return lp::is_feasible(lp::solve_feasibility(p));
}

struct AuditEntry {
    std::size_t index = 0;
    Rational value_f;
    Rational value_g;
    bool violation = false;  // value_f < value_g
};

struct AuditReport {
    std::vector<AuditEntry> entries;
    std::size_t violations = 0;
};

/// Compares optimal values problem by problem; a violation is value_f < value_g.
inline AuditReport dominance_audit(const Experiment& f, const Experiment& g, const DiscountFactor& delta,
                                   const std::vector<DecisionProblem>& problems, std::span<const Rational> prior,
                                   std::size_t jobs = 1) {
    AuditReport report;
    report.entries.resize(problems.size());
    std::vector<Rational> pri(prior.begin(), prior.end());
    parallel_for(problems.size(), jobs, [&](std::size_t i) {
        auto& entry = report.entries[i];
        entry.index = i;
        entry.value_f = optimal_value(f, problems[i], delta, pri);
        entry.value_g = optimal_value(g, problems[i], delta, pri);
        entry.violation = entry.value_f < entry.value_g;
    });
    for (const auto& e : report.entries)
        if (e.violation) ++report.violations;
    return report;
}

/// Reproducible problems with integer payoffs drawn uniformly from
/// [-payoff_range, payoff_range].
inline std::vector<DecisionProblem> random_problem_suite(std::uint64_t seed, std::size_t count,
                                                         std::size_t action_count, std::size_t state_count,
                                                         long payoff_range) {
    if (count == 0) throw std::invalid_argument("problem count must be at least 1");
    if (action_count == 0 || state_count == 0) throw std::invalid_argument("need at least one action and one state");
    if (payoff_range < 0) throw std::invalid_argument("payoff range must be nonnegative");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> draw(-payoff_range, payoff_range);
    std::vector<DecisionProblem> out(count);
    for (auto& dp : out) {
        for (std::size_t a = 0; a < action_count; ++a) {
            dp.actions.push_back("a" + std::to_string(a));
            std::vector<Rational> row(state_count);
            for (auto& u : row) u = draw(rng);
            dp.payoff.push_back(std::move(row));
        }
    }
    return out;
}

/// Adds random control maps with small-denominator rows. `control_sizes`
/// lists |K_1|..|K_{T-1}|.
inline std::vector<DecisionProblem> random_controlled_problem_suite(std::uint64_t seed, std::size_t count,
                                                                    std::size_t action_count, std::size_t state_count,
                                                                    long payoff_range,
                                                                    const std::vector<std::size_t>& control_sizes) {
    auto problems = random_problem_suite(seed, count, action_count, state_count, payoff_range);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<int> weight(0, 3);
    for (auto& dp : problems) {
        std::size_t histories = 1;
        for (std::size_t t = 0; t < control_sizes.size(); ++t) {
            std::vector<std::vector<std::vector<Rational>>> period(action_count);
            for (auto& per_action : period) {
                for (std::size_t h = 0; h < histories; ++h) {
                    std::vector<Rational> row(control_sizes[t]);
                    long total = 0;
                    for (auto& r : row) {
                        long w = weight(rng);
                        r = w;
                        total += w;
                    }
                    if (total == 0) {
                        row[std::uniform_int_distribution<std::size_t>(0, row.size() - 1)(rng)] = 1;
                        total = 1;
                    }
                    for (auto& r : row) r /= total;
                    per_action.push_back(std::move(row));
                }
            }
            dp.control_map.push_back(std::move(period));
            histories *= control_sizes[t];
        }
    }
    return problems;
}

}  // namespace expcomp
