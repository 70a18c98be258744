#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "expcomp/core_model.hpp"
#include "expcomp/lp.hpp"
#include "expcomp/verdict.hpp"

namespace expcomp {

/// Nonnegative weights over outcomes per state; need not be normalized.
struct JointLaws {
    std::vector<std::string> outcomes;
    std::vector<std::vector<Rational>> weight;  // weight[state][outcome]

    std::size_t state_count() const { return weight.size(); }
    std::size_t outcome_count() const { return outcomes.size(); }
};

inline JointLaws to_joint(const StaticExperiment& s) { return {s.outcomes, s.laws}; }

struct ReplicationResult {
    bool feasible = false;
    std::vector<std::vector<Rational>> gamma;  // gamma[source][target], full rows
    Certificate certificate;
    std::size_t pivots = 0;
};

/// Full system {target(y,theta) = sum_x source(x,theta) gamma(y|x); sum_y gamma(y|x) = 1; gamma >= 0}.
/// Variables are ordered x-major; rows are (y,theta) targets y-major, then row sums.
inline lp::FeasibilityProblem replication_problem(const JointLaws& source, const JointLaws& target) {
    lp::FeasibilityProblem p;
    std::size_t nx = source.outcome_count(), ny = target.outcome_count(), ns = source.state_count();
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) p.add_variable("g[" + target.outcomes[y] + "|" + source.outcomes[x] + "]");
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t th = 0; th < ns; ++th) {
            std::vector<lp::Term> terms;
            for (std::size_t x = 0; x < nx; ++x)
                if (sgn(source.weight[th][x]) != 0) terms.push_back({x * ny + y, source.weight[th][x]});
            p.add_equality(std::move(terms), target.weight[th][y],
                           "target " + target.outcomes[y] + " state#" + std::to_string(th));
        }
    for (std::size_t x = 0; x < nx; ++x) {
        std::vector<lp::Term> terms;
        for (std::size_t y = 0; y < ny; ++y) terms.push_back({x * ny + y, 1});
        p.add_equality(std::move(terms), 1, "row " + source.outcomes[x]);
    }
    return p;
}

inline Rational static_source_value(const JointLaws& source, const std::vector<std::vector<Rational>>& payoff) {
    Rational total = 0;
    for (std::size_t x = 0; x < source.outcome_count(); ++x) {
        std::optional<Rational> best;
        for (const auto& row : payoff) {
            Rational v = 0;
            for (std::size_t th = 0; th < source.state_count(); ++th) v += source.weight[th][x] * row[th];
            if (!best || v > *best) best = v;
        }
        if (best) total += *best;
    }
    return total;
}

inline Rational static_truthful_value(const JointLaws& target, const std::vector<std::vector<Rational>>& payoff) {
    Rational total = 0;
    for (std::size_t y = 0; y < target.outcome_count(); ++y)
        for (std::size_t th = 0; th < target.state_count(); ++th) total += target.weight[th][y] * payoff[y][th];
    return total;
}

/// Solves the garbling system after dropping outcomes that carry no weight in
/// any state, then lifts the answer back to the full system. Dropped source
/// rows receive the uniform row.
inline ReplicationResult solve_replication(const JointLaws& source, const JointLaws& target) {
    if (source.state_count() != target.state_count()) throw std::invalid_argument("state-space mismatch");
    std::size_t ns = source.state_count(), nx = source.outcome_count(), ny = target.outcome_count();
    for (const auto& w : source.weight)
        if (w.size() != nx) throw std::invalid_argument("source weights do not match outcomes");
    for (const auto& w : target.weight)
        if (w.size() != ny) throw std::invalid_argument("target weights do not match outcomes");

    auto active = [ns](const JointLaws& j, std::size_t o) {
        for (std::size_t th = 0; th < ns; ++th)
            if (sgn(j.weight[th][o]) != 0) return true;
        return false;
    };
    std::vector<std::size_t> xs, ys;
    for (std::size_t x = 0; x < nx; ++x)
        if (active(source, x)) xs.push_back(x);
    for (std::size_t y = 0; y < ny; ++y)
        if (active(target, y)) ys.push_back(y);

    lp::FeasibilityProblem p;
    for (std::size_t i = 0; i < xs.size() * ys.size(); ++i) p.add_variable("v" + std::to_string(i));
    for (std::size_t j = 0; j < ys.size(); ++j)
        for (std::size_t th = 0; th < ns; ++th) {
            std::vector<lp::Term> terms;
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (sgn(source.weight[th][xs[i]]) != 0) terms.push_back({i * ys.size() + j, source.weight[th][xs[i]]});
            p.add_equality(std::move(terms), target.weight[th][ys[j]]);
        }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<lp::Term> terms;
        for (std::size_t j = 0; j < ys.size(); ++j) terms.push_back({i * ys.size() + j, 1});
        p.add_equality(std::move(terms), 1);
    }
    lp::SolveStats stats;
    auto result = lp::solve_feasibility(p, {}, &stats);
    if (!lp::verify_result(p, result)) throw std::logic_error("LP self-check failed");

    ReplicationResult out;
    out.pivots = stats.pivots;
    if (const auto* w = std::get_if<lp::Witness>(&result)) {
        out.feasible = true;
        out.gamma.assign(nx, uniform_vector(ny));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            auto& row = out.gamma[xs[i]];
            std::fill(row.begin(), row.end(), Rational(0));
            for (std::size_t j = 0; j < ys.size(); ++j) row[ys[j]] = w->values[i * ys.size() + j];
        }
        return out;
    }

    const auto& y = std::get<lp::FarkasCertificate>(result).multipliers;
    std::vector<std::vector<Rational>> payoff(ny, std::vector<Rational>(ns));
    std::vector<Rational> row_mult(nx);
    for (std::size_t j = 0; j < ys.size(); ++j)
        for (std::size_t th = 0; th < ns; ++th) payoff[ys[j]][th] = y[j * ns + th];
    for (std::size_t i = 0; i < xs.size(); ++i) row_mult[xs[i]] = y[ys.size() * ns + i];
    // Inactive targets get a uniformly bad payoff large enough to keep y^T A <= 0.
    Rational penalty = 0;
    for (std::size_t x : xs) {
        Rational mass = 0;
        for (std::size_t th = 0; th < ns; ++th) mass += source.weight[th][x];
        Rational need = row_mult[x] / mass;
        if (need > penalty) penalty = need;
    }
    std::vector<bool> is_active_target(ny, false);
    for (auto j : ys) is_active_target[j] = true;
    for (std::size_t t = 0; t < ny; ++t)
        if (!is_active_target[t])
            for (std::size_t th = 0; th < ns; ++th) payoff[t][th] = -(penalty + 1);

    Certificate& c = out.certificate;
    c.dual.reserve(ny * ns + nx);
    for (std::size_t t = 0; t < ny; ++t)
        for (std::size_t th = 0; th < ns; ++th) {
            c.dual.push_back(payoff[t][th]);
            c.row_labels.push_back("target " + target.outcomes[t] + " state#" + std::to_string(th));
        }
    for (std::size_t x = 0; x < nx; ++x) {
        c.dual.push_back(row_mult[x]);
        c.row_labels.push_back("row " + source.outcomes[x]);
    }
    c.actions = target.outcomes;
    c.payoff = payoff;
    c.f_value = static_source_value(source, payoff);
    c.g_value = static_truthful_value(target, payoff);
    if (!(c.f_value < c.g_value)) throw std::logic_error("certificate does not separate");
    return out;
}

/// Exact check of target = source * gamma with stochastic gamma.
inline bool reconstructs(const JointLaws& source, const JointLaws& target,
                         const std::vector<std::vector<Rational>>& gamma) {
    if (gamma.size() != source.outcome_count()) return false;
    for (const auto& row : gamma)
        if (row.size() != target.outcome_count() || !is_probability_vector(row)) return false;
    for (std::size_t th = 0; th < source.state_count(); ++th) {
        std::vector<Rational> image(target.outcome_count());
        for (std::size_t x = 0; x < source.outcome_count(); ++x) {
            const auto& w = source.weight[th][x];
            if (sgn(w) == 0) continue;
            for (std::size_t y = 0; y < target.outcome_count(); ++y)
                if (sgn(gamma[x][y]) != 0) image[y] += w * gamma[x][y];
        }
        if (image != target.weight[th]) return false;
    }
    return true;
}

}  // namespace expcomp
