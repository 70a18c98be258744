#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "expcomp/core_model.hpp"
#include "expcomp/replication.hpp"
#include "expcomp/verdict.hpp"

namespace expcomp {

/// Probability over state paths Theta^T, indexed lexicographically.
struct StatePathLaw {
    std::size_t horizon = 0;
    std::vector<Rational> probabilities;

    ProductSpace paths(std::size_t states) const { return ProductSpace(std::vector<std::size_t>(horizon, states)); }

    void validate(std::size_t states) const {
        if (horizon == 0) throw std::invalid_argument("state path law needs a positive horizon");
        if (probabilities.size() != paths(states).size())
            throw std::invalid_argument("state path law has wrong length");
        if (!is_probability_vector(probabilities)) throw std::invalid_argument("state path law is not a distribution");
    }

    /// theta_1 ~ prior and the state never moves.
    static StatePathLaw fully_persistent(const std::vector<Rational>& prior, std::size_t horizon) {
        StatePathLaw p{horizon, {}};
        auto space = p.paths(prior.size());
        p.probabilities.assign(space.size(), Rational(0));
        for (std::size_t th = 0; th < prior.size(); ++th)
            p.probabilities[space.index(std::vector<std::size_t>(horizon, th))] = prior[th];
        return p;
    }

    /// Each period draws a fresh state from `prior`.
    static StatePathLaw iid(const std::vector<Rational>& prior, std::size_t horizon) {
        StatePathLaw p{horizon, {}};
        auto space = p.paths(prior.size());
        for (std::size_t i = 0; i < space.size(); ++i) {
            Rational w = 1;
            for (auto th : space.digits(i)) w *= prior[th];
            p.probabilities.push_back(w);
        }
        return p;
    }
};

/// Uncontrolled experiment whose period-t kernel sees the state path prefix theta^t.
class EvolvingExperiment {
public:
    using Row = std::vector<Rational>;

    EvolvingExperiment(std::vector<std::string> states, std::vector<std::vector<std::string>> signals)
        : states_(std::move(states)), signals_(std::move(signals)) {
        if (signals_.empty()) throw std::invalid_argument("experiment horizon must be at least 1");
        rows_.resize(signals_.size());
        for (std::size_t t = 1; t <= horizon(); ++t)
            rows_[t - 1].assign(state_paths(t).size(),
                                std::vector<std::optional<Row>>(signal_histories(t - 1).size()));
    }

    /// Fixed-state experiment read as a kernel of the current state.
    static EvolvingExperiment from_fixed(const Experiment& e) {
        if (e.is_controlled()) throw std::invalid_argument("evolving experiments are uncontrolled");
        EvolvingExperiment out(e.states(), e.signal_alphabets());
        for (std::size_t t = 1; t <= e.horizon(); ++t)
            for (std::size_t path = 0; path < out.state_paths(t).size(); ++path) {
                std::size_t current = path % e.state_count();
                for (std::size_t p = 0; p < e.signal_histories(t - 1).size(); ++p)
                    if (const auto& row = e.entry(t, current, e.prefix_index(t, p, 0)))
                        out.set_kernel(t, path, p, *row);
            }
        return out;
    }

    std::size_t horizon() const { return signals_.size(); }
    std::size_t state_count() const { return states_.size(); }
    const std::vector<std::string>& states() const { return states_; }
    const std::vector<std::vector<std::string>>& signal_alphabets() const { return signals_; }
    const std::vector<std::string>& signals(std::size_t t) const { return signals_.at(t - 1); }

    ProductSpace state_paths(std::size_t t) const { return ProductSpace(std::vector<std::size_t>(t, states_.size())); }
    ProductSpace signal_histories(std::size_t t) const {
        std::vector<std::size_t> r;
        for (std::size_t s = 1; s <= t; ++s) r.push_back(signals(s).size());
        return ProductSpace(std::move(r));
    }

    const std::optional<Row>& entry(std::size_t t, std::size_t path, std::size_t prefix) const {
        return rows_.at(t - 1).at(path).at(prefix);
    }
    const Row& kernel(std::size_t t, std::size_t path, std::size_t prefix) const {
        const auto& e = entry(t, path, prefix);
        if (!e) throw std::invalid_argument("missing kernel entry at period " + std::to_string(t));
        return *e;
    }
    void set_kernel(std::size_t t, std::size_t path, std::size_t prefix, Row row) {
        if (row.size() != signals(t).size()) throw std::invalid_argument("kernel row has wrong length");
        rows_.at(t - 1).at(path).at(prefix) = std::move(row);
    }

    std::string path_label(std::size_t t, std::size_t path) const {
        std::vector<std::string> parts;
        for (auto d : state_paths(t).digits(path)) parts.push_back(states_[d]);
        return join_labels(parts);
    }
    std::string signal_label(std::size_t t, std::size_t index) const {
        auto d = signal_histories(t).digits(index);
        std::vector<std::string> parts;
        for (std::size_t s = 0; s < d.size(); ++s) parts.push_back(signals(s + 1)[d[s]]);
        return join_labels(parts);
    }

    bool operator==(const EvolvingExperiment&) const = default;

private:
    std::vector<std::string> states_;
    std::vector<std::vector<std::string>> signals_;
    std::vector<std::vector<std::vector<std::optional<Row>>>> rows_;
};

inline std::vector<Violation> validate_evolving(const EvolvingExperiment& e) {
    std::vector<Violation> out;
    for (std::size_t t = 1; t <= e.horizon(); ++t)
        for (std::size_t path = 0; path < e.state_paths(t).size(); ++path)
            for (std::size_t p = 0; p < e.signal_histories(t - 1).size(); ++p) {
                Violation v{t, e.path_label(t, path), e.signal_label(t - 1, p), ""};
                const auto& row = e.entry(t, path, p);
                if (!row) {
                    v.message = "missing entry";
                } else if (!is_probability_vector(*row)) {
                    v.message = "row is not a distribution";
                } else {
                    continue;
                }
                out.push_back(std::move(v));
            }
    return out;
}

/// P(x^t, theta_t = theta) for every t, summed over state paths.
/// Result indexed [t-1][theta][x^t].
inline std::vector<std::vector<std::vector<Rational>>> evolving_joint_laws(const StatePathLaw& p,
                                                                            const EvolvingExperiment& e) {
    std::size_t T = e.horizon(), ns = e.state_count();
    p.validate(ns);
    if (p.horizon != T) throw std::invalid_argument("horizon mismatch between state path law and experiment");
    auto v = validate_evolving(e);
    if (!v.empty()) throw std::invalid_argument("invalid experiment: " + to_string(v.front()));
    std::vector<std::vector<std::vector<Rational>>> out(T);
    for (std::size_t t = 1; t <= T; ++t)
        out[t - 1].assign(ns, std::vector<Rational>(e.signal_histories(t).size()));
    auto space = p.paths(ns);
    for (std::size_t w = 0; w < space.size(); ++w) {
        const Rational& pw = p.probabilities[w];
        if (sgn(pw) == 0) continue;
        auto path = space.digits(w);
        std::vector<Rational> law{Rational(1)};
        std::size_t prefix_path = 0;
        for (std::size_t t = 1; t <= T; ++t) {
            prefix_path = prefix_path * ns + path[t - 1];
            std::size_t width = e.signals(t).size();
            std::vector<Rational> next(law.size() * width);
            for (std::size_t x = 0; x < law.size(); ++x) {
                if (sgn(law[x]) == 0) continue;
                const auto& row = e.kernel(t, prefix_path, x);
                for (std::size_t s = 0; s < width; ++s) next[x * width + s] = law[x] * row[s];
            }
            law = std::move(next);
            auto& slot = out[t - 1][path[t - 1]];
            for (std::size_t x = 0; x < law.size(); ++x)
                if (sgn(law[x]) != 0) slot[x] += pw * law[x];
        }
    }
    return out;
}

namespace detail {

inline JointLaws discounted_evolving_family(const StatePathLaw& p, const EvolvingExperiment& e,
                                            const DiscountFactor& delta) {
    auto joint = evolving_joint_laws(p, e);
    JointLaws out;
    out.weight.assign(e.state_count(), {});
    for (std::size_t t = 1; t <= e.horizon(); ++t) {
        for (std::size_t x = 0; x < e.signal_histories(t).size(); ++x)
            out.outcomes.push_back(mixture_label(t, e.signal_label(t, x)));
        for (std::size_t th = 0; th < e.state_count(); ++th)
            for (const auto& w : joint[t - 1][th]) out.weight[th].push_back(delta.weight(t) * w);
    }
    return out;
}

}  // namespace detail

/// The payoff at each period is evaluated at the state of that period.
inline ComparisonVerdict evolving_state_sufficient(const StatePathLaw& p, const EvolvingExperiment& f,
                                                   const EvolvingExperiment& g, const DiscountFactor& delta) {
    if (f.states() != g.states()) throw std::invalid_argument("state-space mismatch");
    if (f.horizon() != g.horizon() || delta.horizon() != f.horizon()) throw std::invalid_argument("horizon mismatch");
    auto source = detail::discounted_evolving_family(p, f, delta);
    auto target = detail::discounted_evolving_family(p, g, delta);
    auto r = solve_replication(source, target);
    ComparisonVerdict v;
    v.route = "LP on state-path joint laws";
    if (r.feasible) {
        if (!reconstructs(source, target, r.gamma)) throw std::logic_error("family witness fails the joint identity");
        v.status = Status::sufficient;
        v.witness.push_back(Garbling{source.outcomes, target.outcomes, std::move(r.gamma)});
        return v;
    }
    v.status = Status::not_sufficient;
    // Joint weights already carry the path law, so the payoff is used as is.
    DecisionProblem dp{r.certificate.actions, r.certificate.payoff, {}};
    r.certificate.problem = std::move(dp);
    r.certificate.problem_value_f = r.certificate.f_value;
    r.certificate.problem_value_g = r.certificate.g_value;
    v.certificate = std::move(r.certificate);
    return v;
}

}  // namespace expcomp
