#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "expcomp/core_model.hpp"
#include "expcomp/sufficiency.hpp"
#include "expcomp/verdict.hpp"

namespace expcomp {

/// H(t) = 2 * integral_0^t F(pi) dpi, where F is the CDF of the posterior
/// of the first state. Piecewise linear with kinks at the support.
struct CdfIntegral {
    std::vector<Rational> breakpoints;  // sorted support points
    std::vector<Rational> weights;      // probability at each breakpoint

    Rational operator()(const Rational& t) const {
        Rational h = 0;
        for (std::size_t i = 0; i < breakpoints.size(); ++i)
            if (breakpoints[i] < t) h += weights[i] * (t - breakpoints[i]);
        return 2 * h;
    }

    std::vector<Rational> values() const {
        std::vector<Rational> out;
        for (const auto& b : breakpoints) out.push_back((*this)(b));
        return out;
    }
};

inline CdfIntegral cdf_integral(const PosteriorDistribution& d) {
    d.validate();
    CdfIntegral h;
    for (const auto& p : d.support) {
        if (p.posterior.size() != 2) throw std::invalid_argument("dichotomy expects exactly two states");
        auto it = std::lower_bound(h.breakpoints.begin(), h.breakpoints.end(), p.posterior[0]);
        auto i = static_cast<std::size_t>(it - h.breakpoints.begin());
        if (it != h.breakpoints.end() && *it == p.posterior[0]) {
            h.weights[i] += p.probability;
        } else {
            h.breakpoints.insert(it, p.posterior[0]);
            h.weights.insert(h.weights.begin() + static_cast<std::ptrdiff_t>(i), p.probability);
        }
    }
    return h;
}

namespace detail {

// Static experiment whose posterior distribution under `prior` is d.
inline StaticExperiment experiment_from_posteriors(const PosteriorDistribution& d, const std::vector<Rational>& prior) {
    StaticExperiment s;
    s.laws.assign(prior.size(), {});
    for (std::size_t o = 0; o < d.support.size(); ++o) {
        s.outcomes.push_back("m" + std::to_string(o));
        for (std::size_t th = 0; th < prior.size(); ++th)
            s.laws[th].push_back(d.support[o].probability * d.support[o].posterior[th] / prior[th]);
    }
    return s;
}

}  // namespace detail

/// Convex-order check: Sufficient iff H_f >= H_g at every kink of either.
inline ComparisonVerdict mps_compare(const PosteriorDistribution& df, const PosteriorDistribution& dg) {
    auto hf = cdf_integral(df), hg = cdf_integral(dg);
    auto prior = df.barycenter();
    if (prior != dg.barycenter()) throw std::invalid_argument("posterior distributions have different barycenters");
    std::vector<Rational> points{Rational(0), Rational(1)};
    points.insert(points.end(), hf.breakpoints.begin(), hf.breakpoints.end());
    points.insert(points.end(), hg.breakpoints.begin(), hg.breakpoints.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    ComparisonVerdict v;
    v.route = "convex order";
    for (const auto& t : points) {
        Rational a = hf(t), b = hg(t);
        if (a >= b) continue;
        v.status = Status::not_sufficient;
        Certificate c;
        c.breakpoint = t;
        c.reason = "H_f(" + to_string(t) + ") = " + to_string(a) + " < H_g = " + to_string(b);
        // Betting on the second state at odds t pays max(0, t - pi) in expectation.
        c.actions = {"abstain", "bet"};
        DecisionProblem dp{c.actions, {{Rational(0), Rational(0)}, {t - 1, t}}, {}};
        for (const auto& row : dp.payoff) c.payoff.push_back({row[0] * prior[0], row[1] * prior[1]});
        c.f_value = a / 2;
        c.g_value = b / 2;
        c.problem = std::move(dp);
        c.problem_value_f = c.f_value;
        c.problem_value_g = c.g_value;
        v.certificate = std::move(c);
        return v;
    }
    v.status = Status::sufficient;
    if (sgn(prior[0]) > 0 && sgn(prior[1]) > 0) {
        auto w = blackwell_sufficient(detail::experiment_from_posteriors(df, prior),
                                      detail::experiment_from_posteriors(dg, prior));
        if (w.sufficient()) {
            v.witness = std::move(w.witness);
        } else {
            v.notes.push_back("garbling LP disagrees with the convex order check");
        }
    }
    return v;
}

/// Mixture posteriors of two uncontrolled dichotomies compared in convex order.
inline ComparisonVerdict mps_compare_experiments(const Experiment& f, const Experiment& g, const DiscountFactor& delta,
                                                 std::vector<Rational> prior = {}) {
    if (f.state_count() != 2 || g.state_count() != 2) throw std::invalid_argument("dichotomy expects exactly two states");
    if (prior.empty()) prior = uniform_vector(2);
    auto df = posterior_distribution(mixture_experiment(f, delta), prior);
    auto dg = posterior_distribution(mixture_experiment(g, delta), prior);
    return mps_compare(df, dg);
}

}  // namespace expcomp
