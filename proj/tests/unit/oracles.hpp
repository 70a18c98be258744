#pragma once

// Brute-force reference computations used to check the library. They work
// on plain tables and share no code with the engines they check.

#include <gmpxx.h>

#include <map>
#include <random>
#include <vector>

namespace oracle {

using Q = mpq_class;
using Table = std::vector<std::vector<Q>>;  // table[state][outcome]

inline Q q(long n, long d = 1) {
    Q r(n, d);
    r.canonicalize();
    return r;
}

/// Posterior of every state, merged by posterior vector; outcomes with zero
/// marginal are dropped.
inline std::map<std::vector<Q>, Q> posteriors(const Table& laws, const std::vector<Q>& prior) {
    std::map<std::vector<Q>, Q> out;
    std::size_t n = laws.front().size();
    for (std::size_t x = 0; x < n; ++x) {
        Q marginal = 0;
        for (std::size_t s = 0; s < laws.size(); ++s) marginal += prior[s] * laws[s][x];
        if (marginal == 0) continue;
        std::vector<Q> post;
        for (std::size_t s = 0; s < laws.size(); ++s) {
            Q p = prior[s] * laws[s][x] / marginal;
            p.canonicalize();
            post.push_back(p);
        }
        out[post] += marginal;
    }
    return out;
}

/// Two-state posteriors as a map from the posterior of the first state.
inline std::map<Q, Q> first_state_posteriors(const Table& laws, const std::vector<Q>& prior) {
    std::map<Q, Q> out;
    for (const auto& [post, mass] : posteriors(laws, prior)) out[post[0]] += mass;
    return out;
}

/// Integrated CDF of a distribution on [0,1] evaluated at x.
inline Q integrated_cdf(const std::map<Q, Q>& d, const Q& x) {
    Q total = 0;
    for (const auto& [point, mass] : d)
        if (point < x) total += mass * (x - point);
    return total;
}

/// Two-state convex order: f dominates g iff the integrated CDF of f lies
/// above that of g at every kink of either (means are assumed equal).
inline bool dominates_in_convex_order(const std::map<Q, Q>& f, const std::map<Q, Q>& g) {
    std::vector<Q> kinks{0, 1};
    for (const auto& [p, m] : f) kinks.push_back(p);
    for (const auto& [p, m] : g) kinks.push_back(p);
    for (const auto& x : kinks)
        if (integrated_cdf(f, x) < integrated_cdf(g, x)) return false;
    return true;
}

/// Best expected payoff of a static problem: sum over outcomes of the best
/// action's prior-weighted payoff.
inline Q static_value(const Table& laws, const std::vector<Q>& prior, const Table& payoff) {
    Q total = 0;
    std::size_t n = laws.front().size();
    for (std::size_t x = 0; x < n; ++x) {
        bool first = true;
        Q best;
        for (const auto& u : payoff) {
            Q v = 0;
            for (std::size_t s = 0; s < laws.size(); ++s) v += prior[s] * laws[s][x] * u[s];
            if (first || v > best) best = v;
            first = false;
        }
        total += best;
    }
    return total;
}

/// Laws of two independent binary draws with accuracies p, q. Outcomes are
/// ordered (s1, s2) with s = 0 pointing to the first state.
inline Table two_draws(const Q& p, const Q& q) {
    Table t(2, std::vector<Q>(4));
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                Q pa = (a == s) ? p : Q(1 - p);
                Q pb = (b == s) ? q : Q(1 - q);
                t[s][a * 2 + b] = pa * pb;
            }
    return t;
}

/// Binary symmetric channel with accuracy p.
inline Table binary(const Q& p) { return {{p, 1 - p}, {1 - p, p}}; }

/// Uniform small-denominator probability row.
inline std::vector<Q> random_row(std::mt19937_64& rng, std::size_t n, long den = 6) {
    std::uniform_int_distribution<long> d(0, den);
    std::vector<long> w(n);
    long total = 0;
    for (auto& x : w) total += (x = d(rng));
    if (total == 0) {
        w[0] = 1;
        total = 1;
    }
    std::vector<Q> out;
    for (auto x : w) out.push_back(q(x, total));
    return out;
}

}  // namespace oracle
