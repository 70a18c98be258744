#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expcomp/core_model.hpp"
#include "expcomp/dichotomy.hpp"
#include "expcomp/sufficiency.hpp"
#include "expcomp/verdict.hpp"

namespace expcomp {

/// Two independent binary draws with accuracies p (first) and q (second).
struct BernoulliPair {
    Rational p;
    Rational q;

    bool operator==(const BernoulliPair&) const = default;

    void validate() const {
        if (q < Rational(1, 2) || p < q || p > 1)
            throw std::domain_error("Bernoulli pair needs 1/2 <= q <= p <= 1, got p=" + to_string(p) +
                                    " q=" + to_string(q));
    }
};

/// Posteriors of the first state after the signals "1", "1,1" and "1,0".
struct BernoulliPosteriors {
    Rational pi1;
    Rational pi10;
    Rational pi11;
    Rational lambda;
};

inline BernoulliPosteriors bernoulli_posteriors(const BernoulliPair& b) {
    b.validate();
    const Rational& p = b.p;
    const Rational& q = b.q;
    BernoulliPosteriors out;
    out.pi1 = 1 - p;
    out.lambda = p * q + (1 - p) * (1 - q);
    out.pi11 = (1 - p) * (1 - q) / out.lambda;
    Rational mixed = p * (1 - q) + (1 - p) * q;
    // Only p = q = 1 makes "1,0" impossible; its posterior is then irrelevant.
    out.pi10 = sgn(mixed) == 0 ? out.pi1 : (1 - p) * q / mixed;
    if (out.lambda * out.pi11 + (1 - out.lambda) * out.pi10 != out.pi1)
        throw std::logic_error("posterior identity fails");
    return out;
}

/// Two-period experiment on states {0,1}: period t reports the state with
/// probability given by its accuracy.
inline Experiment bernoulli_experiment(const Rational& p, const Rational& q) {
    Experiment e({"0", "1"}, {{"0", "1"}, {"0", "1"}});
    e.set_kernel(1, 0, 0, {p, 1 - p});
    e.set_kernel(1, 1, 0, {1 - p, p});
    for (std::size_t x = 0; x < 2; ++x) {
        e.set_kernel(2, 0, x, {q, 1 - q});
        e.set_kernel(2, 1, x, {1 - q, q});
    }
    return e;
}

inline Experiment bernoulli_experiment(const BernoulliPair& b) { return bernoulli_experiment(b.p, b.q); }

namespace detail {

inline Rational fold_accuracy(const Rational& a, std::vector<std::string>& notes, const char* name) {
    if (a < 0 || a > 1) throw std::domain_error(std::string(name) + " outside [0,1]");
    if (a >= Rational(1, 2)) return a;
    notes.push_back(std::string(name) + " relabelled to " + to_string(1 - a) + " by swapping signals");
    return 1 - a;
}

// Relabels signals so both accuracies are at least 1/2.
inline BernoulliPair normalize_signals(const Rational& p, const Rational& q, std::vector<std::string>& notes,
                                       const char* p_name, const char* q_name) {
    return {fold_accuracy(p, notes, p_name), fold_accuracy(q, notes, q_name)};
}

}  // namespace detail

enum class Theorem3Branch { none, i, ii, iii };

inline const char* to_string(Theorem3Branch b) {
    switch (b) {
        case Theorem3Branch::none: return "none";
        case Theorem3Branch::i: return "(i)";
        case Theorem3Branch::ii: return "(ii)";
        case Theorem3Branch::iii: return "(iii)";
    }
    return "?";
}

struct Theorem3Detail {
    bool condition_a = false;
    bool branch_i = false;
    bool branch_ii = false;
    bool branch_iii = false;
    Theorem3Branch fired = Theorem3Branch::none;
    BernoulliPosteriors f;
    BernoulliPosteriors g;
};

inline Theorem3Detail theorem3_conditions(const BernoulliPair& f, const BernoulliPair& g, const DiscountFactor& delta) {
    if (delta.horizon() != 2) throw std::invalid_argument("closed form needs a two-period discount");
    Theorem3Detail d;
    d.f = bernoulli_posteriors(f);
    d.g = bernoulli_posteriors(g);
    const auto& [pi1, pi10, pi11, lam] = d.f;
    const Rational& pi1g = d.g.pi1;
    const Rational& pi11g = d.g.pi11;
    const Rational& lamg = d.g.lambda;
    const Rational& d1 = delta.weight(1);
    const Rational& d2 = delta.weight(2);

    d.condition_a = pi1 <= pi1g;
    d.branch_i = pi1 <= pi11g;
    bool middle = pi11 <= pi11g && pi11g < pi1;
    Rational lhs = (pi10 - pi11) * lam;
    Rational rhs = (pi10 - pi11g) * lamg;
    d.branch_ii = middle && lhs >= rhs;
    d.branch_iii = middle && lhs < rhs && (pi1 - pi11) * lam >= (pi1 - pi11g) * lamg &&
                   (pi10 - pi11) * d2 * lam >= (pi10 - pi11g) * d2 * lamg + (pi1 - pi1g) * d1;
    if (d.branch_i) d.fired = Theorem3Branch::i;
    else if (d.branch_ii) d.fired = Theorem3Branch::ii;
    else if (d.branch_iii) d.fired = Theorem3Branch::iii;
    return d;
}

/// Closed-form delta-sufficiency for two-period Bernoulli pairs.
inline ComparisonVerdict theorem3_verdict(const BernoulliPair& f_in, const BernoulliPair& g_in,
                                          const DiscountFactor& delta) {
    std::vector<std::string> notes;
    auto f = detail::normalize_signals(f_in.p, f_in.q, notes, "p", "q");
    auto g = detail::normalize_signals(g_in.p, g_in.q, notes, "p'", "q'");
    if (f.q > f.p || g.q > g.p)
        throw std::domain_error("closed form covers p >= q only; the period order cannot be relabelled");
    auto d = theorem3_conditions(f, g, delta);
    bool ok = d.condition_a && (sgn(delta.weight(2)) == 0 || d.fired != Theorem3Branch::none);
    ComparisonVerdict v;
    v.route = "closed form";
    v.notes = std::move(notes);
    v.notes.push_back(std::string("branch ") + to_string(d.fired));
    if (ok) {
        v.status = Status::sufficient;
        auto lp = delta_sufficient(bernoulli_experiment(f), bernoulli_experiment(g), delta);
        if (lp.sufficient()) {
            v.witness = std::move(lp.witness);
        } else {
            v.notes.push_back("garbling LP disagrees with the closed form");
        }
        return v;
    }
    v.status = Status::not_sufficient;
    auto lp = delta_sufficient(bernoulli_experiment(f), bernoulli_experiment(g), delta);
    Certificate c = lp.certificate ? *lp.certificate : Certificate{};
    if (!lp.not_sufficient()) v.notes.push_back("garbling LP disagrees with the closed form");
    c.reason = d.condition_a ? "no branch of condition (b) holds" : "condition (a) fails: pi1 > pi1'";
    v.certificate = std::move(c);
    return v;
}

/// Static comparison of the two-draw experiments f^2 and g^2.
inline ComparisonVerdict two_draw_static_verdict(const BernoulliPair& f_in, const BernoulliPair& g_in) {
    std::vector<std::string> notes;
    auto f = detail::normalize_signals(f_in.p, f_in.q, notes, "p", "q");
    auto g = detail::normalize_signals(g_in.p, g_in.q, notes, "p'", "q'");
    // f^2 is symmetric in the draw order.
    if (f.q > f.p) {
        std::swap(f.p, f.q);
        notes.push_back("draws of f reordered");
    }
    if (g.q > g.p) {
        std::swap(g.p, g.q);
        notes.push_back("draws of g reordered");
    }
    auto a = bernoulli_posteriors(f), b = bernoulli_posteriors(g);
    // Cross-multiplied to stay defined when lambda = 1.
    bool ok = a.pi11 <= b.pi11 && a.pi1 <= b.pi1 &&
              a.lambda * (a.pi1 - a.pi11) * (1 - b.lambda) >= (a.pi1 - b.pi11) * b.lambda * (1 - a.lambda);
    ComparisonVerdict v;
    v.route = "closed form";
    v.notes = std::move(notes);
    if (ok) {
        v.status = Status::sufficient;
        auto lp = blackwell_sufficient(cumulative_law(bernoulli_experiment(f), 2),
                                       cumulative_law(bernoulli_experiment(g), 2));
        if (lp.sufficient()) {
            v.witness = std::move(lp.witness);
        } else {
            v.notes.push_back("garbling LP disagrees with the closed form");
        }
        return v;
    }
    v.status = Status::not_sufficient;
    auto lp = blackwell_sufficient(cumulative_law(bernoulli_experiment(f), 2),
                                   cumulative_law(bernoulli_experiment(g), 2));
    Certificate c = lp.certificate ? *lp.certificate : Certificate{};
    if (!lp.not_sufficient()) v.notes.push_back("garbling LP disagrees with the closed form");
    c.reason = "two-draw inequality fails";
    v.certificate = std::move(c);
    return v;
}

/// Necessary condition for ranking two-draw experiments: max(p,q) >= max(p',q').
inline bool necessity_max_check(const Rational& p, const Rational& q, const Rational& pg, const Rational& qg) {
    std::vector<std::string> ignored;
    auto f = detail::normalize_signals(p, q, ignored, "p", "q");
    auto g = detail::normalize_signals(pg, qg, ignored, "p'", "q'");
    return std::max(f.p, f.q) >= std::max(g.p, g.q);
}

inline bool necessity_max_check(const BernoulliPair& f, const BernoulliPair& g) {
    return necessity_max_check(f.p, f.q, g.p, g.q);
}

}  // namespace expcomp
