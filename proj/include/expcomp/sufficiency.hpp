#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "expcomp/core_model.hpp"
#include "expcomp/lp.hpp"
#include "expcomp/parallel.hpp"
#include "expcomp/replication.hpp"
#include "expcomp/value_oracle.hpp"
#include "expcomp/verdict.hpp"

namespace expcomp {

/// What the value oracle needs to confirm a separating problem.
struct ProblemContext {
    const Experiment* f = nullptr;
    const Experiment* g = nullptr;
    std::optional<DiscountFactor> delta;
    std::vector<Rational> prior;  // empty means uniform
};

/// Turns a separating payoff (state-summed form) into a prior-weighted
/// decision problem. With experiments in the context the strict gap is
/// re-checked by the value oracle.
inline DecisionProblem certificate_to_decision_problem(const Certificate& cert, const ProblemContext& ctx = {}) {
    if (cert.payoff.empty() || cert.actions.size() != cert.payoff.size())
        throw std::invalid_argument("certificate carries no separating payoff");
    if (!(cert.f_value < cert.g_value)) throw std::invalid_argument("certificate does not separate");
    std::size_t ns = cert.payoff.front().size();
    std::vector<Rational> prior = ctx.prior.empty() ? uniform_vector(ns) : ctx.prior;
    require_full_support_prior(prior, ns);
    DecisionProblem dp;
    dp.actions = cert.actions;
    dp.control_map = cert.control_map;
    for (const auto& row : cert.payoff) {
        std::vector<Rational> u(ns);
        for (std::size_t th = 0; th < ns; ++th) u[th] = row[th] / prior[th];
        dp.payoff.push_back(std::move(u));
    }
    if (ctx.f && ctx.g && ctx.delta) {
        Rational vf = optimal_value(*ctx.f, dp, *ctx.delta, prior);
        Rational vg = optimal_value(*ctx.g, dp, *ctx.delta, prior);
        if (!(vf < vg)) throw std::logic_error("value oracle does not confirm the separating problem");
    }
    return dp;
}

namespace detail {

inline void attach_problem(Certificate& cert, const ProblemContext& ctx) {
    cert.problem = certificate_to_decision_problem(cert, ctx);
    if (ctx.f && ctx.g && ctx.delta) {
        std::vector<Rational> prior = ctx.prior.empty() ? uniform_vector(ctx.f->state_count()) : ctx.prior;
        cert.problem_value_f = optimal_value(*ctx.f, *cert.problem, *ctx.delta, prior);
        cert.problem_value_g = optimal_value(*ctx.g, *cert.problem, *ctx.delta, prior);
    }
}

inline std::vector<std::string> generic_state_labels(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("s" + std::to_string(i));
    return out;
}

inline void require_uncontrolled_pair(const Experiment& f, const Experiment& g) {
    if (f.is_controlled() || g.is_controlled())
        throw std::invalid_argument("this comparison needs uncontrolled experiments");
    if (f.states() != g.states()) throw std::invalid_argument("state-space mismatch");
    if (f.horizon() != g.horizon()) throw std::invalid_argument("horizon mismatch");
    require_valid(f);
    require_valid(g);
}

/// All (t, x^t) outcomes with weight delta_t f^t, zero-weight periods kept.
inline JointLaws discounted_family(const Experiment& e, const DiscountFactor& delta) {
    auto laws = cumulative_laws(e);
    JointLaws out;
    out.weight.assign(e.state_count(), {});
    for (std::size_t t = 1; t <= e.horizon(); ++t) {
        for (const auto& o : laws[t - 1].outcomes) out.outcomes.push_back(mixture_label(t, o));
        for (std::size_t th = 0; th < e.state_count(); ++th)
            for (const auto& p : laws[t - 1].laws[th]) out.weight[th].push_back(delta.weight(t) * p);
    }
    return out;
}

}  // namespace detail

/// Period t' of each row of a family witness over all (t', x^{t'}).
inline std::vector<std::size_t> family_row_periods(const Experiment& e) {
    std::vector<std::size_t> out;
    for (std::size_t t = 1; t <= e.horizon(); ++t) out.insert(out.end(), e.signal_histories(t).size(), t);
    return out;
}

inline ComparisonVerdict blackwell_sufficient(const StaticExperiment& p, const StaticExperiment& q) {
    p.validate();
    q.validate();
    if (p.state_count() != q.state_count()) throw std::invalid_argument("state-space mismatch");
    auto source = to_joint(p);
    auto target = to_joint(q);
    auto r = solve_replication(source, target);
    ComparisonVerdict v;
    v.route = "LP";
    if (r.feasible) {
        Garbling w{p.outcomes, q.outcomes, r.gamma};
        if (apply(p, w) != q) throw std::logic_error("garbling does not reproduce the target");
        v.status = Status::sufficient;
        v.witness.push_back(std::move(w));
        return v;
    }
    v.status = Status::not_sufficient;
    auto states = detail::generic_state_labels(p.state_count());
    Experiment fe = as_one_period(p, states), ge = as_one_period(q, states);
    detail::attach_problem(r.certificate, {&fe, &ge, DiscountFactor::uniform(1), {}});
    v.certificate = std::move(r.certificate);
    return v;
}

/// Checks delta_t g^t(y|theta) = sum_{t',x} delta_{t'} f^{t'}(x|theta) gamma(t,y | t',x) exactly.
inline bool verify_delta_witness(const Experiment& f, const Experiment& g, const DiscountFactor& delta,
                                 const Garbling& w) {
    auto source = detail::discounted_family(f, delta);
    auto target = detail::discounted_family(g, delta);
    if (w.from != source.outcomes || w.to != target.outcomes) return false;
    return reconstructs(source, target, w.matrix);
}

inline ComparisonVerdict delta_sufficient(const Experiment& f, const Experiment& g, const DiscountFactor& delta) {
    detail::require_uncontrolled_pair(f, g);
    if (delta.horizon() != f.horizon()) throw std::invalid_argument("horizon mismatch between experiments and discount");
    auto pm = mixture_experiment(f, delta);
    auto qm = mixture_experiment(g, delta);
    auto r = solve_replication(to_joint(pm), to_joint(qm));
    ComparisonVerdict v;
    v.route = "LP on mixture experiments";
    if (!r.feasible) {
        v.status = Status::not_sufficient;
        detail::attach_problem(r.certificate, {&f, &g, delta, {}});
        v.certificate = std::move(r.certificate);
        return v;
    }
    // Re-slice the mixture garbling into the family over every period.
    auto source = detail::discounted_family(f, delta);
    auto target = detail::discounted_family(g, delta);
    auto offsets = [&](const Experiment& e) {
        std::vector<std::optional<std::size_t>> full_of_mix;
        std::size_t full = 0;
        for (std::size_t t = 1; t <= e.horizon(); ++t) {
            std::size_t n = e.signal_histories(t).size();
            if (sgn(delta.weight(t)) != 0)
                for (std::size_t i = 0; i < n; ++i) full_of_mix.push_back(full + i);
            full += n;
        }
        return full_of_mix;
    };
    auto src_map = offsets(f), tgt_map = offsets(g);
    std::vector<std::vector<Rational>> matrix(source.outcome_count(), uniform_vector(target.outcome_count()));
    for (std::size_t i = 0; i < src_map.size(); ++i) {
        auto& row = matrix[*src_map[i]];
        std::fill(row.begin(), row.end(), Rational(0));
        for (std::size_t j = 0; j < tgt_map.size(); ++j) row[*tgt_map[j]] = r.gamma[i][j];
    }
    if (!reconstructs(source, target, matrix)) throw std::logic_error("family witness fails the discounted identity");
    v.status = Status::sufficient;
    v.witness.push_back(Garbling{source.outcomes, target.outcomes, std::move(matrix)});
    return v;
}

/// Row-wise combination of two family witnesses at alpha*delta + (1-alpha)*delta_hat.
inline Garbling mix_delta_witnesses(const Experiment& f, const Garbling& w, const DiscountFactor& delta,
                                    const Garbling& w_hat, const DiscountFactor& delta_hat, const Rational& alpha) {
    if (w.from != w_hat.from || w.to != w_hat.to) throw std::invalid_argument("witnesses index different outcomes");
    auto periods = family_row_periods(f);
    if (periods.size() != w.from.size()) throw std::invalid_argument("witness does not match the experiment");
    Garbling out{w.from, w.to, {}};
    for (std::size_t i = 0; i < periods.size(); ++i) {
        Rational a = alpha * delta.weight(periods[i]);
        Rational b = (1 - alpha) * delta_hat.weight(periods[i]);
        Rational total = a + b;
        if (total == 0) {
            out.matrix.push_back(uniform_vector(w.to.size()));
            continue;
        }
        std::vector<Rational> row(w.to.size());
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = (a * w.matrix[i][j] + b * w_hat.matrix[i][j]) / total;
        out.matrix.push_back(std::move(row));
    }
    return out;
}

inline ComparisonVerdict big_delta_sufficient(const Experiment& f, const Experiment& g) {
    detail::require_uncontrolled_pair(f, g);
    auto fl = cumulative_laws(f), gl = cumulative_laws(g);
    ComparisonVerdict v;
    v.route = "LP per period";
    for (std::size_t t = 1; t <= f.horizon(); ++t) {
        auto r = solve_replication(to_joint(fl[t - 1]), to_joint(gl[t - 1]));
        if (!r.feasible) {
            v.status = Status::not_sufficient;
            v.witness.clear();
            r.certificate.failing_period = t;
            detail::attach_problem(r.certificate, {&f, &g, DiscountFactor::degenerate(f.horizon(), t), {}});
            v.certificate = std::move(r.certificate);
            return v;
        }
        Garbling w{fl[t - 1].outcomes, gl[t - 1].outcomes, std::move(r.gamma)};
        if (apply(fl[t - 1], w) != gl[t - 1]) throw std::logic_error("period garbling does not reproduce the target");
        v.witness.push_back(std::move(w));
    }
    v.status = Status::sufficient;
    return v;
}

struct DeltaFamilyReport {
    std::vector<ComparisonVerdict> verdicts;
    /// Set when every degenerate vector was in the list; the equivalence
    /// with period-by-period sufficiency was then asserted.
    std::optional<bool> degenerate_equivalence;
};

inline DeltaFamilyReport delta_sufficient_all(const Experiment& f, const Experiment& g,
                                              const std::vector<DiscountFactor>& deltas, std::size_t jobs = 1) {
    DeltaFamilyReport report;
    report.verdicts.resize(deltas.size());
    parallel_for(deltas.size(), jobs, [&](std::size_t i) { report.verdicts[i] = delta_sufficient(f, g, deltas[i]); });
    bool all_degenerate_present = true, all_degenerate_sufficient = true;
    for (std::size_t t = 1; t <= f.horizon(); ++t) {
        auto d = DiscountFactor::degenerate(f.horizon(), t);
        bool found = false;
        for (std::size_t i = 0; i < deltas.size(); ++i)
            if (deltas[i] == d) {
                found = true;
                if (!report.verdicts[i].sufficient()) all_degenerate_sufficient = false;
                break;
            }
        if (!found) all_degenerate_present = false;
    }
    if (all_degenerate_present) {
        bool big = big_delta_sufficient(f, g).sufficient();
        if (big != all_degenerate_sufficient)
            throw std::logic_error("degenerate-vector verdicts disagree with period-by-period sufficiency");
        report.degenerate_equivalence = true;
    }
    return report;
}

/// Splits a chain Gamma_t(y^t | x^t) into kernels gamma_t(y_t | x^t, y^{t-1});
/// rows with Gamma_{t-1} = 0 get the uniform kernel.
inline std::vector<Garbling> factor_adapted_chain(const Experiment& f, const Experiment& g,
                                                  const std::vector<Garbling>& chain) {
    if (chain.size() != f.horizon()) throw std::invalid_argument("chain length differs from horizon");
    std::vector<Garbling> out;
    for (std::size_t t = 1; t <= f.horizon(); ++t) {
        std::size_t nx = f.signal_histories(t).size();
        std::size_t ny_prev = g.signal_histories(t - 1).size();
        std::size_t wy = g.signals(t).size(), wx = f.signals(t).size();
        Garbling k;
        k.to = g.signals(t);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t yp = 0; yp < ny_prev; ++yp) {
                k.from.push_back(f.signal_label(t, x) + " | " + g.signal_label(t - 1, yp));
                Rational parent = t == 1 ? Rational(1) : chain[t - 2].matrix[x / wx][yp];
                std::vector<Rational> row(wy);
                if (sgn(parent) == 0) {
                    row = uniform_vector(wy);
                } else {
                    for (std::size_t y = 0; y < wy; ++y) row[y] = chain[t - 1].matrix[x][yp * wy + y] / parent;
                }
                k.matrix.push_back(std::move(row));
            }
        out.push_back(std::move(k));
    }
    return out;
}

/// Rebuilds Gamma_t from adapted kernels by multiplying along the chain.
inline std::vector<Garbling> compose_adapted_kernels(const Experiment& f, const Experiment& g,
                                                     const std::vector<Garbling>& kernels) {
    std::vector<Garbling> chain;
    for (std::size_t t = 1; t <= f.horizon(); ++t) {
        std::size_t nx = f.signal_histories(t).size(), ny = g.signal_histories(t).size();
        std::size_t ny_prev = g.signal_histories(t - 1).size();
        std::size_t wy = g.signals(t).size(), wx = f.signals(t).size();
        Garbling c;
        for (std::size_t x = 0; x < nx; ++x) c.from.push_back(f.signal_label(t, x));
        for (std::size_t y = 0; y < ny; ++y) c.to.push_back(g.signal_label(t, y));
        c.matrix.assign(nx, std::vector<Rational>(ny));
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t yp = 0; yp < ny_prev; ++yp) {
                Rational parent = t == 1 ? Rational(1) : chain[t - 2].matrix[x / wx][yp];
                const auto& row = kernels[t - 1].matrix[x * ny_prev + yp];
                for (std::size_t y = 0; y < wy; ++y) c.matrix[x][yp * wy + y] = parent * row[y];
            }
        chain.push_back(std::move(c));
    }
    return chain;
}

inline ComparisonVerdict adapted_sufficient(const Experiment& f, const Experiment& g) {
    detail::require_uncontrolled_pair(f, g);
    std::size_t T = f.horizon(), ns = f.state_count();
    auto fl = cumulative_laws(f), gl = cumulative_laws(g);
    lp::FeasibilityProblem p;
    std::vector<std::size_t> offset(T + 1, 0);
    for (std::size_t t = 1; t <= T; ++t) {
        std::size_t nx = fl[t - 1].outcome_count(), ny = gl[t - 1].outcome_count();
        offset[t] = offset[t - 1] + nx * ny;
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
                p.add_variable("G" + std::to_string(t) + "[" + gl[t - 1].outcomes[y] + "|" + fl[t - 1].outcomes[x] + "]");
    }
    auto var = [&](std::size_t t, std::size_t x, std::size_t y) {
        return offset[t - 1] + x * gl[t - 1].outcome_count() + y;
    };
    for (std::size_t t = 1; t <= T; ++t) {
        std::size_t wx = f.signals(t).size(), wy = g.signals(t).size();
        std::size_t nx_prev = t == 1 ? 1 : fl[t - 2].outcome_count();
        std::size_t ny_prev = t == 1 ? 1 : gl[t - 2].outcome_count();
        for (std::size_t xp = 0; xp < nx_prev; ++xp)
            for (std::size_t xt = 0; xt < wx; ++xt)
                for (std::size_t yp = 0; yp < ny_prev; ++yp) {
                    std::vector<lp::Term> terms;
                    for (std::size_t yt = 0; yt < wy; ++yt) terms.push_back({var(t, xp * wx + xt, yp * wy + yt), 1});
                    if (t == 1) {
                        p.add_equality(std::move(terms), 1, "chain t=1");
                    } else {
                        terms.push_back({var(t - 1, xp, yp), -1});
                        p.add_equality(std::move(terms), 0, "chain t=" + std::to_string(t));
                    }
                }
    }
    for (std::size_t t = 1; t <= T; ++t)
        for (std::size_t y = 0; y < gl[t - 1].outcome_count(); ++y)
            for (std::size_t th = 0; th < ns; ++th) {
                std::vector<lp::Term> terms;
                for (std::size_t x = 0; x < fl[t - 1].outcome_count(); ++x)
                    if (sgn(fl[t - 1].laws[th][x]) != 0) terms.push_back({var(t, x, y), fl[t - 1].laws[th][x]});
                p.add_equality(std::move(terms), gl[t - 1].laws[th][y], "target t=" + std::to_string(t));
            }
    auto result = lp::solve_feasibility(p);
    if (!lp::verify_result(p, result)) throw std::logic_error("LP self-check failed");
    ComparisonVerdict v;
    v.route = "LP on adapted chain";
    if (const auto* w = std::get_if<lp::Witness>(&result)) {
        for (std::size_t t = 1; t <= T; ++t) {
            Garbling c{fl[t - 1].outcomes, gl[t - 1].outcomes, {}};
            for (std::size_t x = 0; x < c.from.size(); ++x) {
                std::vector<Rational> row(c.to.size());
                for (std::size_t y = 0; y < row.size(); ++y) row[y] = w->values[var(t, x, y)];
                c.matrix.push_back(std::move(row));
            }
            if (!c.is_stochastic() || apply(fl[t - 1], c) != gl[t - 1])
                throw std::logic_error("chain does not reproduce the target");
            v.witness.push_back(std::move(c));
        }
        if (compose_adapted_kernels(f, g, factor_adapted_chain(f, g, v.witness)) != v.witness)
            throw std::logic_error("adapted kernels do not rebuild the chain");
        v.status = Status::sufficient;
        return v;
    }
    v.status = Status::not_sufficient;
    Certificate c;
    c.dual = std::get<lp::FarkasCertificate>(result).multipliers;
    for (const auto& row : p.equalities()) c.row_labels.push_back(row.label);
    c.reason = "adapted-chain system infeasible; constrained separating problem not constructed";
    v.certificate = std::move(c);
    return v;
}

}  // namespace expcomp
