#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "expcomp/core_model.hpp"
#include "expcomp/parallel.hpp"
#include "expcomp/sufficiency.hpp"
#include "expcomp/verdict.hpp"

namespace expcomp {

/// Joint kernels h_t(x_t, y_t | theta, x^{t-1}, y^{t-1}); a row lists
/// X_t x Y_t with x as the major coordinate.
class Coupling {
public:
    using Row = std::vector<Rational>;

    Coupling() = default;
    Coupling(std::vector<std::string> states, std::vector<std::vector<std::string>> x_signals,
             std::vector<std::vector<std::string>> y_signals)
        : states_(std::move(states)), x_(std::move(x_signals)), y_(std::move(y_signals)) {
        if (x_.empty() || x_.size() != y_.size()) throw std::invalid_argument("coupling horizons must agree and be >= 1");
        rows_.resize(x_.size());
        for (std::size_t t = 1; t <= horizon(); ++t)
            rows_[t - 1].assign(states_.size(), std::vector<std::optional<Row>>(x_histories(t - 1).size() *
                                                                                y_histories(t - 1).size()));
    }

    std::size_t horizon() const { return x_.size(); }
    std::size_t state_count() const { return states_.size(); }
    const std::vector<std::string>& states() const { return states_; }
    const std::vector<std::vector<std::string>>& x_alphabets() const { return x_; }
    const std::vector<std::vector<std::string>>& y_alphabets() const { return y_; }
    const std::vector<std::string>& x_signals(std::size_t t) const { return x_.at(t - 1); }
    const std::vector<std::string>& y_signals(std::size_t t) const { return y_.at(t - 1); }

    ProductSpace x_histories(std::size_t t) const { return histories(x_, t); }
    ProductSpace y_histories(std::size_t t) const { return histories(y_, t); }

    std::size_t prefix_index(std::size_t t, std::size_t x_prefix, std::size_t y_prefix) const {
        return x_prefix * y_histories(t - 1).size() + y_prefix;
    }
    const std::optional<Row>& entry(std::size_t t, std::size_t state, std::size_t x_prefix,
                                    std::size_t y_prefix) const {
        return rows_.at(t - 1).at(state).at(prefix_index(t, x_prefix, y_prefix));
    }
    const Row& kernel(std::size_t t, std::size_t state, std::size_t x_prefix, std::size_t y_prefix) const {
        const auto& e = entry(t, state, x_prefix, y_prefix);
        if (!e) throw std::invalid_argument("missing coupling entry at period " + std::to_string(t));
        return *e;
    }
    void set_kernel(std::size_t t, std::size_t state, std::size_t x_prefix, std::size_t y_prefix, Row row) {
        if (row.size() != x_signals(t).size() * y_signals(t).size())
            throw std::invalid_argument("coupling row has wrong length");
        rows_.at(t - 1).at(state).at(prefix_index(t, x_prefix, y_prefix)) = std::move(row);
    }

    std::string label(const std::vector<std::vector<std::string>>& alphabets, std::size_t t, std::size_t index) const {
        auto d = histories(alphabets, t).digits(index);
        std::vector<std::string> parts;
        for (std::size_t s = 0; s < d.size(); ++s) parts.push_back(alphabets[s][d[s]]);
        return join_labels(parts);
    }
    std::string x_label(std::size_t t, std::size_t index) const { return label(x_, t, index); }
    std::string y_label(std::size_t t, std::size_t index) const { return label(y_, t, index); }

    bool operator==(const Coupling&) const = default;

private:
    static ProductSpace histories(const std::vector<std::vector<std::string>>& alphabets, std::size_t t) {
        std::vector<std::size_t> r;
        for (std::size_t s = 0; s < t; ++s) r.push_back(alphabets[s].size());
        return ProductSpace(std::move(r));
    }

    std::vector<std::string> states_;
    std::vector<std::vector<std::string>> x_, y_;
    std::vector<std::vector<std::vector<std::optional<Row>>>> rows_;
};

inline std::vector<Violation> validate_coupling(const Coupling& h) {
    std::vector<Violation> out;
    for (std::size_t t = 1; t <= h.horizon(); ++t)
        for (std::size_t th = 0; th < h.state_count(); ++th)
            for (std::size_t xp = 0; xp < h.x_histories(t - 1).size(); ++xp)
                for (std::size_t yp = 0; yp < h.y_histories(t - 1).size(); ++yp) {
                    Violation v{t, h.states()[th], h.x_label(t - 1, xp) + " / " + h.y_label(t - 1, yp), ""};
                    const auto& row = h.entry(t, th, xp, yp);
                    if (!row) {
                        v.message = "missing entry";
                    } else if (!is_probability_vector(*row)) {
                        v.message = "row is not a distribution (sums to " + to_string(sum(*row)) + ")";
                    } else {
                        continue;
                    }
                    out.push_back(std::move(v));
                }
    return out;
}

/// h^t(x^t, y^t | theta) for every t, indexed [t-1][theta][x^t][y^t].
inline std::vector<std::vector<std::vector<std::vector<Rational>>>> coupling_joint_laws(const Coupling& h) {
    auto v = validate_coupling(h);
    if (!v.empty()) throw std::invalid_argument("invalid coupling: " + to_string(v.front()));
    std::size_t T = h.horizon(), ns = h.state_count();
    std::vector<std::vector<std::vector<std::vector<Rational>>>> out(T);
    for (std::size_t th = 0; th < ns; ++th) {
        std::vector<std::vector<Rational>> prev{{Rational(1)}};
        for (std::size_t t = 1; t <= T; ++t) {
            std::size_t wx = h.x_signals(t).size(), wy = h.y_signals(t).size();
            std::vector<std::vector<Rational>> next(prev.size() * wx, std::vector<Rational>(prev.front().size() * wy));
            for (std::size_t xp = 0; xp < prev.size(); ++xp)
                for (std::size_t yp = 0; yp < prev[xp].size(); ++yp) {
                    if (sgn(prev[xp][yp]) == 0) continue;
                    const auto& row = h.kernel(t, th, xp, yp);
                    for (std::size_t x = 0; x < wx; ++x)
                        for (std::size_t y = 0; y < wy; ++y)
                            if (sgn(row[x * wy + y]) != 0) next[xp * wx + x][yp * wy + y] = prev[xp][yp] * row[x * wy + y];
                }
            out[t - 1].push_back(next);
            prev = std::move(next);
        }
    }
    return out;
}

/// h_t = f_t x g_t, each signal stream ignoring the other.
inline Coupling independent_coupling(const Experiment& f, const Experiment& g) {
    detail::require_uncontrolled_pair(f, g);
    Coupling h(f.states(), f.signal_alphabets(), g.signal_alphabets());
    for (std::size_t t = 1; t <= f.horizon(); ++t)
        for (std::size_t th = 0; th < f.state_count(); ++th)
            for (std::size_t xp = 0; xp < f.signal_histories(t - 1).size(); ++xp)
                for (std::size_t yp = 0; yp < g.signal_histories(t - 1).size(); ++yp) {
                    const auto& fr = f.kernel(t, th, f.prefix_index(t, xp, 0));
                    const auto& gr = g.kernel(t, th, g.prefix_index(t, yp, 0));
                    Coupling::Row row;
                    for (const auto& a : fr)
                        for (const auto& b : gr) row.push_back(a * b);
                    h.set_kernel(t, th, xp, yp, std::move(row));
                }
    return h;
}

namespace detail {

// Conditional kernels of a cumulative law family; uniform where undefined.
inline Experiment experiment_from_laws(const std::vector<std::string>& states,
                                       const std::vector<std::vector<std::string>>& alphabets,
                                       const std::vector<std::vector<std::vector<Rational>>>& laws) {
    Experiment e(states, alphabets);
    for (std::size_t t = 1; t <= alphabets.size(); ++t) {
        std::size_t width = alphabets[t - 1].size();
        for (std::size_t th = 0; th < states.size(); ++th)
            for (std::size_t p = 0; p < e.signal_histories(t - 1).size(); ++p) {
                Rational den = t == 1 ? Rational(1) : laws[t - 2][th][p];
                std::vector<Rational> row(width);
                if (sgn(den) == 0) {
                    row = uniform_vector(width);
                } else {
                    for (std::size_t x = 0; x < width; ++x) row[x] = laws[t - 1][th][p * width + x] / den;
                }
                e.set_kernel(t, th, p, std::move(row));
            }
    }
    return e;
}

}  // namespace detail

inline Experiment coupling_x_marginal(const Coupling& h) {
    auto joint = coupling_joint_laws(h);
    std::vector<std::vector<std::vector<Rational>>> laws(h.horizon());
    for (std::size_t t = 1; t <= h.horizon(); ++t)
        for (std::size_t th = 0; th < h.state_count(); ++th) {
            std::vector<Rational> m(h.x_histories(t).size());
            for (std::size_t x = 0; x < m.size(); ++x) m[x] = sum(joint[t - 1][th][x]);
            laws[t - 1].push_back(std::move(m));
        }
    return detail::experiment_from_laws(h.states(), h.x_alphabets(), laws);
}

inline Experiment coupling_y_marginal(const Coupling& h) {
    auto joint = coupling_joint_laws(h);
    std::vector<std::vector<std::vector<Rational>>> laws(h.horizon());
    for (std::size_t t = 1; t <= h.horizon(); ++t)
        for (std::size_t th = 0; th < h.state_count(); ++th) {
            std::vector<Rational> m(h.y_histories(t).size());
            for (const auto& row : joint[t - 1][th])
                for (std::size_t y = 0; y < m.size(); ++y) m[y] += row[y];
            laws[t - 1].push_back(std::move(m));
        }
    return detail::experiment_from_laws(h.states(), h.y_alphabets(), laws);
}

/// Cells where the coupling's signal processes differ from f and g.
inline std::vector<Violation> check_coupling_marginals(const Coupling& h, const Experiment& f, const Experiment& g) {
    if (f.states() != h.states() || g.states() != h.states()) return {{0, "", "", "state labels differ"}};
    if (f.signal_alphabets() != h.x_alphabets()) return {{0, "", "", "x alphabets differ from f"}};
    if (g.signal_alphabets() != h.y_alphabets()) return {{0, "", "", "y alphabets differ from g"}};
    auto hx = cumulative_laws(coupling_x_marginal(h)), hy = cumulative_laws(coupling_y_marginal(h));
    auto fl = cumulative_laws(f), gl = cumulative_laws(g);
    std::vector<Violation> out;
    auto compare = [&](const std::vector<StaticExperiment>& a, const std::vector<StaticExperiment>& b, const char* side) {
        for (std::size_t t = 1; t <= h.horizon(); ++t)
            for (std::size_t th = 0; th < h.state_count(); ++th)
                for (std::size_t o = 0; o < a[t - 1].outcome_count(); ++o)
                    if (a[t - 1].laws[th][o] != b[t - 1].laws[th][o])
                        out.push_back({t, h.states()[th], a[t - 1].outcomes[o],
                                       std::string(side) + "-marginal " + to_string(a[t - 1].laws[th][o]) +
                                           " differs from declared " + to_string(b[t - 1].laws[th][o])});
    };
    compare(hx, fl, "x");
    compare(hy, gl, "y");
    return out;
}

struct SequentialRow {
    std::size_t period = 0;  // length of the history x^t
    std::string history;
    std::vector<std::string> states;  // Theta[x^t]
    bool evaluated = false;
    ComparisonVerdict verdict;
    std::string note;
};

struct SequentialReport {
    ComparisonVerdict overall;
    std::vector<SequentialRow> rows;
};

/// Continuation experiments f[x^t], g[x^t] over periods t+1..T restricted to
/// the states under which x^t has positive probability.
inline std::pair<Experiment, Experiment> continuation_experiments(
    const Coupling& h, const std::vector<std::vector<std::vector<std::vector<Rational>>>>& joint, std::size_t t,
    std::size_t x_index, const std::vector<std::size_t>& states) {
    std::size_t T = h.horizon();
    std::vector<std::string> labels;
    for (auto th : states) labels.push_back(h.states()[th]);
    std::vector<std::vector<std::string>> xa(h.x_alphabets().begin() + static_cast<std::ptrdiff_t>(t), h.x_alphabets().end());
    std::vector<std::vector<std::string>> ya(h.y_alphabets().begin() + static_cast<std::ptrdiff_t>(t), h.y_alphabets().end());
    std::vector<std::vector<std::vector<Rational>>> fl(T - t), gl(T - t);
    for (std::size_t r = t + 1; r <= T; ++r) {
        std::size_t x_tail = h.x_histories(r).size() / h.x_histories(t).size();
        std::size_t y_tail = h.y_histories(r).size() / h.y_histories(t).size();
        for (auto th : states) {
            const auto& jr = joint[r - 1][th];
            std::vector<Rational> fx(x_tail), gy(y_tail);
            Rational mass = 0;
            for (std::size_t xs = 0; xs < x_tail; ++xs) {
                const auto& row = jr[x_index * x_tail + xs];
                for (std::size_t y = 0; y < row.size(); ++y) {
                    if (sgn(row[y]) == 0) continue;
                    fx[xs] += row[y];
                    gy[y % y_tail] += row[y];
                    mass += row[y];
                }
            }
            for (auto& q : fx) q /= mass;
            for (auto& q : gy) q /= mass;
            fl[r - t - 1].push_back(std::move(fx));
            gl[r - t - 1].push_back(std::move(gy));
        }
    }
    return {detail::experiment_from_laws(labels, xa, fl), detail::experiment_from_laws(labels, ya, gl)};
}

inline SequentialReport sequential_most_valuable(const Coupling& h, const DiscountFactor& delta, std::size_t jobs = 1) {
    if (delta.horizon() != h.horizon()) throw std::invalid_argument("horizon mismatch between coupling and discount");
    auto joint = coupling_joint_laws(h);
    std::size_t T = h.horizon();
    SequentialReport report;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t x = 0; x < h.x_histories(t).size(); ++x) {
            SequentialRow row;
            row.period = t;
            row.history = h.x_label(t, x);
            report.rows.push_back(std::move(row));
        }
    // Row order matches the loop above, so the row index recovers (t, x).
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t x = 0; x < h.x_histories(t).size(); ++x) keys.emplace_back(t, x);

    parallel_for(keys.size(), jobs, [&](std::size_t i) {
        auto [t, x] = keys[i];
        auto& row = report.rows[i];
        std::vector<std::size_t> support;
        for (std::size_t th = 0; th < h.state_count(); ++th) {
            Rational mass = t == 0 ? Rational(1) : Rational(0);
            if (t > 0)
                for (const auto& q : joint[t - 1][th][x]) mass += q;
            if (sgn(mass) > 0) support.push_back(th);
        }
        for (auto th : support) row.states.push_back(h.states()[th]);
        if (support.empty()) {
            row.note = "not evaluated";
            return;
        }
        row.evaluated = true;
        auto tail = delta.tail_after(t);
        if (!tail) {
            row.verdict.status = Status::sufficient;
            row.verdict.route = "no remaining discount weight";
            row.note = "no remaining discount weight";
            return;
        }
        auto [fc, gc] = continuation_experiments(h, joint, t, x, support);
        row.verdict = delta_sufficient(fc, gc, *tail);
    });

    report.overall.status = Status::sufficient;
    report.overall.route = "continuation comparisons";
    for (const auto& row : report.rows) {
        if (!row.evaluated || row.verdict.sufficient()) continue;
        report.overall.status = Status::not_sufficient;
        report.overall.certificate = row.verdict.certificate;
        report.overall.notes.push_back("first failing history: period " + std::to_string(row.period) + " [" +
                                       row.history + "]");
        break;
    }
    return report;
}

}  // namespace expcomp
