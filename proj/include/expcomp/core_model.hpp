#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "expcomp/rational.hpp"

namespace expcomp {

/// Mixed-radix enumeration of a finite product set; the first coordinate is
/// the most significant, so indices follow lexicographic order.
class ProductSpace {
public:
    ProductSpace() = default;
    explicit ProductSpace(std::vector<std::size_t> radices) : radices_(std::move(radices)) {
        size_ = 1;
        for (auto r : radices_) size_ *= r;
    }

    std::size_t size() const { return size_; }
    std::size_t dimension() const { return radices_.size(); }
    const std::vector<std::size_t>& radices() const { return radices_; }

    std::size_t index(std::span<const std::size_t> digits) const {
        if (digits.size() != radices_.size())
            throw std::invalid_argument("product index: wrong number of coordinates");
        std::size_t idx = 0;
        for (std::size_t i = 0; i < digits.size(); ++i) {
            if (digits[i] >= radices_[i]) throw std::out_of_range("product index: coordinate out of range");
            idx = idx * radices_[i] + digits[i];
        }
        return idx;
    }

    std::vector<std::size_t> digits(std::size_t index) const {
        std::vector<std::size_t> out(radices_.size());
        for (std::size_t i = radices_.size(); i-- > 0;) {
            out[i] = index % radices_[i];
            index /= radices_[i];
        }
        return out;
    }

private:
    std::vector<std::size_t> radices_;
    std::size_t size_ = 1;
};

struct StateSpace {
    std::vector<std::string> labels;
    std::optional<std::vector<Rational>> prior;

    std::size_t size() const { return labels.size(); }

    void validate() const {
        if (labels.empty()) throw std::invalid_argument("state space is empty");
        std::set<std::string> seen(labels.begin(), labels.end());
        if (seen.size() != labels.size()) throw std::invalid_argument("duplicate state labels");
        if (prior) {
            if (prior->size() != labels.size()) throw std::invalid_argument("prior has wrong length");
            for (const auto& p : *prior)
                if (sgn(p) <= 0) throw std::invalid_argument("prior must have full support");
            if (sum(*prior) != 1) throw std::invalid_argument("prior does not sum to 1");
        }
    }

    std::vector<Rational> prior_or_uniform() const { return prior ? *prior : uniform_vector(labels.size()); }
};

inline void require_full_support_prior(std::span<const Rational> prior, std::size_t states) {
    if (prior.size() != states) throw std::invalid_argument("prior has wrong length");
    for (const auto& p : prior)
        if (sgn(p) <= 0) throw std::invalid_argument("prior must have full support");
    if (sum(prior) != 1) throw std::invalid_argument("prior does not sum to 1");
}

class DiscountFactor {
public:
    explicit DiscountFactor(std::vector<Rational> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw std::invalid_argument("discount factor needs at least one period");
        if (!is_probability_vector(weights_))
            throw std::invalid_argument("discount weights must be nonnegative and sum to 1");
    }

    static DiscountFactor uniform(std::size_t horizon) { return DiscountFactor(uniform_vector(horizon)); }

    /// Point mass on period t (1-based).
    static DiscountFactor degenerate(std::size_t horizon, std::size_t t) {
        if (t < 1 || t > horizon) throw std::invalid_argument("degenerate period out of range");
        std::vector<Rational> w(horizon, Rational(0));
        w[t - 1] = 1;
        return DiscountFactor(std::move(w));
    }

    /// Weights proportional to r^t, normalized over the finite horizon.
    static DiscountFactor geometric(const Rational& r, std::size_t horizon) {
        if (sgn(r) <= 0) throw std::invalid_argument("geometric ratio must be positive");
        if (horizon == 0) throw std::invalid_argument("discount factor needs at least one period");
        std::vector<Rational> w(horizon);
        Rational power = r, total = 0;
        for (auto& x : w) {
            x = power;
            total += power;
            power *= r;
        }
        for (auto& x : w) x /= total;
        return DiscountFactor(std::move(w));
    }

    /// alpha * a + (1 - alpha) * b.
    static DiscountFactor mix(const DiscountFactor& a, const DiscountFactor& b, const Rational& alpha) {
        if (a.horizon() != b.horizon()) throw std::invalid_argument("mixing discount factors of different horizons");
        std::vector<Rational> w(a.horizon());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = alpha * a.weights_[i] + (1 - alpha) * b.weights_[i];
        return DiscountFactor(std::move(w));
    }

    std::size_t horizon() const { return weights_.size(); }
    const std::vector<Rational>& weights() const { return weights_; }
    /// Weight of period t (1-based).
    const Rational& weight(std::size_t t) const { return weights_.at(t - 1); }

    /// Renormalized weights of periods t+1..T, or nullopt when that tail has no mass.
    std::optional<DiscountFactor> tail_after(std::size_t t) const {
        if (t >= horizon()) return std::nullopt;
        std::vector<Rational> w(weights_.begin() + static_cast<std::ptrdiff_t>(t), weights_.end());
        Rational total = sum(w);
        if (total == 0) return std::nullopt;
        for (auto& x : w) x /= total;
        return DiscountFactor(std::move(w));
    }

    bool operator==(const DiscountFactor& other) const { return weights_ == other.weights_; }

private:
    std::vector<Rational> weights_;
};

struct Violation {
    std::size_t period = 0;
    std::string state;
    std::string history;
    std::string message;
};

inline std::string to_string(const Violation& v) {
    std::string out = "period " + std::to_string(v.period);
    if (!v.state.empty()) out += ", state " + v.state;
    if (!v.history.empty() || v.period > 0) out += ", history [" + v.history + "]";
    return out + ": " + v.message;
}

inline std::string join_labels(const std::vector<std::string>& parts, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

/// Multi-period experiment with per-period signal kernels
/// f_t(x_t | theta, x^{t-1}, k^{t-1}). Periods are 1-based in the API.
/// Control alphabets K_1..K_{T-1} are stored; the control chosen after the
/// last period never influences a signal.
class Experiment {
public:
    using Row = std::vector<Rational>;

    Experiment() = default;

    Experiment(std::vector<std::string> states, std::vector<std::vector<std::string>> signals,
               std::vector<std::vector<std::string>> controls = {})
        : states_(std::move(states)), signals_(std::move(signals)), controls_(std::move(controls)) {
        if (signals_.empty()) throw std::invalid_argument("experiment horizon must be at least 1");
        if (controls_.empty()) controls_.assign(signals_.size() - 1, std::vector<std::string>{"k0"});
        if (controls_.size() != signals_.size() - 1)
            throw std::invalid_argument("controls must list one alphabet for each of periods 1..T-1");
        rows_.resize(signals_.size());
        for (std::size_t t = 1; t <= horizon(); ++t)
            rows_[t - 1].assign(states_.size(), std::vector<std::optional<Row>>(prefix_count(t)));
    }

    std::size_t horizon() const { return signals_.size(); }
    std::size_t state_count() const { return states_.size(); }
    const std::vector<std::string>& states() const { return states_; }
    const std::vector<std::vector<std::string>>& signal_alphabets() const { return signals_; }
    const std::vector<std::vector<std::string>>& control_alphabets() const { return controls_; }
    const std::vector<std::string>& signals(std::size_t t) const { return signals_.at(t - 1); }
    /// Control alphabet K_t for 1 <= t <= T-1.
    const std::vector<std::string>& controls(std::size_t t) const { return controls_.at(t - 1); }

    bool is_controlled() const {
        return std::any_of(controls_.begin(), controls_.end(), [](const auto& k) { return k.size() != 1; });
    }

    /// X_1 x ... x X_t.
    ProductSpace signal_histories(std::size_t t) const {
        std::vector<std::size_t> r;
        for (std::size_t s = 1; s <= t; ++s) r.push_back(signals(s).size());
        return ProductSpace(std::move(r));
    }
    /// K_1 x ... x K_t.
    ProductSpace control_histories(std::size_t t) const {
        std::vector<std::size_t> r;
        for (std::size_t s = 1; s <= t; ++s) r.push_back(controls(s).size());
        return ProductSpace(std::move(r));
    }
    std::size_t prefix_count(std::size_t t) const {
        return signal_histories(t - 1).size() * control_histories(t - 1).size();
    }
    std::size_t prefix_index(std::size_t t, std::span<const std::size_t> xs, std::span<const std::size_t> ks) const {
        return signal_histories(t - 1).index(xs) * control_histories(t - 1).size() + control_histories(t - 1).index(ks);
    }
    std::size_t prefix_index(std::size_t t, std::size_t signal_index, std::size_t control_index) const {
        return signal_index * control_histories(t - 1).size() + control_index;
    }

    const std::optional<Row>& entry(std::size_t t, std::size_t state, std::size_t prefix) const {
        return rows_.at(t - 1).at(state).at(prefix);
    }

    const Row& kernel(std::size_t t, std::size_t state, std::size_t prefix) const {
        const auto& e = entry(t, state, prefix);
        if (!e) throw std::invalid_argument("missing kernel entry at period " + std::to_string(t) + ", state " +
                                            states_.at(state));
        return *e;
    }
    const Row& kernel(std::size_t t, std::size_t state, std::span<const std::size_t> xs,
                      std::span<const std::size_t> ks = {}) const {
        return kernel(t, state, prefix_index(t, xs, ks));
    }

    void set_kernel(std::size_t t, std::size_t state, std::size_t prefix, Row row) {
        if (row.size() != signals(t).size()) throw std::invalid_argument("kernel row has wrong length");
        rows_.at(t - 1).at(state).at(prefix) = std::move(row);
    }
    void set_kernel(std::size_t t, std::size_t state, std::span<const std::size_t> xs,
                    std::span<const std::size_t> ks, Row row) {
        set_kernel(t, state, prefix_index(t, xs, ks), std::move(row));
    }
    /// Sets the same row for every control history.
    void set_kernel_all_controls(std::size_t t, std::size_t state, std::size_t signal_index, const Row& row) {
        for (std::size_t c = 0; c < control_histories(t - 1).size(); ++c)
            set_kernel(t, state, prefix_index(t, signal_index, c), row);
    }
    void clear_kernel(std::size_t t, std::size_t state, std::size_t prefix) {
        rows_.at(t - 1).at(state).at(prefix).reset();
    }

    std::string signal_label(std::size_t t, std::size_t signal_index) const {
        auto d = signal_histories(t).digits(signal_index);
        std::vector<std::string> parts;
        for (std::size_t s = 0; s < d.size(); ++s) parts.push_back(signals(s + 1)[d[s]]);
        return join_labels(parts);
    }
    std::string control_label(std::size_t t, std::size_t control_index) const {
        auto d = control_histories(t).digits(control_index);
        std::vector<std::string> parts;
        for (std::size_t s = 0; s < d.size(); ++s) parts.push_back(controls(s + 1)[d[s]]);
        return join_labels(parts);
    }
    std::string prefix_label(std::size_t t, std::size_t prefix) const {
        std::size_t kc = control_histories(t - 1).size();
        std::string out = signal_label(t - 1, prefix / kc);
        if (is_controlled() && t > 1) out += " | " + control_label(t - 1, prefix % kc);
        return out;
    }

    bool operator==(const Experiment& o) const {
        return states_ == o.states_ && signals_ == o.signals_ && controls_ == o.controls_ && rows_ == o.rows_;
    }

private:
    std::vector<std::string> states_;
    std::vector<std::vector<std::string>> signals_;
    std::vector<std::vector<std::string>> controls_;
    std::vector<std::vector<std::vector<std::optional<Row>>>> rows_;
};

inline std::vector<Violation> validate_experiment(const Experiment& e) {
    std::vector<Violation> out;
    if (e.state_count() == 0) out.push_back({0, "", "", "no states"});
    std::set<std::string> seen(e.states().begin(), e.states().end());
    if (seen.size() != e.state_count()) out.push_back({0, "", "", "duplicate state labels"});
    for (std::size_t t = 1; t <= e.horizon(); ++t) {
        const auto& alphabet = e.signals(t);
        if (alphabet.empty()) out.push_back({t, "", "", "empty signal alphabet"});
        if (std::set<std::string>(alphabet.begin(), alphabet.end()).size() != alphabet.size())
            out.push_back({t, "", "", "duplicate signal labels"});
        if (t < e.horizon()) {
            const auto& ks = e.controls(t);
            if (ks.empty()) out.push_back({t, "", "", "empty control alphabet"});
            if (std::set<std::string>(ks.begin(), ks.end()).size() != ks.size())
                out.push_back({t, "", "", "duplicate control labels"});
        }
    }
    if (!out.empty()) return out;
    for (std::size_t t = 1; t <= e.horizon(); ++t) {
        for (std::size_t th = 0; th < e.state_count(); ++th) {
            for (std::size_t p = 0; p < e.prefix_count(t); ++p) {
                const auto& row = e.entry(t, th, p);
                Violation v{t, e.states()[th], e.prefix_label(t, p), ""};
                if (!row) {
                    v.message = "missing entry";
                    out.push_back(v);
                    continue;
                }
                if (row->size() != e.signals(t).size()) {
                    v.message = "row has " + std::to_string(row->size()) + " entries, expected " +
                                std::to_string(e.signals(t).size());
                    out.push_back(v);
                    continue;
                }
                bool negative = std::any_of(row->begin(), row->end(), [](const Rational& q) { return sgn(q) < 0; });
                if (negative) {
                    v.message = "negative probability";
                    out.push_back(v);
                }
                Rational total = sum(*row);
                if (total != 1) {
                    v.message = "row sums to " + to_string(total);
                    out.push_back(v);
                }
            }
        }
    }
    return out;
}

/// Signal history x^t together with the control history k^{t-1}.
struct History {
    std::size_t period = 0;
    std::vector<std::size_t> signals;
    std::vector<std::size_t> controls;
};

inline bool is_valid_history(const Experiment& e, const History& h) {
    if (h.period < 1 || h.period > e.horizon()) return false;
    if (h.signals.size() != h.period || h.controls.size() != h.period - 1) return false;
    for (std::size_t s = 0; s < h.signals.size(); ++s)
        if (h.signals[s] >= e.signals(s + 1).size()) return false;
    for (std::size_t s = 0; s < h.controls.size(); ++s)
        if (h.controls[s] >= e.controls(s + 1).size()) return false;
    return true;
}

inline void require_valid(const Experiment& e) {
    auto v = validate_experiment(e);
    if (!v.empty()) throw std::invalid_argument("invalid experiment: " + to_string(v.front()));
}

/// A state-indexed family of distributions over a common outcome list.
struct StaticExperiment {
    std::vector<std::string> outcomes;
    std::vector<std::vector<Rational>> laws;  // laws[state][outcome]

    std::size_t state_count() const { return laws.size(); }
    std::size_t outcome_count() const { return outcomes.size(); }

    void validate() const {
        if (laws.empty()) throw std::invalid_argument("static experiment without states");
        for (const auto& law : laws) {
            if (law.size() != outcomes.size()) throw std::invalid_argument("law length differs from outcome list");
            if (!is_probability_vector(law)) throw std::invalid_argument("law is not a probability vector");
        }
    }

    bool operator==(const StaticExperiment&) const = default;
};

struct Garbling {
    std::vector<std::string> from;
    std::vector<std::string> to;
    std::vector<std::vector<Rational>> matrix;  // matrix[from][to]

    bool is_stochastic() const {
        if (matrix.size() != from.size()) return false;
        for (const auto& row : matrix)
            if (row.size() != to.size() || !is_probability_vector(row)) return false;
        return true;
    }

    bool operator==(const Garbling&) const = default;
};

inline Garbling identity_garbling(const std::vector<std::string>& outcomes) {
    Garbling g{outcomes, outcomes, {}};
    g.matrix.assign(outcomes.size(), std::vector<Rational>(outcomes.size(), Rational(0)));
    for (std::size_t i = 0; i < outcomes.size(); ++i) g.matrix[i][i] = 1;
    return g;
}

/// Applies `first` and then `second`.
inline Garbling compose(const Garbling& first, const Garbling& second) {
    if (first.to.size() != second.from.size()) throw std::invalid_argument("garbling composition shape mismatch");
    Garbling out{first.from, second.to, {}};
    out.matrix.assign(first.from.size(), std::vector<Rational>(second.to.size(), Rational(0)));
    for (std::size_t i = 0; i < first.from.size(); ++i)
        for (std::size_t j = 0; j < first.to.size(); ++j) {
            if (sgn(first.matrix[i][j]) == 0) continue;
            for (std::size_t k = 0; k < second.to.size(); ++k)
                out.matrix[i][k] += first.matrix[i][j] * second.matrix[j][k];
        }
    return out;
}

inline StaticExperiment apply(const StaticExperiment& s, const Garbling& g) {
    if (g.from.size() != s.outcomes.size()) throw std::invalid_argument("garbling does not match outcomes");
    StaticExperiment out{g.to, {}};
    for (const auto& law : s.laws) {
        std::vector<Rational> image(g.to.size(), Rational(0));
        for (std::size_t x = 0; x < law.size(); ++x) {
            if (sgn(law[x]) == 0) continue;
            for (std::size_t y = 0; y < g.to.size(); ++y) image[y] += law[x] * g.matrix[x][y];
        }
        out.laws.push_back(std::move(image));
    }
    return out;
}

struct PosteriorPoint {
    std::vector<Rational> posterior;
    Rational probability;
    bool operator==(const PosteriorPoint&) const = default;
};

struct PosteriorDistribution {
    std::vector<PosteriorPoint> support;  // sorted lexicographically by posterior

    std::vector<Rational> barycenter() const {
        if (support.empty()) return {};
        std::vector<Rational> b(support.front().posterior.size(), Rational(0));
        for (const auto& p : support)
            for (std::size_t i = 0; i < b.size(); ++i) b[i] += p.probability * p.posterior[i];
        return b;
    }

    void validate() const {
        Rational total = 0;
        for (const auto& p : support) {
            if (sgn(p.probability) < 0 || !is_probability_vector(p.posterior))
                throw std::invalid_argument("malformed posterior distribution");
            total += p.probability;
        }
        if (total != 1) throw std::invalid_argument("posterior probabilities do not sum to 1");
    }

    bool operator==(const PosteriorDistribution&) const = default;
};

/// Laws of X^1..X^T for an uncontrolled experiment, computed incrementally.
inline std::vector<StaticExperiment> cumulative_laws(const Experiment& e) {
    if (e.is_controlled()) throw std::invalid_argument("cumulative laws need an uncontrolled experiment");
    require_valid(e);
    std::vector<StaticExperiment> out;
    std::vector<std::vector<Rational>> previous(e.state_count(), std::vector<Rational>{Rational(1)});
    for (std::size_t t = 1; t <= e.horizon(); ++t) {
        StaticExperiment s;
        std::size_t width = e.signals(t).size();
        std::size_t count = e.signal_histories(t).size();
        s.outcomes.reserve(count);
        for (std::size_t i = 0; i < count; ++i) s.outcomes.push_back(e.signal_label(t, i));
        for (std::size_t th = 0; th < e.state_count(); ++th) {
            std::vector<Rational> law(count);
            for (std::size_t p = 0; p < previous[th].size(); ++p) {
                const auto& row = e.kernel(t, th, e.prefix_index(t, p, 0));
                for (std::size_t x = 0; x < width; ++x) law[p * width + x] = previous[th][p] * row[x];
            }
            s.laws.push_back(std::move(law));
        }
        previous = s.laws;
        out.push_back(std::move(s));
    }
    return out;
}

inline StaticExperiment cumulative_law(const Experiment& e, std::size_t t) {
    if (t < 1 || t > e.horizon()) throw std::invalid_argument("period out of range");
    auto all = cumulative_laws(e);
    return all[t - 1];
}

inline std::string mixture_label(std::size_t t, const std::string& history) {
    return std::to_string(t) + ":" + history;
}

/// Combines per-period laws into sum_t delta_t * law_t over tagged outcomes,
/// dropping periods with zero weight.
inline StaticExperiment mix_periods(const std::vector<StaticExperiment>& per_period, const DiscountFactor& delta) {
    if (per_period.size() != delta.horizon()) throw std::invalid_argument("horizon mismatch between laws and discount");
    StaticExperiment out;
    std::size_t states = per_period.front().state_count();
    out.laws.assign(states, {});
    for (std::size_t t = 1; t <= per_period.size(); ++t) {
        const auto& w = delta.weight(t);
        if (sgn(w) == 0) continue;
        const auto& s = per_period[t - 1];
        if (s.state_count() != states) throw std::invalid_argument("state count differs across periods");
        for (const auto& o : s.outcomes) out.outcomes.push_back(mixture_label(t, o));
        for (std::size_t th = 0; th < states; ++th)
            for (const auto& p : s.laws[th]) out.laws[th].push_back(w * p);
    }
    return out;
}

inline StaticExperiment mixture_experiment(const Experiment& e, const DiscountFactor& delta) {
    if (e.is_controlled()) throw std::invalid_argument("mixture experiment needs an uncontrolled experiment");
    if (delta.horizon() != e.horizon()) throw std::invalid_argument("horizon mismatch between experiment and discount");
    return mix_periods(cumulative_laws(e), delta);
}

/// Bayes posteriors per outcome; zero-marginal outcomes omitted, equal posteriors merged.
inline PosteriorDistribution posterior_distribution(const StaticExperiment& s, std::span<const Rational> prior) {
    require_full_support_prior(prior, s.state_count());
    std::map<std::vector<Rational>, Rational> merged;
    for (std::size_t o = 0; o < s.outcome_count(); ++o) {
        Rational marginal = 0;
        for (std::size_t th = 0; th < s.state_count(); ++th) marginal += prior[th] * s.laws[th][o];
        if (sgn(marginal) == 0) continue;
        std::vector<Rational> post(s.state_count());
        for (std::size_t th = 0; th < s.state_count(); ++th) post[th] = prior[th] * s.laws[th][o] / marginal;
        merged[post] += marginal;
    }
    PosteriorDistribution d;
    for (auto& [post, prob] : merged) d.support.push_back({post, prob});
    return d;
}

/// Merges outcomes whose likelihood vectors are proportional (a Blackwell
/// equivalent reduction) and drops outcomes that have probability zero in
/// every state. Merged labels are joined with '+'.
inline StaticExperiment merge_proportional_outcomes(const StaticExperiment& s) {
    std::map<std::vector<Rational>, std::size_t> by_direction;
    StaticExperiment out;
    out.laws.assign(s.state_count(), {});
    for (std::size_t o = 0; o < s.outcome_count(); ++o) {
        std::vector<Rational> column(s.state_count());
        Rational total = 0;
        for (std::size_t th = 0; th < s.state_count(); ++th) {
            column[th] = s.laws[th][o];
            total += column[th];
        }
        if (total == 0) continue;
        for (auto& c : column) c /= total;
        auto [it, inserted] = by_direction.emplace(column, out.outcomes.size());
        if (inserted) {
            out.outcomes.push_back(s.outcomes[o]);
            for (std::size_t th = 0; th < s.state_count(); ++th) out.laws[th].push_back(s.laws[th][o]);
        } else {
            out.outcomes[it->second] += "+" + s.outcomes[o];
            for (std::size_t th = 0; th < s.state_count(); ++th) out.laws[th][it->second] += s.laws[th][o];
        }
    }
    return out;
}

/// Wraps a static experiment as a one-period experiment.
inline Experiment as_one_period(const StaticExperiment& s, const std::vector<std::string>& states) {
    if (states.size() != s.state_count()) throw std::invalid_argument("state labels do not match laws");
    Experiment e(states, {s.outcomes});
    for (std::size_t th = 0; th < states.size(); ++th) e.set_kernel(1, th, 0, s.laws[th]);
    return e;
}

}  // namespace expcomp
