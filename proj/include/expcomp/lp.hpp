#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "expcomp/rational.hpp"

namespace expcomp::lp {

struct Term {
    std::size_t variable;
    Rational coefficient;
};

struct Equality {
    std::vector<Term> terms;
    Rational rhs;
    std::string label;
};

/// The system {A v = b, v >= 0} over named variables.
class FeasibilityProblem {
public:
    std::size_t add_variable(std::string name) {
        auto [it, inserted] = index_.emplace(name, names_.size());
        if (!inserted) throw std::invalid_argument("duplicate variable '" + name + "'");
        names_.push_back(std::move(name));
        return names_.size() - 1;
    }

    std::optional<std::size_t> find_variable(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Adds a row by variable index; indices are checked when solving.
    std::size_t add_equality(std::vector<Term> terms, Rational rhs, std::string label = {}) {
        rows_.push_back({std::move(terms), std::move(rhs), std::move(label)});
        return rows_.size() - 1;
    }

    /// Adds a row by variable name; unknown names are rejected immediately.
    std::size_t add_equality_named(const std::vector<std::pair<std::string, Rational>>& terms, Rational rhs,
                                   std::string label = {}) {
        std::vector<Term> resolved;
        for (const auto& [name, coef] : terms) {
            auto idx = find_variable(name);
            if (!idx) throw std::invalid_argument("row references undeclared variable '" + name + "'");
            resolved.push_back({*idx, coef});
        }
        return add_equality(std::move(resolved), std::move(rhs), std::move(label));
    }

    std::size_t variable_count() const { return names_.size(); }
    std::size_t equality_count() const { return rows_.size(); }
    const std::string& variable_name(std::size_t i) const { return names_.at(i); }
    const std::vector<Equality>& equalities() const { return rows_; }

    void validate() const {
        for (std::size_t r = 0; r < rows_.size(); ++r)
            for (const auto& term : rows_[r].terms)
                if (term.variable >= names_.size())
                    throw std::invalid_argument("row " + std::to_string(r) + " references undeclared variable #" +
                                                std::to_string(term.variable));
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Equality> rows_;
};

struct Witness {
    std::vector<Rational> values;
};

/// Multipliers y with y^T A <= 0 componentwise and y^T b > 0.
struct FarkasCertificate {
    std::vector<Rational> multipliers;
};

using FeasibilityResult = std::variant<Witness, FarkasCertificate>;

inline bool is_feasible(const FeasibilityResult& r) { return std::holds_alternative<Witness>(r); }

enum class PivotRule {
    bland,
    /// Largest reduced cost, falling back to Bland's rule for good after a
    /// run of degenerate pivots.
    dantzig_then_bland,
};

struct SolverOptions {
    PivotRule rule = PivotRule::bland;
    std::size_t degenerate_run_limit = 50;
};

struct SolveStats {
    std::size_t pivots = 0;
};

namespace detail {

inline std::vector<std::map<std::size_t, Rational>> combined_rows(const FeasibilityProblem& p) {
    std::vector<std::map<std::size_t, Rational>> rows(p.equality_count());
    for (std::size_t r = 0; r < p.equality_count(); ++r) {
        for (const auto& term : p.equalities()[r].terms) rows[r][term.variable] += term.coefficient;
        std::erase_if(rows[r], [](const auto& kv) { return sgn(kv.second) == 0; });
    }
    return rows;
}

}  // namespace detail

/// Phase-one simplex over exact rationals.
inline FeasibilityResult solve_feasibility(const FeasibilityProblem& p, const SolverOptions& options = {},
                                           SolveStats* stats = nullptr) {
    p.validate();
    const std::size_t m = p.equality_count();
    const std::size_t n = p.variable_count();
    const std::size_t cols = n + m;
    auto sparse = detail::combined_rows(p);

    std::vector<std::vector<Rational>> tab(m, std::vector<Rational>(cols));
    std::vector<Rational> rhs(m);
    std::vector<int> sign(m, 1);
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        sign[i] = sgn(p.equalities()[i].rhs) < 0 ? -1 : 1;
        for (const auto& [j, a] : sparse[i]) tab[i][j] = sign[i] < 0 ? Rational(-a) : a;
        rhs[i] = sign[i] < 0 ? Rational(-p.equalities()[i].rhs) : p.equalities()[i].rhs;
        tab[i][n + i] = 1;
        basis[i] = n + i;
    }
    // Reduced costs of the phase-one objective (sum of artificials).
    std::vector<Rational> cost(cols);
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& [j, a] : sparse[i]) cost[j] -= sign[i] < 0 ? Rational(-a) : a;

    bool bland = options.rule == PivotRule::bland;
    std::size_t degenerate_run = 0;
    std::size_t pivots = 0;
    Rational tmp, best_ratio, ratio;
    std::vector<std::size_t> nz;
    nz.reserve(cols);

    while (true) {
        std::size_t enter = cols;
        for (std::size_t j = 0; j < n; ++j) {
            if (sgn(cost[j]) >= 0) continue;
            if (bland) {
                enter = j;
                break;
            }
            if (enter == cols || cost[j] < cost[enter]) enter = j;
        }
        if (enter == cols) break;

        std::size_t leave = m;
        for (std::size_t i = 0; i < m; ++i) {
            if (sgn(tab[i][enter]) <= 0) continue;
            mpq_div(ratio.get_mpq_t(), rhs[i].get_mpq_t(), tab[i][enter].get_mpq_t());
            if (leave == m || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave == m) throw std::logic_error("phase-one simplex: unbounded direction");

        if (!bland) {
            degenerate_run = sgn(best_ratio) == 0 ? degenerate_run + 1 : 0;
            if (degenerate_run > options.degenerate_run_limit) bland = true;
        }

        // Pivot on (leave, enter).
        auto& prow = tab[leave];
        Rational piv = prow[enter];
        nz.clear();
        for (std::size_t k = 0; k < cols; ++k) {
            if (sgn(prow[k]) == 0) continue;
            mpq_div(prow[k].get_mpq_t(), prow[k].get_mpq_t(), piv.get_mpq_t());
            nz.push_back(k);
        }
        mpq_div(rhs[leave].get_mpq_t(), rhs[leave].get_mpq_t(), piv.get_mpq_t());
        for (std::size_t i = 0; i < m; ++i) {
            if (i == leave || sgn(tab[i][enter]) == 0) continue;
            Rational factor = tab[i][enter];
            auto& row = tab[i];
            for (std::size_t k : nz) {
                mpq_mul(tmp.get_mpq_t(), factor.get_mpq_t(), prow[k].get_mpq_t());
                mpq_sub(row[k].get_mpq_t(), row[k].get_mpq_t(), tmp.get_mpq_t());
            }
            mpq_mul(tmp.get_mpq_t(), factor.get_mpq_t(), rhs[leave].get_mpq_t());
            mpq_sub(rhs[i].get_mpq_t(), rhs[i].get_mpq_t(), tmp.get_mpq_t());
        }
        if (sgn(cost[enter]) != 0) {
            Rational factor = cost[enter];
            for (std::size_t k : nz) {
                mpq_mul(tmp.get_mpq_t(), factor.get_mpq_t(), prow[k].get_mpq_t());
                mpq_sub(cost[k].get_mpq_t(), cost[k].get_mpq_t(), tmp.get_mpq_t());
            }
        }
        basis[leave] = enter;
        ++pivots;
    }
    if (stats) stats->pivots = pivots;

    Rational infeasibility = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] >= n) infeasibility += rhs[i];

    if (infeasibility == 0) {
        Witness w{std::vector<Rational>(n)};
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] < n) w.values[basis[i]] = rhs[i];
        return w;
    }
    FarkasCertificate c{std::vector<Rational>(m)};
    for (std::size_t k = 0; k < m; ++k) {
        Rational w = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] >= n) w += tab[i][n + k];
        c.multipliers[k] = sign[k] < 0 ? Rational(-w) : w;
    }
    return c;
}

/// Checks a witness or certificate by direct substitution.
inline bool verify_result(const FeasibilityProblem& p, const FeasibilityResult& r) {
    try {
        p.validate();
    } catch (const std::invalid_argument&) {
        return false;
    }
    const auto& rows = p.equalities();
    if (const auto* w = std::get_if<Witness>(&r)) {
        if (w->values.size() != p.variable_count()) return false;
        for (const auto& v : w->values)
            if (sgn(v) < 0) return false;
        for (const auto& row : rows) {
            Rational lhs = 0;
            for (const auto& t : row.terms) lhs += t.coefficient * w->values[t.variable];
            if (lhs != row.rhs) return false;
        }
        return true;
    }
    const auto& c = std::get<FarkasCertificate>(r);
    if (c.multipliers.size() != rows.size()) return false;
    std::vector<Rational> combo(p.variable_count());
    Rational yb = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (sgn(c.multipliers[i]) == 0) continue;
        for (const auto& t : rows[i].terms) combo[t.variable] += c.multipliers[i] * t.coefficient;
        yb += c.multipliers[i] * rows[i].rhs;
    }
    for (const auto& v : combo)
        if (sgn(v) > 0) return false;
    return sgn(yb) > 0;
}

}  // namespace expcomp::lp
