#pragma once

#include <gmpxx.h>

#include <cctype>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace expcomp {

using Rational = mpq_class;

/// Parses "num/den", a signed integer, or a finite decimal such as "0.125".
/// Decimals are converted exactly (digits over a power of ten).
inline Rational parse_rational(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    std::string s(text);
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c)))
            throw std::invalid_argument("whitespace in rational literal '" + s + "'");
    }
    auto digits_only = [](std::string_view d) {
        if (d.empty()) return false;
        for (char c : d)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    };
    std::string_view body = s;
    bool negative = false;
    if (body.front() == '+' || body.front() == '-') {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    Rational value;
    if (auto slash = body.find('/'); slash != std::string_view::npos) {
        auto num = body.substr(0, slash);
        auto den = body.substr(slash + 1);
        if (!digits_only(num) || !digits_only(den))
            throw std::invalid_argument("malformed rational literal '" + s + "'");
        mpz_class n(std::string(num), 10), d(std::string(den), 10);
        if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
        value = Rational(n, d);
    } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
        auto whole = body.substr(0, dot);
        auto frac = body.substr(dot + 1);
        if ((whole.empty() && frac.empty()) || (!whole.empty() && !digits_only(whole)) ||
            (!frac.empty() && !digits_only(frac)))
            throw std::invalid_argument("malformed decimal literal '" + s + "'");
        std::string all = std::string(whole) + std::string(frac);
        if (all.empty()) all = "0";
        mpz_class n(all, 10), d;
        mpz_ui_pow_ui(d.get_mpz_t(), 10, frac.size());
        value = Rational(n, d);
    } else {
        if (!digits_only(body)) throw std::invalid_argument("malformed rational literal '" + s + "'");
        value = Rational(mpz_class(std::string(body), 10));
    }
    value.canonicalize();
    if (negative) value = -value;
    return value;
}

/// Canonical "num/den" form; integers keep an explicit "/1".
inline std::string to_string(const Rational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline double to_double(const Rational& q) { return q.get_d(); }

inline Rational sum(std::span<const Rational> values) {
    Rational total = 0;
    for (const auto& v : values) total += v;
    return total;
}

inline bool is_probability_vector(std::span<const Rational> values) {
    Rational total = 0;
    for (const auto& v : values) {
        if (sgn(v) < 0) return false;
        total += v;
    }
    return total == 1;
}

inline std::vector<Rational> uniform_vector(std::size_t n) {
    if (n == 0) return {};
    return std::vector<Rational>(n, Rational(1, static_cast<unsigned long>(n)));
}

}  // namespace expcomp
