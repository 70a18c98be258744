#pragma once

// Worked instances used by the tests, the CLI and the sample data.

#include <string>
#include <utility>
#include <vector>

#include "expcomp/controlled.hpp"
#include "expcomp/core_model.hpp"
#include "expcomp/sequential.hpp"

namespace expcomp::catalog {

/// f is silent, then reveals the state; g is a 7/12-accurate first draw, then silent.
inline std::pair<Experiment, Experiment> delayed_revelation() {
    Experiment f({"theta", "theta'"}, {{"x1"}, {"x2", "x2'"}});
    f.set_kernel(1, 0, 0, {Rational(1)});
    f.set_kernel(1, 1, 0, {Rational(1)});
    f.set_kernel(2, 0, 0, {Rational(1), Rational(0)});
    f.set_kernel(2, 1, 0, {Rational(0), Rational(1)});

    Experiment g({"theta", "theta'"}, {{"y1", "y1'"}, {"y2"}});
    g.set_kernel(1, 0, 0, {Rational(7, 12), Rational(5, 12)});
    g.set_kernel(1, 1, 0, {Rational(5, 12), Rational(7, 12)});
    for (std::size_t y = 0; y < 2; ++y) {
        g.set_kernel(2, 0, y, {Rational(1)});
        g.set_kernel(2, 1, y, {Rational(1)});
    }
    return {f, g};
}

struct ImpatienceParams {
    Rational alpha = Rational(1, 100);  // f reveals in period 1
    Rational beta = 1;                  // f reveals in period 3 if not yet
    Rational chi = Rational(2, 5);      // g reveals in period 2
    Rational epsilon = 0;               // g reveals in period 3 if not yet
};

namespace detail {

// Reveals the state with probability r: "t0" / "t1" name the state, "n" is silent.
inline std::vector<Rational> reveal_row(const Rational& r, std::size_t state) {
    std::vector<Rational> row{1 - r, Rational(0), Rational(0)};
    row[1 + state] = r;
    return row;
}

}  // namespace detail

/// Three-period pair where f is front- and back-loaded and g is middle-loaded.
inline std::pair<Experiment, Experiment> impatience_reversal(const ImpatienceParams& a = {}) {
    const std::vector<std::string> reveal{"n", "t0", "t1"};
    const std::vector<std::string> quiet{"s"};
    Experiment f({"theta0", "theta1"}, {reveal, quiet, reveal});
    Experiment g({"theta0", "theta1"}, {quiet, reveal, reveal});
    for (std::size_t th = 0; th < 2; ++th) {
        f.set_kernel(1, th, 0, detail::reveal_row(a.alpha, th));
        for (std::size_t x = 0; x < 3; ++x) {
            f.set_kernel(2, th, x, {Rational(1)});
            // History (x1, s) has index x1.
            f.set_kernel(3, th, x, detail::reveal_row(x == 0 ? a.beta : Rational(0), th));
        }
        g.set_kernel(1, th, 0, {Rational(1)});
        g.set_kernel(2, th, 0, detail::reveal_row(a.chi, th));
        for (std::size_t y = 0; y < 3; ++y) g.set_kernel(3, th, y, detail::reveal_row(y == 0 ? a.epsilon : Rational(0), th));
    }
    return {f, g};
}

/// Coefficient on the full-information value in the discounted value of f and g.
inline std::pair<Rational, Rational> impatience_coefficients(const ImpatienceParams& a, const DiscountFactor& d) {
    const Rational &d1 = d.weight(1), &d2 = d.weight(2), &d3 = d.weight(3);
    Rational vf = (d1 + d2) * a.alpha + d3 * (a.alpha + (1 - a.alpha) * a.beta);
    Rational vg = (d2 + d3) * a.chi + d3 * (1 - a.chi) * a.epsilon;
    return {vf, vg};
}

/// Two-period experiment that repeats a 3/4-accurate first signal.
inline Experiment repeated_signal() {
    Experiment e({"L", "H"}, {{"l", "h"}, {"l", "h"}});
    e.set_kernel(1, 0, 0, {Rational(3, 4), Rational(1, 4)});
    e.set_kernel(1, 1, 0, {Rational(1, 4), Rational(3, 4)});
    for (std::size_t th = 0; th < 2; ++th) {
        e.set_kernel(2, th, 0, {Rational(1), Rational(0)});
        e.set_kernel(2, th, 1, {Rational(0), Rational(1)});
    }
    return e;
}

inline Coupling repeated_signal_independent() {
    auto e = repeated_signal();
    return independent_coupling(e, e);
}

/// Both streams show the same signal.
inline Coupling repeated_signal_correlated() {
    auto e = repeated_signal();
    Coupling h(e.states(), e.signal_alphabets(), e.signal_alphabets());
    for (std::size_t th = 0; th < 2; ++th) {
        const auto& r = e.kernel(1, th, 0);
        h.set_kernel(1, th, 0, 0, {r[0], Rational(0), Rational(0), r[1]});
        for (std::size_t xp = 0; xp < 2; ++xp)
            for (std::size_t yp = 0; yp < 2; ++yp) {
                // Off-path pairs still need a valid row; they repeat x.
                std::vector<Rational> row(4);
                row[xp * 2 + xp] = 1;
                h.set_kernel(2, th, xp, yp, std::move(row));
            }
    }
    return h;
}

/// Binary-state arrival instance with a two-signal news distribution.
inline ArrivalParams arrival_example(std::vector<Rational> alpha2, std::vector<Rational> beta2, Rational alpha1,
                                     Rational beta1, DiscountFactor delta = DiscountFactor::uniform(2)) {
    ArrivalParams a;
    a.states = {"theta0", "theta1"};
    a.signals = {"z0", "z1"};
    a.h = {{Rational(3, 4), Rational(1, 4)}, {Rational(1, 4), Rational(3, 4)}};
    a.alpha1 = std::move(alpha1);
    a.beta1 = std::move(beta1);
    a.alpha2 = std::move(alpha2);
    a.beta2 = std::move(beta2);
    a.delta = std::move(delta);
    return a;
}

}  // namespace expcomp::catalog
