#pragma once

// Random instances for property tests.

#include <random>
#include <string>
#include <vector>

#include "expcomp/core_model.hpp"
#include "oracles.hpp"

namespace gen {

using expcomp::Experiment;
using expcomp::Rational;

inline std::vector<std::string> labels(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

/// Kernels may depend on the whole signal history.
inline Experiment experiment(std::mt19937_64& rng, std::size_t states, const std::vector<std::size_t>& widths,
                             long den = 6) {
    std::vector<std::vector<std::string>> signals;
    for (auto w : widths) signals.push_back(labels("x", w));
    Experiment e(labels("s", states), signals);
    for (std::size_t t = 1; t <= widths.size(); ++t)
        for (std::size_t th = 0; th < states; ++th)
            for (std::size_t p = 0; p < e.prefix_count(t); ++p) e.set_kernel(t, th, p, oracle::random_row(rng, widths[t - 1], den));
    return e;
}

/// Kernels ignore the signal history: rows[t-1][state].
inline Experiment iid(const std::vector<std::vector<std::vector<Rational>>>& rows, const std::string& prefix = "x") {
    std::vector<std::vector<std::string>> signals;
    for (const auto& period : rows) signals.push_back(labels(prefix, period.front().size()));
    Experiment e(labels("s", rows.front().size()), signals);
    for (std::size_t t = 1; t <= rows.size(); ++t)
        for (std::size_t th = 0; th < rows[t - 1].size(); ++th)
            for (std::size_t p = 0; p < e.prefix_count(t); ++p) e.set_kernel(t, th, p, rows[t - 1][th]);
    return e;
}

inline std::vector<std::vector<std::vector<Rational>>> random_iid_rows(std::mt19937_64& rng, std::size_t states,
                                                                      const std::vector<std::size_t>& widths) {
    std::vector<std::vector<std::vector<Rational>>> rows;
    for (auto w : widths) {
        std::vector<std::vector<Rational>> period;
        for (std::size_t th = 0; th < states; ++th) period.push_back(oracle::random_row(rng, w));
        rows.push_back(period);
    }
    return rows;
}

/// Passes each period's signal through its own random channel. The result
/// is dominated by the source in every sense tested here.
inline std::vector<std::vector<std::vector<Rational>>> garble_rows(std::mt19937_64& rng,
                                                                  const std::vector<std::vector<std::vector<Rational>>>& rows,
                                                                  std::size_t out_width) {
    std::vector<std::vector<std::vector<Rational>>> out;
    for (const auto& period : rows) {
        std::size_t w = period.front().size();
        std::vector<std::vector<Rational>> channel;
        for (std::size_t x = 0; x < w; ++x) channel.push_back(oracle::random_row(rng, out_width));
        std::vector<std::vector<Rational>> next;
        for (const auto& row : period) {
            std::vector<Rational> y(out_width);
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t k = 0; k < out_width; ++k) y[k] += row[x] * channel[x][k];
            next.push_back(y);
        }
        out.push_back(next);
    }
    return out;
}

inline expcomp::DiscountFactor delta(std::mt19937_64& rng, std::size_t horizon, long den = 4) {
    return expcomp::DiscountFactor(oracle::random_row(rng, horizon, den));
}

/// Interior discount factor (every weight positive).
inline expcomp::DiscountFactor interior_delta(std::mt19937_64& rng, std::size_t horizon) {
    std::uniform_int_distribution<long> d(1, 4);
    std::vector<long> w(horizon);
    long total = 0;
    for (auto& x : w) total += (x = d(rng));
    std::vector<Rational> out;
    for (auto x : w) out.push_back(oracle::q(x, total));
    return expcomp::DiscountFactor(out);
}

}  // namespace gen
