#pragma once

// JSON documents for experiments, couplings, test-kernel families, arrival
// parameters and verdict reports. Rationals travel as "num/den" strings;
// decimals and integers are accepted on input and converted exactly.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "expcomp/controlled.hpp"
#include "expcomp/core_model.hpp"
#include "expcomp/evolving.hpp"
#include "expcomp/sequential.hpp"
#include "expcomp/verdict.hpp"

namespace expcomp::io {

using Json = nlohmann::ordered_json;

inline constexpr int format_version = 1;

/// Input problem with the offending field path (and line, for syntax errors).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

namespace detail {

inline std::string field(const std::string& base, const std::string& name) {
    return base.empty() ? name : base + "." + name;
}
inline std::string item(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ParseError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(field(path, key), "missing field");
    return *it;
}

inline Rational rational(const Json& j, const std::string& path) {
    try {
        if (j.is_string()) return parse_rational(j.get<std::string>());
        if (j.is_number_integer()) return Rational(mpz_class(j.dump(), 10));
        if (j.is_number_float()) return parse_rational(j.dump());
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, e.what());
    }
    throw ParseError(path, "expected a rational such as \"1/3\"");
}

inline std::vector<Rational> rationals(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected an array of rationals");
    std::vector<Rational> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(rational(j[i], item(path, i)));
    return out;
}

inline std::vector<std::vector<Rational>> matrix(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected an array of rows");
    std::vector<std::vector<Rational>> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(rationals(j[i], item(path, i)));
    return out;
}

inline std::vector<std::string> strings(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected an array of labels");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) throw ParseError(item(path, i), "expected a string label");
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

inline std::vector<std::vector<std::string>> alphabets(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected one alphabet per period");
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(strings(j[i], item(path, i)));
    return out;
}

inline std::size_t index_of(const std::vector<std::string>& alphabet, const std::string& label, const std::string& path) {
    for (std::size_t i = 0; i < alphabet.size(); ++i)
        if (alphabet[i] == label) return i;
    throw ParseError(path, "unknown label '" + label + "'");
}

inline std::size_t period(const Json& j, std::size_t horizon, const std::string& path) {
    if (!j.is_number_unsigned()) throw ParseError(path, "expected a positive period");
    auto t = j.get<std::size_t>();
    if (t < 1 || t > horizon) throw ParseError(path, "period out of range 1.." + std::to_string(horizon));
    return t;
}

// Index of a history written as labels over periods 1..len.
inline std::size_t history_index(const Json& j, const std::vector<std::vector<std::string>>& alphabets, std::size_t len,
                                 const std::string& path) {
    auto labels = j.is_null() ? std::vector<std::string>{} : strings(j, path);
    if (labels.size() != len)
        throw ParseError(path, "history must have " + std::to_string(len) + " entries, got " + std::to_string(labels.size()));
    std::size_t idx = 0;
    for (std::size_t s = 0; s < len; ++s) idx = idx * alphabets[s].size() + index_of(alphabets[s], labels[s], item(path, s));
    return idx;
}

inline Json history_labels(const ProductSpace& space, std::size_t index,
                           const std::vector<std::vector<std::string>>& alphabets) {
    Json out = Json::array();
    auto d = space.digits(index);
    for (std::size_t s = 0; s < d.size(); ++s) out.push_back(alphabets[s][d[s]]);
    return out;
}

// Row given as an array in alphabet order or as an object keyed by label.
inline std::vector<Rational> row(const Json& j, const std::vector<std::string>& alphabet, const std::string& path) {
    if (j.is_array()) {
        auto r = rationals(j, path);
        if (r.size() != alphabet.size())
            throw ParseError(path, "row has " + std::to_string(r.size()) + " entries, alphabet has " +
                                       std::to_string(alphabet.size()));
        return r;
    }
    if (j.is_object()) {
        std::vector<Rational> r(alphabet.size());
        for (auto it = j.begin(); it != j.end(); ++it)
            r[index_of(alphabet, it.key(), field(path, it.key()))] = rational(it.value(), field(path, it.key()));
        return r;
    }
    throw ParseError(path, "expected a probability row");
}

inline Json rational_json(const Rational& q) { return to_string(q); }

inline Json rationals_json(const std::vector<Rational>& v) {
    Json out = Json::array();
    for (const auto& q : v) out.push_back(rational_json(q));
    return out;
}

inline Json matrix_json(const std::vector<std::vector<Rational>>& m) {
    Json out = Json::array();
    for (const auto& r : m) out.push_back(rationals_json(r));
    return out;
}

inline void check_kind(const Json& j, const std::string& kind) {
    if (!j.is_object()) throw ParseError("", "document must be a JSON object");
    auto v = require(j, "format_version", "");
    if (!v.is_number_integer() || v.get<int>() != format_version)
        throw ParseError("format_version", "unsupported version, expected " + std::to_string(format_version));
    auto k = require(j, "kind", "");
    if (!k.is_string() || k.get<std::string>() != kind)
        throw ParseError("kind", "expected \"" + kind + "\"");
}

inline std::size_t horizon_of(const Json& j, std::size_t alphabets) {
    if (!j.contains("horizon")) return alphabets;
    const auto& h = j["horizon"];
    if (!h.is_number_unsigned() || h.get<std::size_t>() != alphabets)
        throw ParseError("horizon", "must equal the number of signal alphabets (" + std::to_string(alphabets) + ")");
    return alphabets;
}

}  // namespace detail

/// Parses JSON text, reporting syntax errors by line and column.
inline Json parse_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col), "invalid JSON");
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Discount specification: "1/2,1/2", "uniform[:T]", "geometric:r[:T]" or
/// "degenerate:t[:T]". Spaces work as separators too. A missing T is taken
/// from `horizon`.
inline DiscountFactor parse_delta(const std::string& spec, std::size_t horizon) {
    std::string s = spec;
    if (s.find(',') != std::string::npos) std::erase(s, ' ');
    std::replace(s.begin(), s.end(), ' ', ':');
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ':');)
        if (!part.empty()) parts.push_back(part);
    if (parts.empty()) throw ParseError("delta", "empty discount specification");
    auto length = [&](std::size_t at) -> std::size_t {
        if (parts.size() <= at) return horizon;
        try {
            std::size_t used = 0;
            auto n = std::stoul(parts[at], &used);
            if (used == parts[at].size() && n > 0) return n;
        } catch (const std::exception&) {
        }
        throw ParseError("delta", "bad horizon '" + parts[at] + "'");
    };
    try {
        const std::string& head = parts[0];
        if (head == "uniform") {
            if (parts.size() > 2) throw ParseError("delta", "usage: uniform[:T]");
            return DiscountFactor::uniform(length(1));
        }
        if (head == "geometric") {
            if (parts.size() < 2 || parts.size() > 3) throw ParseError("delta", "usage: geometric:r[:T]");
            return DiscountFactor::geometric(parse_rational(parts[1]), length(2));
        }
        if (head == "degenerate") {
            if (parts.size() < 2 || parts.size() > 3) throw ParseError("delta", "usage: degenerate:t[:T]");
            return DiscountFactor::degenerate(length(2), length(1));
        }
        if (parts.size() != 1) throw ParseError("delta", "unknown discount family '" + head + "'");
        std::vector<Rational> w;
        std::stringstream items(head);
        for (std::string item; std::getline(items, item, ',');) w.push_back(parse_rational(item));
        return DiscountFactor(std::move(w));
    } catch (const std::invalid_argument& e) {
        throw ParseError("delta", e.what());
    }
}

/// Comma-separated full-support prior over `states` states.
inline std::vector<Rational> parse_prior(const std::string& spec, std::size_t states) {
    std::vector<Rational> out;
    try {
        std::stringstream items(spec);
        for (std::string item; std::getline(items, item, ',');) out.push_back(parse_rational(item));
        require_full_support_prior(out, states);
    } catch (const std::invalid_argument& e) {
        throw ParseError("prior", e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiments

/// Builds an experiment; rows are checked for shape here and for
/// stochasticity by validate_experiment.
inline Experiment experiment_from_json(const Json& j) {
    detail::check_kind(j, "experiment");
    auto states = detail::strings(detail::require(j, "states", ""), "states");
    auto signals = detail::alphabets(detail::require(j, "signals", ""), "signals");
    if (signals.empty()) throw ParseError("signals", "need at least one period");
    std::size_t T = detail::horizon_of(j, signals.size());
    std::vector<std::vector<std::string>> controls;
    if (j.contains("controls")) {
        controls = detail::alphabets(j["controls"], "controls");
        if (controls.size() + 1 != T) throw ParseError("controls", "need one alphabet for each of periods 1..T-1");
    }
    Experiment e(states, signals, controls);
    const auto& kernel = detail::require(j, "kernel", "");
    if (!kernel.is_array()) throw ParseError("kernel", "expected an array of entries");
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        std::string path = detail::item("kernel", i);
        const auto& k = kernel[i];
        std::size_t t = detail::period(detail::require(k, "period", path), T, detail::field(path, "period"));
        std::size_t th = detail::index_of(states, detail::require(k, "state", path).get<std::string>(),
                                          detail::field(path, "state"));
        std::size_t x = detail::history_index(k.value("signals", Json()), signals, t - 1, detail::field(path, "signals"));
        std::size_t c = 0;
        if (t > 1) {
            if (k.contains("controls")) {
                c = detail::history_index(k["controls"], e.control_alphabets(), t - 1, detail::field(path, "controls"));
            } else if (e.is_controlled()) {
                // Without controls the row applies to every control history.
                auto r = detail::row(detail::require(k, "probabilities", path), signals[t - 1],
                                     detail::field(path, "probabilities"));
                for (std::size_t cc = 0; cc < e.control_histories(t - 1).size(); ++cc)
                    e.set_kernel(t, th, e.prefix_index(t, x, cc), r);
                continue;
            }
        }
        if (e.entry(t, th, e.prefix_index(t, x, c))) throw ParseError(path, "duplicate kernel entry");
        e.set_kernel(t, th, e.prefix_index(t, x, c),
                     detail::row(detail::require(k, "probabilities", path), signals[t - 1],
                                 detail::field(path, "probabilities")));
    }
    return e;
}

inline Json experiment_to_json(const Experiment& e) {
    Json j;
    j["format_version"] = format_version;
    j["kind"] = "experiment";
    j["states"] = e.states();
    j["horizon"] = e.horizon();
    j["signals"] = e.signal_alphabets();
    if (e.horizon() > 1) j["controls"] = e.control_alphabets();
    Json kernel = Json::array();
    for (std::size_t t = 1; t <= e.horizon(); ++t)
        for (std::size_t th = 0; th < e.state_count(); ++th)
            for (std::size_t x = 0; x < e.signal_histories(t - 1).size(); ++x)
                for (std::size_t c = 0; c < e.control_histories(t - 1).size(); ++c) {
                    const auto& r = e.entry(t, th, e.prefix_index(t, x, c));
                    if (!r) continue;
                    Json k;
                    k["period"] = t;
                    k["state"] = e.states()[th];
                    k["signals"] = detail::history_labels(e.signal_histories(t - 1), x, e.signal_alphabets());
                    if (t > 1) k["controls"] = detail::history_labels(e.control_histories(t - 1), c, e.control_alphabets());
                    k["probabilities"] = detail::rationals_json(*r);
                    kernel.push_back(std::move(k));
                }
    j["kernel"] = std::move(kernel);
    return j;
}

// ---------------------------------------------------------------------------
// Couplings

inline Coupling coupling_from_json(const Json& j) {
    detail::check_kind(j, "coupling");
    auto states = detail::strings(detail::require(j, "states", ""), "states");
    auto xs = detail::alphabets(detail::require(j, "x_signals", ""), "x_signals");
    auto ys = detail::alphabets(detail::require(j, "y_signals", ""), "y_signals");
    if (xs.empty() || xs.size() != ys.size()) throw ParseError("y_signals", "must have as many periods as x_signals");
    std::size_t T = detail::horizon_of(j, xs.size());
    Coupling h(states, xs, ys);
    const auto& kernel = detail::require(j, "kernel", "");
    if (!kernel.is_array()) throw ParseError("kernel", "expected an array of entries");
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        std::string path = detail::item("kernel", i);
        const auto& k = kernel[i];
        std::size_t t = detail::period(detail::require(k, "period", path), T, detail::field(path, "period"));
        std::size_t th = detail::index_of(states, detail::require(k, "state", path).get<std::string>(),
                                          detail::field(path, "state"));
        std::size_t xp = detail::history_index(k.value("x_history", Json()), xs, t - 1, detail::field(path, "x_history"));
        std::size_t yp = detail::history_index(k.value("y_history", Json()), ys, t - 1, detail::field(path, "y_history"));
        auto r = detail::rationals(detail::require(k, "probabilities", path), detail::field(path, "probabilities"));
        if (r.size() != xs[t - 1].size() * ys[t - 1].size())
            throw ParseError(detail::field(path, "probabilities"), "expected |X_t| * |Y_t| entries, x-major");
        if (h.entry(t, th, xp, yp)) throw ParseError(path, "duplicate kernel entry");
        h.set_kernel(t, th, xp, yp, std::move(r));
    }
    return h;
}

inline Json coupling_to_json(const Coupling& h) {
    Json j;
    j["format_version"] = format_version;
    j["kind"] = "coupling";
    j["states"] = h.states();
    j["horizon"] = h.horizon();
    j["x_signals"] = h.x_alphabets();
    j["y_signals"] = h.y_alphabets();
    Json kernel = Json::array();
    for (std::size_t t = 1; t <= h.horizon(); ++t)
        for (std::size_t th = 0; th < h.state_count(); ++th)
            for (std::size_t xp = 0; xp < h.x_histories(t - 1).size(); ++xp)
                for (std::size_t yp = 0; yp < h.y_histories(t - 1).size(); ++yp) {
                    const auto& r = h.entry(t, th, xp, yp);
                    if (!r) continue;
                    Json k;
                    k["period"] = t;
                    k["state"] = h.states()[th];
                    k["x_history"] = detail::history_labels(h.x_histories(t - 1), xp, h.x_alphabets());
                    k["y_history"] = detail::history_labels(h.y_histories(t - 1), yp, h.y_alphabets());
                    k["probabilities"] = detail::rationals_json(*r);
                    kernel.push_back(std::move(k));
                }
    j["kernel"] = std::move(kernel);
    return j;
}

// ---------------------------------------------------------------------------
// Evolving-state experiments

struct EvolvingInput {
    StatePathLaw paths;
    EvolvingExperiment experiment;
};

inline EvolvingInput evolving_from_json(const Json& j) {
    detail::check_kind(j, "evolving_experiment");
    auto states = detail::strings(detail::require(j, "states", ""), "states");
    auto signals = detail::alphabets(detail::require(j, "signals", ""), "signals");
    if (signals.empty()) throw ParseError("signals", "need at least one period");
    std::size_t T = detail::horizon_of(j, signals.size());
    EvolvingExperiment e(states, signals);
    StatePathLaw law{T, detail::rationals(detail::require(j, "state_path_law", ""), "state_path_law")};
    std::vector<std::vector<std::string>> state_alphabets(T, states);
    const auto& kernel = detail::require(j, "kernel", "");
    if (!kernel.is_array()) throw ParseError("kernel", "expected an array of entries");
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        std::string path = detail::item("kernel", i);
        const auto& k = kernel[i];
        std::size_t t = detail::period(detail::require(k, "period", path), T, detail::field(path, "period"));
        std::size_t w = detail::history_index(detail::require(k, "state_path", path), state_alphabets, t,
                                              detail::field(path, "state_path"));
        std::size_t x = detail::history_index(k.value("signals", Json()), signals, t - 1, detail::field(path, "signals"));
        if (e.entry(t, w, x)) throw ParseError(path, "duplicate kernel entry");
        e.set_kernel(t, w, x,
                     detail::row(detail::require(k, "probabilities", path), signals[t - 1],
                                 detail::field(path, "probabilities")));
    }
    return {std::move(law), std::move(e)};
}

inline Json evolving_to_json(const StatePathLaw& p, const EvolvingExperiment& e) {
    Json j;
    j["format_version"] = format_version;
    j["kind"] = "evolving_experiment";
    j["states"] = e.states();
    j["horizon"] = e.horizon();
    j["signals"] = e.signal_alphabets();
    j["state_path_law"] = detail::rationals_json(p.probabilities);
    std::vector<std::vector<std::string>> state_alphabets(e.horizon(), e.states());
    Json kernel = Json::array();
    for (std::size_t t = 1; t <= e.horizon(); ++t)
        for (std::size_t w = 0; w < e.state_paths(t).size(); ++w)
            for (std::size_t x = 0; x < e.signal_histories(t - 1).size(); ++x) {
                const auto& r = e.entry(t, w, x);
                if (!r) continue;
                Json k;
                k["period"] = t;
                k["state_path"] = detail::history_labels(e.state_paths(t), w, state_alphabets);
                k["signals"] = detail::history_labels(e.signal_histories(t - 1), x, e.signal_alphabets());
                k["probabilities"] = detail::rationals_json(*r);
                kernel.push_back(std::move(k));
            }
    j["kernel"] = std::move(kernel);
    return j;
}

// ---------------------------------------------------------------------------
// Test-kernel families. Outcomes are named by their process label, e.g.
// "t=2:y1,y2 | k1". Each kernel has a default control; entries override one
// (period, outcome, control history) slot with a control or a row.

inline std::vector<TestKernel> kernel_family_from_json(const Json& j, const Experiment& g) {
    detail::check_kind(j, "kernel_family");
    ProcessSpace space(g);
    const auto& kernels = detail::require(j, "kernels", "");
    if (!kernels.is_array()) throw ParseError("kernels", "expected an array of kernels");
    std::vector<TestKernel> out;
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        std::string path = detail::item("kernels", i);
        const auto& kj = kernels[i];
        std::vector<std::size_t> defaults(g.horizon() - 1, 0);
        if (kj.contains("default")) {
            auto d = detail::strings(kj["default"], detail::field(path, "default"));
            if (d.size() != defaults.size()) throw ParseError(detail::field(path, "default"), "one control per period 1..T-1");
            for (std::size_t t = 1; t < g.horizon(); ++t)
                defaults[t - 1] = detail::index_of(g.controls(t), d[t - 1], detail::item(detail::field(path, "default"), t - 1));
        }
        TestKernel xi = constant_kernel(g, defaults);
        xi.name = kj.value("name", "kernel " + std::to_string(i));
        if (kj.contains("entries")) {
            const auto& entries = kj["entries"];
            if (!entries.is_array()) throw ParseError(detail::field(path, "entries"), "expected an array");
            for (std::size_t n = 0; n < entries.size(); ++n) {
                std::string ep = detail::item(detail::field(path, "entries"), n);
                const auto& en = entries[n];
                std::size_t t = detail::period(detail::require(en, "period", ep), g.horizon() - 1, detail::field(ep, "period"));
                auto label = detail::require(en, "outcome", ep);
                if (!label.is_string()) throw ParseError(detail::field(ep, "outcome"), "expected an outcome label");
                std::size_t o = detail::index_of(space.labels(), label.get<std::string>(), detail::field(ep, "outcome"));
                std::size_t c = detail::history_index(en.value("control_history", Json()), g.control_alphabets(), t - 1,
                                                      detail::field(ep, "control_history"));
                auto& slot = xi.rows[t - 1][o][c];
                if (en.contains("control")) {
                    std::fill(slot.begin(), slot.end(), Rational(0));
                    slot[detail::index_of(g.controls(t), en["control"].get<std::string>(), detail::field(ep, "control"))] = 1;
                } else {
                    slot = detail::row(detail::require(en, "probabilities", ep), g.controls(t),
                                       detail::field(ep, "probabilities"));
                }
            }
        }
        auto v = validate_test_kernel(g, xi);
        if (!v.empty()) throw ParseError(path, to_string(v.front()));
        out.push_back(std::move(xi));
    }
    return out;
}

/// Writes every slot that differs from a default of control 0.
inline Json kernel_family_to_json(const std::vector<TestKernel>& family, const Experiment& g) {
    ProcessSpace space(g);
    Json j;
    j["format_version"] = format_version;
    j["kind"] = "kernel_family";
    Json kernels = Json::array();
    for (const auto& xi : family) {
        Json kj;
        kj["name"] = xi.name;
        Json defaults = Json::array();
        for (std::size_t t = 1; t < g.horizon(); ++t) defaults.push_back(g.controls(t)[0]);
        kj["default"] = defaults;
        Json entries = Json::array();
        for (std::size_t t = 1; t < g.horizon(); ++t)
            for (std::size_t o = 0; o < space.size(); ++o)
                for (std::size_t c = 0; c < g.control_histories(t - 1).size(); ++c) {
                    const auto& r = xi.row(t, o, c);
                    if (r[0] == 1) continue;
                    Json en;
                    en["period"] = t;
                    en["outcome"] = space.labels()[o];
                    en["control_history"] = detail::history_labels(g.control_histories(t - 1), c, g.control_alphabets());
                    auto one = std::find(r.begin(), r.end(), Rational(1));
                    if (one != r.end()) {
                        en["control"] = g.controls(t)[static_cast<std::size_t>(one - r.begin())];
                    } else {
                        en["probabilities"] = detail::rationals_json(r);
                    }
                    entries.push_back(std::move(en));
                }
        kj["entries"] = std::move(entries);
        kernels.push_back(std::move(kj));
    }
    j["kernels"] = std::move(kernels);
    return j;
}

// ---------------------------------------------------------------------------
// Arrival parameters

inline ArrivalParams arrival_from_json(const Json& j) {
    detail::check_kind(j, "arrival");
    ArrivalParams a;
    a.states = detail::strings(detail::require(j, "states", ""), "states");
    a.signals = detail::strings(detail::require(j, "signals", ""), "signals");
    a.h = detail::matrix(detail::require(j, "h", ""), "h");
    a.alpha1 = detail::rational(detail::require(j, "alpha1", ""), "alpha1");
    a.beta1 = detail::rational(detail::require(j, "beta1", ""), "beta1");
    a.alpha2 = detail::rationals(detail::require(j, "alpha2", ""), "alpha2");
    a.beta2 = detail::rationals(detail::require(j, "beta2", ""), "beta2");
    if (j.contains("delta")) {
        try {
            a.delta = DiscountFactor(detail::rationals(j["delta"], "delta"));
        } catch (const std::invalid_argument& e) {
            throw ParseError("delta", e.what());
        }
    }
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError("arrival", e.what());
    }
    return a;
}

inline Json arrival_to_json(const ArrivalParams& a) {
    Json j;
    j["format_version"] = format_version;
    j["kind"] = "arrival";
    j["states"] = a.states;
    j["signals"] = a.signals;
    j["h"] = detail::matrix_json(a.h);
    j["alpha1"] = to_string(a.alpha1);
    j["beta1"] = to_string(a.beta1);
    j["alpha2"] = detail::rationals_json(a.alpha2);
    j["beta2"] = detail::rationals_json(a.beta2);
    j["delta"] = detail::rationals_json(a.delta.weights());
    return j;
}

// ---------------------------------------------------------------------------
// Reports

inline Json garbling_to_json(const Garbling& g) {
    Json j;
    j["from"] = g.from;
    j["to"] = g.to;
    j["matrix"] = detail::matrix_json(g.matrix);
    return j;
}

inline Json problem_to_json(const DecisionProblem& dp) {
    Json j;
    j["actions"] = dp.actions;
    j["payoff"] = detail::matrix_json(dp.payoff);
    if (!dp.control_map.empty()) {
        Json cm = Json::array();
        for (const auto& period : dp.control_map) {
            Json p = Json::array();
            for (const auto& per_action : period) p.push_back(detail::matrix_json(per_action));
            cm.push_back(std::move(p));
        }
        j["control_map"] = std::move(cm);
    }
    return j;
}

inline Json certificate_to_json(const Certificate& c) {
    Json j;
    j["reason"] = c.reason;
    j["f_value"] = to_string(c.f_value);
    j["g_value"] = to_string(c.g_value);
    if (c.failing_period) j["failing_period"] = *c.failing_period;
    if (c.breakpoint) j["breakpoint"] = to_string(*c.breakpoint);
    if (!c.refuting_kernel.empty()) j["refuting_kernel"] = c.refuting_kernel;
    j["actions"] = c.actions;
    j["payoff"] = detail::matrix_json(c.payoff);
    j["row_labels"] = c.row_labels;
    j["dual"] = detail::rationals_json(c.dual);
    if (c.problem) j["decision_problem"] = problem_to_json(*c.problem);
    if (c.problem_value_f) j["problem_value_f"] = to_string(*c.problem_value_f);
    if (c.problem_value_g) j["problem_value_g"] = to_string(*c.problem_value_g);
    return j;
}

inline Json verdict_to_json(const ComparisonVerdict& v) {
    Json j;
    j["status"] = to_string(v.status);
    j["route"] = v.route;
    j["notes"] = v.notes;
    Json w = Json::array();
    for (const auto& g : v.witness) w.push_back(garbling_to_json(g));
    j["witness"] = std::move(w);
    if (v.certificate) j["certificate"] = certificate_to_json(*v.certificate);
    return j;
}

}  // namespace expcomp::io
