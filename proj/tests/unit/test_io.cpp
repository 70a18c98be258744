#include <gtest/gtest.h>

#include <random>

#include "expcomp/catalog.hpp"
#include "expcomp/io.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace expcomp;
namespace io = expcomp::io;
using io::Json;

namespace {

Rational r(long n, long d = 1) { return oracle::q(n, d); }

template <class F>
std::string parse_error_of(F&& fn) {
    try {
        fn();
    } catch (const io::ParseError& e) {
        return e.what();
    }
    return "no error";
}

Json intro_json() { return io::experiment_to_json(catalog::delayed_revelation().first); }

}  // namespace

// --- discount and prior specs ---------------------------------------------------

TEST(ParseDelta, ExplicitVector) {
    EXPECT_EQ(io::parse_delta("1/2,1/2", 2), DiscountFactor({r(1, 2), r(1, 2)}));
    EXPECT_EQ(io::parse_delta("1/4, 3/4", 2), DiscountFactor({r(1, 4), r(3, 4)}));
    EXPECT_EQ(io::parse_delta("0.25,0.75", 2), DiscountFactor({r(1, 4), r(3, 4)}));
}

TEST(ParseDelta, Families) {
    EXPECT_EQ(io::parse_delta("uniform", 3), DiscountFactor::uniform(3));
    EXPECT_EQ(io::parse_delta("uniform:4", 2), DiscountFactor::uniform(4));
    EXPECT_EQ(io::parse_delta("uniform 4", 2), DiscountFactor::uniform(4));
    EXPECT_EQ(io::parse_delta("degenerate:2", 3), DiscountFactor::degenerate(3, 2));
    EXPECT_EQ(io::parse_delta("degenerate 1 2", 3), DiscountFactor::degenerate(2, 1));
    // Proportional to r^t: 1/2, 1/4, 1/8 normalized.
    EXPECT_EQ(io::parse_delta("geometric:1/2:3", 1), DiscountFactor({r(4, 7), r(2, 7), r(1, 7)}));
    EXPECT_EQ(io::parse_delta("geometric 1/2 3", 1), DiscountFactor::geometric(r(1, 2), 3));
}

TEST(ParseDelta, Errors) {
    EXPECT_THROW(io::parse_delta("", 2), io::ParseError);
    EXPECT_THROW(io::parse_delta("1/2,1/3", 2), io::ParseError);
    EXPECT_THROW(io::parse_delta("-1,2", 2), io::ParseError);
    EXPECT_THROW(io::parse_delta("degenerate:3:2", 2), io::ParseError);
    EXPECT_THROW(io::parse_delta("geometric:0:2", 2), io::ParseError);
    EXPECT_THROW(io::parse_delta("hyperbolic:2", 2), io::ParseError);
    EXPECT_THROW(io::parse_delta("uniform:x", 2), io::ParseError);
    EXPECT_NE(parse_error_of([] { io::parse_delta("1/2,1/3", 2); }).find("delta"), std::string::npos);
}

TEST(ParsePrior, FullSupportOnly) {
    EXPECT_EQ(io::parse_prior("1/3,2/3", 2), (std::vector<Rational>{r(1, 3), r(2, 3)}));
    EXPECT_THROW(io::parse_prior("1,0", 2), io::ParseError);
    EXPECT_THROW(io::parse_prior("1/2,1/2", 3), io::ParseError);
    EXPECT_THROW(io::parse_prior("1/2,x", 2), io::ParseError);
}

// --- round trips ------------------------------------------------------------------

TEST(RoundTrip, RandomUncontrolledExperiments) {
    std::mt19937_64 rng(83);
    for (int i = 0; i < 30; ++i) {
        auto e = gen::experiment(rng, 2 + i % 2, {std::size_t(1 + i % 3), 2, std::size_t(1 + i % 2)});
        auto j = io::experiment_to_json(e);
        auto back = io::experiment_from_json(io::parse_text(j.dump(2)));
        ASSERT_EQ(back, e);
        ASSERT_EQ(io::experiment_to_json(back).dump(), j.dump());
    }
}

TEST(RoundTrip, ControlledExperiments) {
    auto a = catalog::arrival_example({r(2, 5), r(1, 5)}, {r(9, 20), r(1, 4)}, r(3, 10), r(1, 4));
    for (const auto& e : {arrival_f(a), arrival_g(a)}) {
        auto back = io::experiment_from_json(io::parse_text(io::experiment_to_json(e).dump()));
        EXPECT_EQ(back, e);
    }
}

TEST(RoundTrip, Couplings) {
    std::mt19937_64 rng(89);
    std::vector<Coupling> cases{catalog::repeated_signal_independent(), catalog::repeated_signal_correlated()};
    for (int i = 0; i < 10; ++i)
        cases.push_back(independent_coupling(gen::experiment(rng, 2, {2, 2}), gen::experiment(rng, 2, {std::size_t(1 + i % 3), 2})));
    for (const auto& h : cases) {
        auto back = io::coupling_from_json(io::parse_text(io::coupling_to_json(h).dump()));
        ASSERT_EQ(back, h);
    }
}

TEST(RoundTrip, EvolvingExperiments) {
    auto [f, g] = catalog::delayed_revelation();
    StatePathLaw law{2, {r(3, 8), r(1, 8), r(1, 8), r(3, 8)}};
    for (const auto& e : {f, g}) {
        auto ev = EvolvingExperiment::from_fixed(e);
        auto back = io::evolving_from_json(io::parse_text(io::evolving_to_json(law, ev).dump()));
        EXPECT_EQ(back.experiment, ev);
        EXPECT_EQ(back.paths.probabilities, law.probabilities);
        EXPECT_EQ(back.paths.horizon, 2u);
    }
}

TEST(RoundTrip, KernelFamilies) {
    auto a = catalog::arrival_example({r(2, 5), r(1, 5)}, {r(9, 20), r(1, 4)}, r(3, 10), r(1, 4));
    auto g = arrival_g(a);
    auto family = arrival_dominance_kernels(a);
    // A stochastic kernel too.
    auto mixed = constant_kernel(g, {0});
    mixed.name = "mixed";
    mixed.rows[0][1][0] = {r(1, 3), r(2, 3)};
    family.push_back(mixed);
    auto back = io::kernel_family_from_json(io::parse_text(io::kernel_family_to_json(family, g).dump()), g);
    ASSERT_EQ(back.size(), family.size());
    for (std::size_t i = 0; i < family.size(); ++i) {
        EXPECT_EQ(back[i], family[i]);
        EXPECT_EQ(back[i].name, family[i].name);
    }
}

TEST(RoundTrip, ArrivalParameters) {
    auto a = catalog::arrival_example({r(2, 5), r(1, 5)}, {r(9, 20), r(1, 4)}, r(3, 10), r(1, 4), DiscountFactor({r(2, 3), r(1, 3)}));
    auto b = io::arrival_from_json(io::parse_text(io::arrival_to_json(a).dump()));
    EXPECT_EQ(b.states, a.states);
    EXPECT_EQ(b.signals, a.signals);
    EXPECT_EQ(b.h, a.h);
    EXPECT_EQ(b.alpha1, a.alpha1);
    EXPECT_EQ(b.beta1, a.beta1);
    EXPECT_EQ(b.alpha2, a.alpha2);
    EXPECT_EQ(b.beta2, a.beta2);
    EXPECT_EQ(b.delta, a.delta);
}

TEST(RoundTrip, RationalsAreWrittenAsFractions) {
    auto j = intro_json();
    EXPECT_EQ(j["kernel"][0]["probabilities"][0], "1/1");
    EXPECT_EQ(j["format_version"], io::format_version);
}

// --- input conveniences -----------------------------------------------------------

TEST(Input, DecimalsAreExact) {
    auto j = intro_json();
    j["kernel"][2]["probabilities"] = {"0.7", "0.3"};
    auto e = io::experiment_from_json(j);
    EXPECT_EQ(e.kernel(2, 0, 0), (std::vector<Rational>{r(7, 10), r(3, 10)}));
}

TEST(Input, RowsKeyedBySignalLabel) {
    auto j = intro_json();
    j["kernel"][2]["probabilities"] = Json{{"x2'", "1/4"}, {"x2", "3/4"}};
    auto e = io::experiment_from_json(j);
    EXPECT_EQ(e.kernel(2, 0, 0), (std::vector<Rational>{r(3, 4), r(1, 4)}));
}

TEST(Input, ControlsMayBeOmittedOnControlledRows) {
    auto a = catalog::arrival_example({r(1, 5), r(1, 5)}, {r(1, 5), r(1, 5)}, r(1, 5), r(1, 5));
    auto e = arrival_f(a);
    auto j = io::experiment_to_json(e);
    Json kept = Json::array();
    for (auto& k : j["kernel"])
        if (!(k["period"] == 2 && k["controls"][0] == "k2")) {
            k.erase("controls");
            kept.push_back(k);
        }
    j["kernel"] = kept;
    EXPECT_EQ(io::experiment_from_json(j), e);
}

// --- diagnostics ------------------------------------------------------------------

TEST(Diagnostics, InvalidJsonReportsLineAndColumn) {
    std::string text = "{\n  \"kind\": \"experiment\",\n  \"states\": [\"a\"\n  ,, ]\n}";
    auto msg = parse_error_of([&] { io::parse_text(text); });
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("invalid JSON"), std::string::npos);
}

TEST(Diagnostics, WrongKind) {
    auto j = intro_json();
    j["kind"] = "coupling";
    EXPECT_THROW(io::experiment_from_json(j), io::ParseError);
}

TEST(Diagnostics, UnknownLabelNamesTheField) {
    auto j = intro_json();
    j["kernel"][0]["state"] = "omega";
    auto msg = parse_error_of([&] { io::experiment_from_json(j); });
    EXPECT_NE(msg.find("kernel[0].state"), std::string::npos) << msg;
}

TEST(Diagnostics, WrongRowLength) {
    auto j = intro_json();
    j["kernel"][2]["probabilities"] = {"1/2", "1/4", "1/4"};
    auto msg = parse_error_of([&] { io::experiment_from_json(j); });
    EXPECT_NE(msg.find("kernel[2].probabilities"), std::string::npos) << msg;
}

TEST(Diagnostics, DuplicateEntry) {
    auto j = intro_json();
    j["kernel"].push_back(j["kernel"][0]);
    auto msg = parse_error_of([&] { io::experiment_from_json(j); });
    EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(Diagnostics, BadRationalAndPeriod) {
    auto j = intro_json();
    j["kernel"][0]["probabilities"] = {"one"};
    EXPECT_THROW(io::experiment_from_json(j), io::ParseError);
    auto k = intro_json();
    k["kernel"][0]["period"] = 5;
    EXPECT_THROW(io::experiment_from_json(k), io::ParseError);
}

TEST(Diagnostics, RowSumsAreLeftToValidation) {
    auto j = intro_json();
    j["kernel"][2]["probabilities"] = {"2/3", "1/2"};
    auto e = io::experiment_from_json(j);
    auto v = validate_experiment(e);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(to_string(v.front()).find("row sums to 7/6"), std::string::npos) << to_string(v.front());
}

TEST(Diagnostics, ArrivalOutOfRange) {
    auto j = io::arrival_to_json(catalog::arrival_example({r(1, 5)}, {r(1, 5)}, r(1, 5), r(1, 5)));
    j["alpha2"] = {"9/10"};
    EXPECT_THROW(io::arrival_from_json(j), io::ParseError);
}

TEST(Diagnostics, MissingFile) {
    EXPECT_THROW(io::read_file("/nonexistent/file.json"), io::ParseError);
}

// --- reports ----------------------------------------------------------------------

TEST(Reports, SufficientVerdictDocument) {
    auto [f, g] = catalog::delayed_revelation();
    auto v = delta_sufficient(f, g, DiscountFactor::uniform(2));
    auto j = io::verdict_to_json(v);
    EXPECT_EQ(j["status"], "Sufficient");
    ASSERT_EQ(j["witness"].size(), 1u);
    EXPECT_EQ(j["witness"][0]["matrix"].size(), v.witness[0].from.size());
    EXPECT_FALSE(j.contains("certificate"));
}

TEST(Reports, RefutationDocument) {
    auto [f, g] = catalog::delayed_revelation();
    auto v = big_delta_sufficient(f, g);
    auto j = io::verdict_to_json(v);
    EXPECT_EQ(j["status"], "NotSufficient");
    EXPECT_EQ(j["certificate"]["failing_period"], 1);
    ASSERT_TRUE(j["certificate"].contains("decision_problem"));
    // Payoffs survive the trip through text exactly.
    const auto& payoff = j["certificate"]["decision_problem"]["payoff"];
    for (std::size_t a = 0; a < payoff.size(); ++a)
        for (std::size_t th = 0; th < payoff[a].size(); ++th)
            EXPECT_EQ(parse_rational(payoff[a][th].get<std::string>()), v.certificate->problem->payoff[a][th]);
}
