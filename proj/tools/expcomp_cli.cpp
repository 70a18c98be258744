// expcomp: compare multi-period experiments from JSON files.
//
// Exit codes: 0 Sufficient, 1 NotSufficient, 2 Inconclusive, 3 input error,
// 4 internal error.

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "expcomp/expcomp.hpp"
#include "expcomp/io.hpp"

namespace {

using namespace expcomp;
using io::Json;

enum ExitCode : int { exit_sufficient = 0, exit_refuted = 1, exit_inconclusive = 2, exit_input = 3, exit_internal = 4 };

int exit_for(Status s) {
    switch (s) {
        case Status::sufficient: return exit_sufficient;
        case Status::not_sufficient: return exit_refuted;
        case Status::inconclusive: return exit_inconclusive;
    }
    return exit_internal;
}

// Raised when engines disagree with each other.
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw InternalError("SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

struct InputFile {
    std::string path;
    std::string sha256;
    Json document;
};

InputFile load(const std::string& path) {
    auto text = io::read_file(path);
    try {
        return {path, sha256_hex(text), io::parse_text(text)};
    } catch (const io::ParseError& e) {
        throw io::ParseError(path + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
    }
}

// Re-raise a parse or validation problem with the file name in front.
template <class F>
auto in_file(const std::string& path, F&& fn) {
    try {
        return fn();
    } catch (const io::ParseError& e) {
        throw io::ParseError(path + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
    } catch (const std::invalid_argument& e) {
        throw io::ParseError(path, e.what());
    }
}

void require_no_violations(const std::string& path, const std::vector<Violation>& v) {
    if (!v.empty()) throw io::ParseError(path, to_string(v.front()));
}

Experiment load_experiment(const InputFile& in) {
    auto e = in_file(in.path, [&] { return io::experiment_from_json(in.document); });
    require_no_violations(in.path, validate_experiment(e));
    return e;
}

struct Options {
    std::string format = "text";
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
    std::string delta;
    std::string prior;
};

class Report {
public:
    Report(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {}

    void input(const InputFile& f) { inputs_.push_back(f); }
    Json& parameters() { return parameters_; }
    Json& result() { return result_; }
    std::ostringstream& text() { return text_; }

    int emit(int code) const {
        if (opt_.format == "json") {
            Json doc;
            doc["format_version"] = io::format_version;
            doc["kind"] = "report";
            doc["library_version"] = EXPCOMP_VERSION;
            doc["command"] = command_;
            Json inputs = Json::array();
            for (const auto& f : inputs_) inputs.push_back({{"path", f.path}, {"sha256", f.sha256}});
            doc["inputs"] = std::move(inputs);
            doc["parameters"] = parameters_;
            doc["result"] = result_;
            doc["exit_code"] = code;
            std::cout << doc.dump(2) << "\n";
        } else {
            std::cout << text_.str();
        }
        return code;
    }

private:
    std::string command_;
    const Options& opt_;
    std::vector<InputFile> inputs_;
    Json parameters_ = Json::object();
    Json result_ = Json::object();
    std::ostringstream text_;
};

// ---------------------------------------------------------------------------
// Text rendering

void print_matrix(std::ostream& os, const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                  const std::vector<std::vector<Rational>>& m) {
    // Wide matrices are listed by their nonzero entries.
    if (cols.size() > 6) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            os << "    " << rows[i] << " ->";
            for (std::size_t j = 0; j < m[i].size(); ++j)
                if (sgn(m[i][j]) != 0) os << "  " << cols[j] << ": " << to_string(m[i][j]);
            os << "\n";
        }
        return;
    }
    std::size_t w0 = 0;
    for (const auto& r : rows) w0 = std::max(w0, r.size());
    std::vector<std::size_t> w(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        w[j] = cols[j].size();
        for (const auto& r : m) w[j] = std::max(w[j], to_string(r[j]).size());
    }
    os << "    " << std::string(w0, ' ');
    for (std::size_t j = 0; j < cols.size(); ++j) os << "  " << std::setw(static_cast<int>(w[j])) << cols[j];
    os << "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        os << "    " << std::left << std::setw(static_cast<int>(w0)) << rows[i] << std::right;
        for (std::size_t j = 0; j < cols.size(); ++j)
            os << "  " << std::setw(static_cast<int>(w[j])) << to_string(m[i][j]);
        os << "\n";
    }
}

void print_verdict(std::ostream& os, const ComparisonVerdict& v, const std::vector<std::string>& states) {
    os << "verdict: " << to_string(v.status) << "\n";
    os << "route: " << v.route << "\n";
    for (const auto& n : v.notes) os << "note: " << n << "\n";
    for (std::size_t i = 0; i < v.witness.size(); ++i) {
        os << "witness garbling";
        if (v.witness.size() > 1) os << " " << i + 1;
        os << " (rows: f outcomes, columns: g outcomes):\n";
        print_matrix(os, v.witness[i].from, v.witness[i].to, v.witness[i].matrix);
    }
    if (!v.certificate) return;
    const auto& c = *v.certificate;
    os << "certificate: " << (c.reason.empty() ? "Farkas multipliers separate f from g" : c.reason) << "\n";
    if (c.failing_period) os << "  failing period: t=" << *c.failing_period << "\n";
    if (c.breakpoint) os << "  breakpoint: " << to_string(*c.breakpoint) << "\n";
    if (!c.refuting_kernel.empty()) os << "  refuting kernel: " << c.refuting_kernel << "\n";
    if (!c.payoff.empty())
        os << "  separating value under f: " << to_string(c.f_value) << ", under g: " << to_string(c.g_value) << "\n";
    if (c.problem) {
        os << "separating decision problem (payoff[action][state]):\n";
        print_matrix(os, c.problem->actions, states, c.problem->payoff);
        if (!c.problem->control_map.empty()) os << "  (with a control map for " << c.problem->control_map.size() << " period(s))\n";
        if (c.problem_value_f && c.problem_value_g)
            os << "  optimal value under f: " << to_string(*c.problem_value_f)
               << ", under g: " << to_string(*c.problem_value_g) << "\n";
    }
}

// Rebuilds the separating problem for a user prior.
void reprice(ComparisonVerdict& v, const ProblemContext& ctx) {
    if (!v.certificate || !v.certificate->problem || ctx.prior.empty()) return;
    detail::attach_problem(*v.certificate, ctx);
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
    std::string f, g;
    std::string mode = "delta";
};

int run_compare(const CompareArgs& a, const Options& opt) {
    Report rep("compare", opt);
    auto fin = load(a.f), gin = load(a.g);
    rep.input(fin);
    rep.input(gin);
    rep.parameters()["mode"] = a.mode;
    ComparisonVerdict v;
    std::vector<std::string> states;
    if (a.mode == "evolving") {
        auto fe = in_file(fin.path, [&] { return io::evolving_from_json(fin.document); });
        auto ge = in_file(gin.path, [&] { return io::evolving_from_json(gin.document); });
        require_no_violations(fin.path, validate_evolving(fe.experiment));
        require_no_violations(gin.path, validate_evolving(ge.experiment));
        in_file(fin.path, [&] { fe.paths.validate(fe.experiment.state_count()); return 0; });
        if (fe.paths.probabilities != ge.paths.probabilities)
            throw io::ParseError(gin.path + ": state_path_law", "must match the state path law of f");
        auto delta = io::parse_delta(opt.delta.empty() ? "uniform" : opt.delta, fe.experiment.horizon());
        rep.parameters()["delta"] = io::detail::rationals_json(delta.weights());
        v = evolving_state_sufficient(fe.paths, fe.experiment, ge.experiment, delta);
        states = fe.experiment.states();
    } else {
        auto f = load_experiment(fin), g = load_experiment(gin);
        if (f.is_controlled() || g.is_controlled())
            throw io::ParseError(f.is_controlled() ? fin.path : gin.path,
                                 "controlled experiment; use compare-controlled");
        states = f.states();
        std::vector<Rational> prior;
        if (!opt.prior.empty()) {
            prior = io::parse_prior(opt.prior, f.state_count());
            rep.parameters()["prior"] = io::detail::rationals_json(prior);
        }
        if (a.mode == "delta") {
            auto delta = io::parse_delta(opt.delta.empty() ? "uniform" : opt.delta, f.horizon());
            rep.parameters()["delta"] = io::detail::rationals_json(delta.weights());
            v = delta_sufficient(f, g, delta);
            reprice(v, {&f, &g, delta, prior});
        } else if (a.mode == "big-delta") {
            v = big_delta_sufficient(f, g);
            if (v.certificate && v.certificate->failing_period)
                reprice(v, {&f, &g, DiscountFactor::degenerate(f.horizon(), *v.certificate->failing_period), prior});
        } else if (a.mode == "adapted") {
            v = adapted_sufficient(f, g);
        } else {
            throw io::ParseError("--mode", "unknown mode '" + a.mode + "'");
        }
    }
    rep.result()["verdict"] = io::verdict_to_json(v);
    print_verdict(rep.text(), v, states);
    return rep.emit(exit_for(v.status));
}

// ---------------------------------------------------------------------------
// compare-seq

struct SeqArgs {
    std::string coupling;
    std::string f, g;
};

int run_compare_seq(const SeqArgs& a, const Options& opt) {
    Report rep("compare-seq", opt);
    auto hin = load(a.coupling);
    rep.input(hin);
    auto h = in_file(hin.path, [&] { return io::coupling_from_json(hin.document); });
    require_no_violations(hin.path, validate_coupling(h));
    if (!a.f.empty() || !a.g.empty()) {
        if (a.f.empty() || a.g.empty()) throw io::ParseError("--f/--g", "give both marginals or neither");
        auto fin = load(a.f), gin = load(a.g);
        rep.input(fin);
        rep.input(gin);
        auto f = load_experiment(fin), g = load_experiment(gin);
        auto mismatch = check_coupling_marginals(h, f, g);
        if (!mismatch.empty()) throw io::ParseError(hin.path, "marginal mismatch at " + to_string(mismatch.front()));
    }
    auto delta = io::parse_delta(opt.delta.empty() ? "uniform" : opt.delta, h.horizon());
    rep.parameters()["delta"] = io::detail::rationals_json(delta.weights());
    auto report = sequential_most_valuable(h, delta, opt.jobs);

    auto& os = rep.text();
    os << "overall: " << to_string(report.overall.status) << "\n";
    for (const auto& n : report.overall.notes) os << "note: " << n << "\n";
    std::size_t hw = std::string("history").size();
    for (const auto& r : report.rows) hw = std::max(hw, r.history.empty() ? 7 : r.history.size());
    os << std::left << std::setw(8) << "period" << std::setw(static_cast<int>(hw + 2)) << "history"
       << std::setw(24) << "states" << "verdict\n";
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        std::string hist = r.history.empty() ? "(empty)" : r.history;
        std::string verdict = r.evaluated ? to_string(r.verdict.status) : "skipped";
        os << std::setw(8) << r.period << std::setw(static_cast<int>(hw + 2)) << hist << std::setw(24)
           << join_labels(r.states) << verdict;
        if (!r.note.empty()) os << "  (" << r.note << ")";
        os << "\n";
        Json row;
        row["period"] = r.period;
        row["history"] = r.history;
        row["states"] = r.states;
        row["evaluated"] = r.evaluated;
        if (r.evaluated) row["verdict"] = io::verdict_to_json(r.verdict);
        if (!r.note.empty()) row["note"] = r.note;
        rows.push_back(std::move(row));
    }
    os << std::right;
    rep.result()["overall"] = io::verdict_to_json(report.overall);
    rep.result()["rows"] = std::move(rows);
    return rep.emit(exit_for(report.overall.status));
}

// ---------------------------------------------------------------------------
// compare-controlled

struct ControlledArgs {
    std::string f, g;
    std::string arrival;
    std::string kernels;
    std::size_t cap = 20000;
    std::string route = "sequence-form";
    std::size_t iterations = 50;
    std::size_t restarts = 4;
    bool no_enumerate = false;
    bool complete = false;
};

ControlledOptions controlled_options(const ControlledArgs& a, const Options& opt) {
    ControlledOptions o;
    if (a.route == "sequence-form") o.route = ControlledRoute::sequence_form;
    else if (a.route == "fixed-point") o.route = ControlledRoute::fixed_point;
    else throw io::ParseError("--route", "expected sequence-form or fixed-point");
    o.family_cap = a.cap;
    o.iterations = a.iterations;
    o.restarts = a.restarts;
    o.seed = opt.seed;
    o.jobs = opt.jobs;
    o.enumerate_family = !a.no_enumerate;
    return o;
}

int run_arrival(const ControlledArgs& a, const Options& opt) {
    Report rep("compare-controlled", opt);
    auto ain = load(a.arrival);
    rep.input(ain);
    auto params = in_file(ain.path, [&] { return io::arrival_from_json(ain.document); });
    if (!opt.delta.empty()) params.delta = io::parse_delta(opt.delta, 2);
    auto o = controlled_options(a, opt);
    rep.parameters()["arrival"] = io::arrival_to_json(params);
    rep.parameters()["family"] = a.complete ? "complete deterministic" : "dominance-reduced";

    auto v = arrival_verdict(params, o);
    auto lp = arrival_lp_verdict(params, a.complete, o);
    bool agree = lp.status == v.status;
    v.notes.push_back("controlled LP over the " + std::string(a.complete ? "complete" : "dominance-reduced") +
                      " family: " + to_string(lp.status));
    if (lp.status == Status::inconclusive) {
        rep.result()["verdict"] = io::verdict_to_json(lp);
        print_verdict(rep.text(), lp, params.states);
        return rep.emit(exit_inconclusive);
    }
    if (!agree) throw InternalError("closed form and controlled LP disagree on the arrival instance");
    rep.result()["verdict"] = io::verdict_to_json(v);
    rep.result()["lp_verdict"] = io::verdict_to_json(lp);
    print_verdict(rep.text(), v, params.states);
    return rep.emit(exit_for(v.status));
}

int run_compare_controlled(const ControlledArgs& a, const Options& opt) {
    if (!a.arrival.empty()) {
        if (!a.f.empty() || !a.g.empty()) throw io::ParseError("--arrival", "takes no experiment files");
        return run_arrival(a, opt);
    }
    if (a.f.empty() || a.g.empty()) throw io::ParseError("compare-controlled", "need F and G files or --arrival");
    Report rep("compare-controlled", opt);
    auto fin = load(a.f), gin = load(a.g);
    auto f = load_experiment(fin), g = load_experiment(gin);
    if (!f.is_controlled() && !g.is_controlled() && a.kernels.empty()) {
        // Singleton controls: the uncontrolled comparison, verbatim.
        return run_compare({a.f, a.g, "delta"}, opt);
    }
    rep.input(fin);
    rep.input(gin);
    auto o = controlled_options(a, opt);
    std::vector<TestKernel> family;
    if (!a.kernels.empty()) {
        auto kin = load(a.kernels);
        rep.input(kin);
        family = in_file(kin.path, [&] { return io::kernel_family_from_json(kin.document, g); });
        o.family_label = kin.path;
    }
    auto delta = io::parse_delta(opt.delta.empty() ? "uniform" : opt.delta, f.horizon());
    rep.parameters()["delta"] = io::detail::rationals_json(delta.weights());
    rep.parameters()["route"] = a.route;
    rep.parameters()["cap"] = a.cap;
    rep.parameters()["enumerate_family"] = o.enumerate_family;
    auto v = controlled_delta_sufficient(f, g, delta, family, o);
    rep.result()["verdict"] = io::verdict_to_json(v);
    print_verdict(rep.text(), v, f.states());
    return rep.emit(exit_for(v.status));
}

// ---------------------------------------------------------------------------
// bernoulli

struct BernoulliArgs {
    std::string p, q, p2, q2, d2;
    std::vector<std::string> assignments;
};

int run_bernoulli(BernoulliArgs a, const Options& opt) {
    Report rep("bernoulli", opt);
    for (const auto& kv : a.assignments) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw io::ParseError(kv, "expected key=value");
        std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        if (key == "p") a.p = value;
        else if (key == "q") a.q = value;
        else if (key == "p'" || key == "p2") a.p2 = value;
        else if (key == "q'" || key == "q2") a.q2 = value;
        else if (key == "d2") a.d2 = value;
        else throw io::ParseError(kv, "unknown parameter '" + key + "'");
    }
    auto num = [](const std::string& name, const std::string& text) {
        if (text.empty()) throw io::ParseError(name, "missing value");
        Rational r;
        try {
            r = parse_rational(text);
        } catch (const std::invalid_argument& e) {
            throw io::ParseError(name, e.what());
        }
        if (sgn(r) < 0 || r > 1) throw io::ParseError(name, "must lie in [0, 1], got " + to_string(r));
        return r;
    };
    Rational p = num("p", a.p), q = num("q", a.q), p2 = num("p'", a.p2), q2 = num("q'", a.q2), d2 = num("d2", a.d2);
    DiscountFactor delta({1 - d2, d2});
    for (auto [k, val] : {std::pair{"p", &p}, {"q", &q}, {"p'", &p2}, {"q'", &q2}, {"d2", &d2}})
        rep.parameters()[k] = to_string(*val);

    ComparisonVerdict closed;
    try {
        closed = theorem3_verdict({p, q}, {p2, q2}, delta);
    } catch (const std::domain_error& e) {
        throw io::ParseError("bernoulli", e.what());
    }
    std::vector<std::string> scratch;
    auto fb = detail::normalize_signals(p, q, scratch, "p", "q");
    auto gb = detail::normalize_signals(p2, q2, scratch, "p'", "q'");
    auto d = theorem3_conditions(fb, gb, delta);
    auto fe = bernoulli_experiment(fb), ge = bernoulli_experiment(gb);
    auto mps = mps_compare_experiments(fe, ge, delta);
    auto lp = delta_sufficient(fe, ge, delta);
    bool agree = closed.status == mps.status && closed.status == lp.status;

    auto& os = rep.text();
    os << "posteriors of the first state:\n";
    os << "         pi1        pi10       pi11       lambda\n";
    for (auto [name, post] : {std::pair{"f", &d.f}, {"g", &d.g}})
        os << "    " << name << "    " << std::left << std::setw(11) << to_string(post->pi1) << std::setw(11)
           << to_string(post->pi10) << std::setw(11) << to_string(post->pi11) << to_string(post->lambda) << std::right
           << "\n";
    os << "condition (a): " << (d.condition_a ? "holds" : "fails") << "\n";
    os << "fired branch: " << to_string(d.fired) << "\n";
    os << "closed form: " << to_string(closed.status) << "\n";
    if (closed.certificate && !closed.certificate->reason.empty()) os << "  " << closed.certificate->reason << "\n";
    os << "mean-preserving-spread check: " << to_string(mps.status) << "\n";
    os << "garbling LP: " << to_string(lp.status) << "\n";
    os << "agreement: " << (agree ? "yes" : "NO") << "\n";

    auto post_json = [](const BernoulliPosteriors& b) {
        return Json{{"pi1", to_string(b.pi1)}, {"pi10", to_string(b.pi10)}, {"pi11", to_string(b.pi11)},
                    {"lambda", to_string(b.lambda)}};
    };
    rep.result()["posteriors"] = {{"f", post_json(d.f)}, {"g", post_json(d.g)}};
    rep.result()["condition_a"] = d.condition_a;
    rep.result()["branch"] = to_string(d.fired);
    rep.result()["closed_form"] = io::verdict_to_json(closed);
    rep.result()["mps"] = to_string(mps.status);
    rep.result()["lp"] = to_string(lp.status);
    rep.result()["agreement"] = agree;
    if (!agree) {
        rep.emit(exit_internal);
        return exit_internal;
    }
    return rep.emit(exit_for(closed.status));
}

// ---------------------------------------------------------------------------
// audit

struct AuditArgs {
    std::string f, g;
    std::size_t count = 100;
    std::size_t actions = 3;
    long range = 10;
    bool inject = false;
};

int run_audit(const AuditArgs& a, const Options& opt) {
    Report rep("audit", opt);
    if (a.count == 0) throw io::ParseError("--count", "problem count must be at least 1");
    auto fin = load(a.f), gin = load(a.g);
    rep.input(fin);
    rep.input(gin);
    auto f = load_experiment(fin), g = load_experiment(gin);
    auto delta = io::parse_delta(opt.delta.empty() ? "uniform" : opt.delta, f.horizon());
    auto prior = opt.prior.empty() ? uniform_vector(f.state_count()) : io::parse_prior(opt.prior, f.state_count());
    std::vector<std::size_t> control_sizes;
    for (const auto& k : g.control_alphabets()) control_sizes.push_back(k.size());
    auto problems = g.is_controlled()
                        ? random_controlled_problem_suite(opt.seed, a.count, a.actions, f.state_count(), a.range,
                                                          control_sizes)
                        : random_problem_suite(opt.seed, a.count, a.actions, f.state_count(), a.range);
    rep.parameters()["delta"] = io::detail::rationals_json(delta.weights());
    rep.parameters()["prior"] = io::detail::rationals_json(prior);
    rep.parameters()["seed"] = opt.seed;
    rep.parameters()["count"] = a.count;
    rep.parameters()["actions"] = a.actions;
    rep.parameters()["payoff_range"] = a.range;

    auto& os = rep.text();
    if (a.inject) {
        auto v = f.is_controlled() || g.is_controlled() ? controlled_delta_sufficient(f, g, delta)
                                                        : delta_sufficient(f, g, delta);
        if (v.certificate && !v.certificate->payoff.empty()) {
            problems.push_back(certificate_to_decision_problem(*v.certificate, {&f, &g, delta, prior}));
            os << "injected the certificate problem as #" << problems.size() - 1 << "\n";
        } else {
            os << "no certificate to inject: verdict is " << to_string(v.status) << "\n";
        }
        rep.parameters()["injected"] = problems.size() > a.count;
    }
    auto report = dominance_audit(f, g, delta, problems, prior, opt.jobs);
    os << "problems: " << problems.size() << "\n";
    os << "violations: " << report.violations << "\n";
    Json violations = Json::array();
    for (const auto& e : report.entries) {
        if (!e.violation) continue;
        os << "  #" << e.index << ": value under f " << to_string(e.value_f) << " < value under g "
           << to_string(e.value_g) << "\n";
        violations.push_back({{"index", e.index}, {"value_f", to_string(e.value_f)}, {"value_g", to_string(e.value_g)}});
    }
    rep.result()["problems"] = problems.size();
    rep.result()["violations"] = report.violations;
    rep.result()["violating_problems"] = std::move(violations);
    return rep.emit(report.violations == 0 ? exit_sufficient : exit_refuted);
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
    std::vector<std::string> files;
    std::string g;
};

int run_validate(const ValidateArgs& a, const Options& opt) {
    Report rep("validate", opt);
    std::optional<Experiment> g;
    bool ok = true;
    Json files = Json::array();
    auto& os = rep.text();
    for (const auto& path : a.files) {
        std::string kind;
        try {
            auto in = load(path);
            rep.input(in);
            kind = in.document.is_object() ? in.document.value("kind", "") : "";
            if (kind == "experiment") {
                load_experiment(in);
            } else if (kind == "coupling") {
                auto h = in_file(path, [&] { return io::coupling_from_json(in.document); });
                require_no_violations(path, validate_coupling(h));
            } else if (kind == "evolving_experiment") {
                auto e = in_file(path, [&] { return io::evolving_from_json(in.document); });
                require_no_violations(path, validate_evolving(e.experiment));
                in_file(path, [&] { e.paths.validate(e.experiment.state_count()); return 0; });
            } else if (kind == "arrival") {
                in_file(path, [&] { return io::arrival_from_json(in.document); });
            } else if (kind == "kernel_family") {
                if (a.g.empty()) throw io::ParseError(path, "kernel families need --g for the controlled experiment");
                if (!g) g = load_experiment(load(a.g));
                in_file(path, [&] { return io::kernel_family_from_json(in.document, *g); });
            } else {
                throw io::ParseError(path + ": kind", "unknown document kind '" + kind + "'");
            }
            os << path << ": ok (" << kind << ")\n";
            files.push_back({{"path", path}, {"kind", kind}, {"valid", true}});
        } catch (const io::ParseError& e) {
            ok = false;
            os << e.what() << "\n";
            files.push_back({{"path", path}, {"kind", kind}, {"valid", false}, {"error", e.what()}});
        }
    }
    rep.result()["files"] = std::move(files);
    return rep.emit(ok ? 0 : exit_input);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compare multi-period experiments by the value of the information they deliver"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", opt.seed, "Random seed");
    const char* delta_help = "Discount: 1/2,1/2 | uniform[:T] | geometric:r[:T] | degenerate:t[:T]";

    CompareArgs cmp;
    auto* compare = app.add_subcommand("compare", "Compare two uncontrolled experiments");
    compare->add_option("f", cmp.f, "Experiment f (JSON)")->required();
    compare->add_option("g", cmp.g, "Experiment g (JSON)")->required();
    compare->add_option("--mode", cmp.mode, "Comparison")->check(CLI::IsMember({"delta", "big-delta", "adapted", "evolving"}));
    compare->add_option("--delta", opt.delta, delta_help);
    compare->add_option("--prior", opt.prior, "Prior for the separating problem, e.g. 1/3,2/3");

    SeqArgs seq;
    auto* compare_seq = app.add_subcommand("compare-seq", "Sequential comparison along a coupling");
    compare_seq->add_option("coupling", seq.coupling, "Coupling (JSON)")->required();
    compare_seq->add_option("--f", seq.f, "Expected x marginal (JSON)");
    compare_seq->add_option("--g", seq.g, "Expected y marginal (JSON)");
    compare_seq->add_option("--delta", opt.delta, delta_help);

    ControlledArgs ctl;
    auto* controlled = app.add_subcommand("compare-controlled", "Compare controlled experiments over test kernels");
    controlled->add_option("f", ctl.f, "Experiment f (JSON)");
    controlled->add_option("g", ctl.g, "Experiment g (JSON)");
    controlled->add_option("--arrival", ctl.arrival, "Arrival-time parameters (JSON) instead of F and G");
    controlled->add_option("--kernels", ctl.kernels, "Test-kernel family (JSON)");
    controlled->add_option("--cap", ctl.cap, "Largest deterministic family to enumerate");
    controlled->add_option("--route", ctl.route, "sequence-form or fixed-point")
        ->check(CLI::IsMember({"sequence-form", "fixed-point"}));
    controlled->add_option("--iterations", ctl.iterations, "Fixed-point iterations per restart");
    controlled->add_option("--restarts", ctl.restarts, "Fixed-point restarts");
    controlled->add_flag("--no-enumerate", ctl.no_enumerate, "Test constant and supplied kernels only");
    controlled->add_flag("--complete", ctl.complete, "Arrival: enumerate the complete deterministic family");
    controlled->add_option("--delta", opt.delta, delta_help);

    BernoulliArgs ber;
    auto* bernoulli = app.add_subcommand("bernoulli", "Closed-form two-period Bernoulli comparison");
    bernoulli->add_option("assignments", ber.assignments, "p=.. q=.. p'=.. q'=.. d2=..");
    bernoulli->add_option("--p", ber.p, "First-draw accuracy of f");
    bernoulli->add_option("--q", ber.q, "Second-draw accuracy of f");
    bernoulli->add_option("--p2", ber.p2, "First-draw accuracy of g");
    bernoulli->add_option("--q2", ber.q2, "Second-draw accuracy of g");
    bernoulli->add_option("--d2", ber.d2, "Weight on period 2");

    AuditArgs aud;
    auto* audit = app.add_subcommand("audit", "Random decision problems: does f ever lose to g?");
    audit->add_option("f", aud.f, "Experiment f (JSON)")->required();
    audit->add_option("g", aud.g, "Experiment g (JSON)")->required();
    audit->add_option("--count", aud.count, "Number of problems");
    audit->add_option("--actions", aud.actions, "Actions per problem")->check(CLI::PositiveNumber);
    audit->add_option("--range", aud.range, "Payoffs drawn from [-range, range]")->check(CLI::NonNegativeNumber);
    audit->add_flag("--inject-certificate", aud.inject, "Append the separating problem of a refutation");
    audit->add_option("--delta", opt.delta, delta_help);
    audit->add_option("--prior", opt.prior, "Prior, e.g. 1/2,1/2");

    ValidateArgs val;
    auto* validate = app.add_subcommand("validate", "Check input files");
    validate->add_option("files", val.files, "Files to check")->required();
    validate->add_option("--g", val.g, "Controlled experiment for kernel families");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_input;
    }

    try {
        if (compare->parsed()) return run_compare(cmp, opt);
        if (compare_seq->parsed()) return run_compare_seq(seq, opt);
        if (controlled->parsed()) return run_compare_controlled(ctl, opt);
        if (bernoulli->parsed()) return run_bernoulli(ber, opt);
        if (audit->parsed()) return run_audit(aud, opt);
        if (validate->parsed()) return run_validate(val, opt);
    } catch (const io::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
    return exit_internal;
}
