// Release acceptance gate.  Runs every desk-scale check the library promises
// at its stated tolerance and frozen seed, prints one verdict line per
// criterion, and exits nonzero if any criterion fails.  Unlike the unit
// suite this exercises full sample sizes (n up to 1e6) and the packaged
// verification suite through the CLI, so a run takes tens of minutes.
#include <spider_linnik/analytic.hpp>
#include <spider_linnik/identities.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using spider_linnik::RunOptions;
using spider_linnik::TestReport;

constexpr std::uint64_t kBaseSeed = 20240817;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void fail(std::string note) {
        pass = false;
        notes.push_back(std::move(note));
    }
};

TestReport run(const std::string& id, nlohmann::ordered_json params, std::uint64_t n,
               std::uint64_t seed_offset) {
    RunOptions opt;
    opt.n = n;
    opt.seed = kBaseSeed + seed_offset;
    return spider_linnik::run_identity(id, params, opt);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// Gates every report member whose name starts with `prefix` (empty prefix:
// all members).  Failures are recorded as "tag: name observed vs allowance".
void gate_members(Outcome& out, const TestReport& rep, const std::string& prefix,
                  const std::string& tag) {
    bool matched = false;
    for (const auto& m : rep.details.at("members")) {
        const std::string name = m.at("name").get<std::string>();
        if (name.rfind(prefix, 0) != 0) continue;
        matched = true;
        if (!m.at("pass").get<bool>())
            out.fail(tag + ": " + name + " observed=" + fmt(m.at("observed").get<double>()) +
                     " allowance=" + fmt(m.at("allowance").get<double>()));
    }
    if (!matched) out.fail(tag + ": no member matches '" + prefix + "'");
}

void gate_report(Outcome& out, const TestReport& rep, const std::string& tag) {
    gate_members(out, rep, "", tag);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- criteria -------------------------------------------------------------

// 1, 2: closed-form Laplace transform of the two canonical alpha = 1/2
// marginals at t = 1, lambda in {0.5, 1, 2}, n = 1e6, within 3 SE, under a
// one-minute budget.
Outcome criterion_marginal_lt(const std::string& id, std::uint64_t seed_offset) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const TestReport rep = run(id, {{"t", 1.0}}, 1000000, seed_offset);
    const double elapsed = seconds_since(t0);
    gate_members(out, rep, "lt construction l=", id);
    if (elapsed >= 60.0) out.fail(id + ": runtime " + fmt(elapsed) + "s exceeds 60s");
    return out;
}

// 3: construction vs exact beta-gamma sampler, two-sample KS at level 0.01,
// n = 1e5, t in {0.5, 1, 2}, both canonical marginals.
Outcome criterion_construction_ks() {
    Outcome out;
    int offset = 31;
    for (const std::string id : {"marginal1", "marginal2"})
        for (double t : {0.5, 1.0, 2.0}) {
            const TestReport rep = run(id, {{"t", t}}, 100000, offset++);
            gate_members(out, rep, "ks construction vs exact", id + " t=" + fmt(t));
        }
    return out;
}

// 4: gamma-time-change functional battery for m in {1, 2} at n = 1e6
// (includes the F = g = 1 total-mass member).
Outcome criterion_time_change() {
    Outcome out;
    gate_report(out, run("thm2", {{"m", 1.0}}, 1000000, 41), "m=1");
    gate_report(out, run("thm2", {{"m", 2.0}}, 1000000, 42), "m=2");
    return out;
}

// 5: factorization battery at n = 1e6: nu.C(gamma_t) vs Gamma(alpha t) KS,
// independence correlation bounds, rescaled-sum functional members.
Outcome criterion_factorization() {
    Outcome out;
    gate_report(out, run("cor1", {}, 1000000, 5), "cor1");
    return out;
}

// 6: small-time generator limit at t = 0.01 (3 SE + 5% bias allowance) and
// the Levy-exponent identity at sigma = 1, both n = 1e6.
Outcome criterion_levy() {
    Outcome out;
    gate_report(out, run("levy_limit", {{"t_small", 0.01}}, 1000000, 61), "limit");
    gate_report(out, run("levy_exponent", {}, 1000000, 62), "exponent");
    return out;
}

// 7: stable density integrates to one within 1e-5 for alpha in
// {0.3, 0.5, 0.7}; at alpha = 1/2 it matches the closed form
// (2 sqrt(pi))^{-1} s^{-3/2} exp(-1/(4s)) within 1e-6 on s in {1/4, 1, 4}.
Outcome criterion_stable_density() {
    Outcome out;
    for (double alpha : {0.3, 0.5, 0.7}) {
        const double mass = spider_linnik::stable_density_mass(alpha);
        if (!(std::abs(mass - 1.0) <= 1e-5))
            out.fail("mass alpha=" + fmt(alpha) + ": " + fmt(mass));
    }
    const double c = 0.5 / std::sqrt(M_PI);
    for (double s : {0.25, 1.0, 4.0}) {
        const double got = spider_linnik::stable_density(0.5, s);
        const double want = c * std::pow(s, -1.5) * std::exp(-0.25 / s);
        if (!(std::abs(got - want) <= 1e-6))
            out.fail("alpha=1/2 s=" + fmt(s) + ": |" + fmt(got) + " - " + fmt(want) + "| > 1e-6");
    }
    return out;
}

// 8: moment identity of the conditional-expectation kernel,
// integral h_{alpha t} f_R = Gamma(t+1)/Gamma(alpha t + 1), within 1e-4 on a
// 3 x 3 (alpha, t) grid; and the two general-alpha representation routes
// (direct weight vs h-variant) agree within 3 SE at n = 1e5.
Outcome criterion_h_moment_and_routes() {
    Outcome out;
    for (double alpha : {0.3, 0.5, 0.7})
        for (double t : {0.5, 1.0, 2.0}) {
            const double got = spider_linnik::h_alpha_t_moment(alpha, t);
            const double want =
                std::exp(std::lgamma(t + 1.0) - std::lgamma(alpha * t + 1.0));
            if (!(std::abs(got - want) <= 1e-4))
                out.fail("moment alpha=" + fmt(alpha) + " t=" + fmt(t) + ": |" + fmt(got) +
                         " - " + fmt(want) + "| > 1e-4");
        }
    const TestReport rep = run("marginal_alpha", {}, 100000, 8);
    gate_members(out, rep, "routes agree l=", "routes");
    return out;
}

// 9: spider occupation at alpha = 1/2 with 1e4 paths of 1e4 steps: arcsine
// law for p = (1/2, 1/2), joint occupation/local-time representation for
// p = (3/4, 1/4) and the three-ray case p = (1/2, 1/4, 1/4), and the bridge
// occupation uniform law, all KS at level 0.01.
//
// Known limitation, kept honest rather than retuned: a walk of 1e4 steps
// puts probability ~0.025 on never visiting a weight-1/4 ray, while the
// limit law has none, so the per-coordinate KS distance has a floor at that
// atom -- above the ~0.023 allowance this path count implies.  The atom
// shrinks like 1/sqrt(n_steps) (the packaged suite runs the same check at
// 4e4 steps, where it passes); at 1e4 steps the coordinate members fail for
// most seeds.
Outcome criterion_spider() {
    Outcome out;
    const nlohmann::ordered_json steps{{"n_steps", 10000}};

    auto sym = steps;
    const TestReport arcsine = run("spider_occupation", sym, 10000, 91);
    gate_members(out, arcsine, "arcsine closed form ks", "arcsine");

    auto two = steps;
    two["p"] = {0.75, 0.25};
    const TestReport rep2 = run("spider_occupation", two, 10000, 92);
    gate_members(out, rep2, "coord ", "joint rep p=(3/4,1/4)");
    gate_members(out, rep2, "local time ks", "joint rep p=(3/4,1/4)");

    auto three = steps;
    three["p"] = {0.5, 0.25, 0.25};
    const TestReport rep3 = run("spider_occupation", three, 10000, 93);
    gate_members(out, rep3, "coord ", "joint rep p=(1/2,1/4,1/4)");
    gate_members(out, rep3, "local time ks", "joint rep p=(1/2,1/4,1/4)");

    const TestReport bridge = run("spider_bridge", steps, 10000, 94);
    gate_members(out, bridge, "uniform occupation ks", "bridge");

    bool coord_failure = false;
    for (const auto& note : out.notes)
        coord_failure = coord_failure || note.find("coord") != std::string::npos;
    if (coord_failure)
        out.notes.push_back(
            "note: coordinate ks is floored at the walk's zero-occupation atom "
            "(~0.025 for a weight-1/4 ray at 1e4 steps, allowance ~0.023); the "
            "atom decays like 1/sqrt(n_steps) and the same check passes at 4e4 "
            "steps");
    return out;
}

// 10: exponential-time occupation battery at n = 1e5 (bin-wise conditional
// Laplace check covering >= 90% of local-time mass) and the killed-walk
// local time vs Exp(1) KS at 1e4 paths of 1e4 steps.
Outcome criterion_occupation() {
    Outcome out;
    gate_report(out, run("occupation_exp", {}, 100000, 101), "occupation_exp");
    gate_report(out,
                run("killed_local_time", {{"theta", 1.0}, {"n_steps", 10000}}, 10000, 102),
                "killed");
    return out;
}

// 11: the packaged verification suite completes through the CLI with exit
// code 0 inside a 30-minute budget.
Outcome criterion_full_suite() {
    Outcome out;
    const std::string log = "acceptance_suite_log.txt";
    const std::string cmd = std::string("\"") + CLI_BINARY_PATH + "\" suite \"" +
                            SUITE_CONFIG_PATH + "\" > " + log + " 2>&1";
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    const double elapsed = seconds_since(t0);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code != 0) out.fail("suite exit code " + std::to_string(code) + ", log " + log);
    if (elapsed >= 1800.0) out.fail("suite runtime " + fmt(elapsed) + "s exceeds 1800s");
    if (out.pass) out.notes.push_back("suite completed in " + fmt(elapsed) + "s, log " + log);
    return out;
}

}  // namespace

int main() {
    struct Entry {
        int index;
        const char* label;
        Outcome (*fn)();
    };
    // 1 and 2 share an implementation; wrap them as captureless lambdas.
    static const Entry entries[] = {
        {1, "marginal1 laplace transform t=1, lambda {0.5,1,2}, n=1e6, <60s",
         [] { return criterion_marginal_lt("marginal1", 1); }},
        {2, "marginal2 laplace transform t=1, lambda {0.5,1,2}, n=1e6, <60s",
         [] { return criterion_marginal_lt("marginal2", 2); }},
        {3, "construction vs exact sampler ks, t {0.5,1,2}, n=1e5", criterion_construction_ks},
        {4, "gamma-time-change functional battery, m {1,2}, n=1e6", criterion_time_change},
        {5, "factorization battery: gamma ks, independence, rescaled sum, n=1e6",
         criterion_factorization},
        {6, "small-time generator limit t=0.01 and levy exponent, n=1e6", criterion_levy},
        {7, "stable density mass and alpha=1/2 closed form", criterion_stable_density},
        {8, "h-kernel moment grid 3x3 and representation routes, n=1e5",
         criterion_h_moment_and_routes},
        {9, "spider arcsine, joint representation, bridge; 1e4 paths x 1e4 steps",
         criterion_spider},
        {10, "exponential-time occupation battery and killed local time", criterion_occupation},
        {11, "packaged suite via cli, exit 0, under 30 minutes", criterion_full_suite},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out.fail(std::string("exception: ") + ex.what());
        }
        const double elapsed = seconds_since(t0);
        failures += out.pass ? 0 : 1;
        std::printf("[%s] %2d %s  (%.1fs)\n", out.pass ? "PASS" : "FAIL", e.index, e.label,
                    elapsed);
        for (const auto& note : out.notes) std::printf("         - %s\n", note.c_str());
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("acceptance: all 11 criteria passed\n");
    } else {
        std::printf("acceptance: %d of 11 criteria failed\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
