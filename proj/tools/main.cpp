// Command-line front end: draw samples, evaluate densities, run identity
// verifiers, and execute TOML-configured suites.  Exit codes: 0 success,
// 1 statistical failure, 2 usage/configuration error.

#include <CLI11.hpp>

#include <spider_linnik/analytic.hpp>
#include <spider_linnik/identities.hpp>
#include <spider_linnik/report.hpp>
#include <spider_linnik/samplers.hpp>
#include <spider_linnik/spider.hpp>
#include <spider_linnik/suite.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace spider_linnik;

constexpr std::uint64_t kDefaultSeed = 20240817;

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("SPIDER_LINNIK_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != std::string(raw).size())
            throw std::invalid_argument("trailing characters");
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw std::invalid_argument(
            "SPIDER_LINNIK_SEED must be a non-negative integer, got '" +
            std::string(raw) + "'");
    }
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out.push_back(',');
        out += num(v[i]);
    }
    return out;
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open output file '" + path + "'");
    return file;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------
struct SampleArgs {
    std::string law;
    double alpha = 0.5;
    std::vector<double> mu, nu, p;
    double t = 1.0;
    double u = 1.0;
    double shape_a = 1.0, shape_b = 1.0;
    double theta = 1.0;
    std::int64_t n_steps = 10000;
    std::uint64_t n = 1000;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_sample(const SampleArgs& a) {
    const std::uint64_t seed = a.seed ? *a.seed : env_seed().value_or(kDefaultSeed);
    RandomSource rng(seed, 0);
    std::ofstream file;
    std::ostream& os = open_sink(a.out, file);

    std::ostringstream meta;
    meta << "# spider-linnik sample law=" << a.law;
    const auto put_vec = [&meta](const char* name, const std::vector<double>& v) {
        meta << " " << name << "=";
        for (std::size_t i = 0; i < v.size(); ++i) meta << (i ? "," : "") << num(v[i]);
    };

    std::string columns;
    std::function<void(std::ostream&)> row;

    if (a.law == "stable") {
        meta << " alpha=" << num(a.alpha);
        columns = "value";
        row = [&](std::ostream& o) { o << num(sample_stable(a.alpha, rng)); };
    } else if (a.law == "tilted") {
        const double nu0 = a.nu.empty() ? 1.0 : a.nu.front();
        meta << " alpha=" << num(a.alpha) << " nu=" << num(nu0) << " u=" << num(a.u);
        columns = "value";
        row = [&, nu0](std::ostream& o) {
            o << num(sample_tilted_stable({a.alpha, nu0, a.u}, rng));
        };
    } else if (a.law == "gamma") {
        meta << " shape=" << num(a.shape_a);
        columns = "value";
        row = [&](std::ostream& o) { o << num(rng.gamma(a.shape_a)); };
    } else if (a.law == "beta") {
        meta << " a=" << num(a.shape_a) << " b=" << num(a.shape_b);
        columns = "value";
        row = [&](std::ostream& o) { o << num(rng.beta(a.shape_a, a.shape_b)); };
    } else if (a.law == "exponential") {
        columns = "value";
        row = [&](std::ostream& o) { o << num(rng.exponential()); };
    } else if (a.law == "lamperti") {
        meta << " alpha=" << num(a.alpha);
        columns = "value";
        row = [&](std::ostream& o) { o << num(sample_lamperti_ratio(a.alpha, rng)); };
    } else if (a.law == "exact1" || a.law == "exact2") {
        meta << " t=" << num(a.t);
        columns = "value";
        const int which = a.law == "exact1" ? 1 : 2;
        row = [&, which](std::ostream& o) {
            o << num(sample_exact_marginal(which, a.t, rng));
        };
    } else if (a.law == "linnik") {
        std::vector<double> nu = a.nu.empty() ? std::vector<double>{0.25, 0.25} : a.nu;
        std::vector<double> mu = a.mu.empty() ? std::vector<double>(nu.size(), 1.0) : a.mu;
        LinnikSpec spec{a.alpha, mu, nu, a.t};
        spec.validate();
        if (mu.size() != nu.size())
            throw std::invalid_argument("sample linnik: mu must match nu in size");
        meta << " alpha=" << num(a.alpha);
        put_vec("mu", mu);
        put_vec("nu", nu);
        meta << " t=" << num(a.t);
        for (std::size_t i = 0; i < nu.size(); ++i)
            columns += "component_" + std::to_string(i + 1) + ",";
        columns += "gamma_time,total";
        row = [&, spec, mu](std::ostream& o) {
            const LinnikDraw d = sample_linnik_marginal(spec, rng);
            for (double c : d.components) o << num(c) << ",";
            o << num(d.gamma_time) << "," << num(d.weighted_total(mu));
        };
    } else if (a.law == "occupation") {
        std::vector<double> p = a.p.empty() ? std::vector<double>{0.5, 0.5} : a.p;
        meta << " alpha=" << num(a.alpha);
        put_vec("p", p);
        for (std::size_t i = 0; i < p.size(); ++i)
            columns += "fraction_" + std::to_string(i + 1) + ",";
        columns += "local_time_pow";
        row = [&, p](std::ostream& o) {
            const OccupationDraw d = sample_spider_occupation(a.alpha, p, rng);
            for (double f : d.fractions) o << num(f) << ",";
            o << num(d.local_time_pow);
        };
    } else if (a.law == "spider" || a.law == "bridge" || a.law == "killed") {
        SpiderConfig cfg;
        cfg.p = a.p.empty() ? std::vector<double>{0.5, 0.5} : a.p;
        cfg.n_steps = a.n_steps;
        cfg.validate();
        put_vec("p", cfg.p);
        meta << " n_steps=" << cfg.n_steps;
        if (a.law == "killed") meta << " theta=" << num(a.theta);
        for (std::size_t i = 0; i < cfg.p.size(); ++i)
            columns += "occupation_" + std::to_string(i + 1) + ",";
        if (a.law == "killed") {
            columns += "zero_visits,last_zero_time,kill_time";
            row = [&, cfg](std::ostream& o) {
                const KilledSpiderPath k = simulate_killed_spider(cfg, a.theta, rng);
                for (std::int64_t c : k.to_last_zero.occupation) o << c << ",";
                o << k.to_last_zero.zero_visits << "," << k.last_zero_time << ","
                  << k.kill_time;
            };
        } else {
            columns += "zero_visits,end_ray,end_distance";
            const bool is_bridge = a.law == "bridge";
            row = [&, cfg, is_bridge](std::ostream& o) {
                const SpiderPathSummary s =
                    is_bridge ? simulate_spider_bridge(cfg, rng) : simulate_spider(cfg, rng);
                for (std::int64_t c : s.occupation) o << c << ",";
                o << s.zero_visits << "," << s.end_ray << "," << s.end_distance;
            };
        }
    } else {
        throw std::invalid_argument(
            "unknown law '" + a.law +
            "' (known: stable tilted gamma beta exponential lamperti exact1 exact2 "
            "linnik occupation spider bridge killed)");
    }

    meta << " n=" << a.n << " seed=" << seed;
    os << meta.str() << "\n" << columns << "\n";
    for (std::uint64_t i = 0; i < a.n; ++i) {
        row(os);
        os << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------
struct DensityArgs {
    std::string which;
    double alpha = 0.5;
    std::vector<double> mu, nu;
    double t = 1.0;
    double r = 1.0;
    std::vector<double> x;
    std::uint64_t mc_n = 100000;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_density(const DensityArgs& a) {
    if (a.x.empty())
        throw std::invalid_argument("density: provide evaluation points via --x");
    std::ofstream file;
    std::ostream& os = open_sink(a.out, file);

    if (a.which == "stable") {
        os << "# density stable alpha=" << num(a.alpha) << "\nx,value\n";
        for (double x : a.x) os << num(x) << "," << num(stable_density(a.alpha, x)) << "\n";
    } else if (a.which == "lamperti") {
        os << "# density lamperti alpha=" << num(a.alpha) << "\nx,value\n";
        for (double x : a.x)
            os << num(x) << "," << num(lamperti_density(a.alpha, x)) << "\n";
    } else if (a.which == "conditional") {
        os << "# density conditional alpha=" << num(a.alpha) << " r=" << num(a.r)
           << "\nx,value\n";
        for (double x : a.x)
            os << num(x) << "," << num(conditional_density_tprime(a.alpha, a.r, x)) << "\n";
    } else if (a.which == "h") {
        os << "# density h alpha=" << num(a.alpha) << " t=" << num(a.t) << "\nx,value\n";
        for (double x : a.x) os << num(x) << "," << num(h_alpha_t(a.alpha, a.t, x)) << "\n";
    } else if (a.which == "levy") {
        if (a.mu.empty() || a.nu.empty())
            throw std::invalid_argument("density levy: provide --mu and --nu");
        const std::uint64_t seed = a.seed ? *a.seed : env_seed().value_or(kDefaultSeed);
        RandomSource rng(seed, 0);
        os << "# density levy alpha=" << num(a.alpha) << " mu=" << join(a.mu)
           << " nu=" << join(a.nu) << " mc_n=" << a.mc_n << " seed=" << seed
           << "\nx,value,std_error\n";
        for (double x : a.x) {
            LevyQuery q;
            q.alpha = a.alpha;
            q.mu = a.mu;
            q.nu = a.nu;
            q.x = x;
            q.mc_n = a.mc_n;
            const LevyDensityResult res = levy_density(q, &rng);
            os << num(x) << "," << num(res.value) << "," << num(res.std_error) << "\n";
        }
    } else if (a.which == "linnik-lt") {
        if (a.mu.empty() || a.nu.empty())
            throw std::invalid_argument("density linnik-lt: provide --mu and --nu");
        LinnikSpec spec{a.alpha, a.mu, a.nu, a.t};
        spec.validate();
        os << "# density linnik-lt alpha=" << num(a.alpha) << " mu=" << join(a.mu)
           << " nu=" << join(a.nu) << " t=" << num(a.t) << "\nx,value\n";
        for (double x : a.x) os << num(x) << "," << num(linnik_laplace(spec, x)) << "\n";
    } else {
        throw std::invalid_argument(
            "unknown density '" + a.which +
            "' (known: stable lamperti conditional h levy linnik-lt)");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------
struct VerifyArgs {
    std::string id;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    std::uint64_t n = 100000;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out;
};

int cmd_verify(const VerifyArgs& a) {
    RunOptions opt;
    opt.n = a.n;
    opt.seed = a.seed ? *a.seed : env_seed().value_or(kDefaultSeed);
    opt.threads = a.threads;
    const TestReport report = run_identity(a.id, a.params, opt);
    const std::string out = a.out.empty() ? a.id + "_report.json" : a.out;
    write_report_json(report, out);
    std::cout << (report.pass ? "PASS " : "FAIL ") << a.id << " statistic "
              << report.statistic << " (threshold " << report.threshold << "), report: "
              << out << "\n";
    return report.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// suite
// ---------------------------------------------------------------------------
int cmd_suite(const std::string& config_path, int threads) {
    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("cannot read config file '" + config_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    SuiteConfig cfg = suite_from_toml(text);
    // The env seed replaces only a defaulted master_seed, never an explicit one.
    if (const auto env = env_seed(); env && !parse_toml(text).contains("master_seed"))
        cfg.master_seed = *env;

    const SuiteResult result = run_suite(cfg, threads, &std::cout);
    std::cout << (result.all_pass ? "suite PASS" : "suite FAIL") << " ("
              << result.reports.size() << " reports in " << cfg.output_path << ")\n";
    return result.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tilted-stable / generalized-Linnik / Bessel-spider toolkit"};
    app.require_subcommand(1);
    int exit_code = 0;

    // --- sample ---
    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "draw from a registered law as CSV");
    sample->add_option("law", sa.law, "law name")->required();
    sample->add_option("--alpha", sa.alpha, "stability index in (0,1)");
    sample->add_option("--mu", sa.mu, "mu vector")->delimiter(',');
    sample->add_option("--nu", sa.nu, "nu vector")->delimiter(',');
    sample->add_option("--p", sa.p, "ray probabilities")->delimiter(',');
    sample->add_option("--t", sa.t, "gamma-clock time");
    sample->add_option("--u", sa.u, "tilted-stable time parameter");
    sample->add_option("--a", sa.shape_a, "gamma/beta first shape");
    sample->add_option("--b", sa.shape_b, "beta second shape");
    sample->add_option("--theta", sa.theta, "kill rate");
    sample->add_option("--n-steps", sa.n_steps, "walk steps (even)");
    sample->add_option("--n", sa.n, "number of draws");
    std::uint64_t sample_seed = 0;
    auto* sample_seed_opt = sample->add_option("--seed", sample_seed, "RNG seed");
    sample->add_option("--out", sa.out, "output file (default stdout)");

    // --- density ---
    DensityArgs da;
    auto* density = app.add_subcommand("density", "evaluate closed-form densities as CSV");
    density->add_option("which", da.which, "density name")->required();
    density->add_option("--alpha", da.alpha, "stability index in (0,1)");
    density->add_option("--mu", da.mu, "mu vector")->delimiter(',');
    density->add_option("--nu", da.nu, "nu vector")->delimiter(',');
    density->add_option("--t", da.t, "time parameter");
    density->add_option("--r", da.r, "conditioning ratio for 'conditional'");
    density->add_option("--x", da.x, "evaluation points")->delimiter(',');
    density->add_option("--mc-n", da.mc_n, "MC draws for 'levy'");
    std::uint64_t density_seed = 0;
    auto* density_seed_opt = density->add_option("--seed", density_seed, "RNG seed");
    density->add_option("--out", da.out, "output file (default stdout)");

    // --- verify ---
    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run one identity battery");
    verify->add_option("id", va.id, "identity id (see 'catalog')")->required();
    double v_alpha = 0, v_t = 0, v_m = 0, v_tsmall = 0, v_theta = 0;
    std::vector<double> v_mu, v_nu, v_p, v_lambda, v_lambdas;
    std::int64_t v_nsteps = 0;
    auto* o_alpha = verify->add_option("--alpha", v_alpha, "stability index");
    auto* o_t = verify->add_option("--t", v_t, "gamma-clock time");
    auto* o_m = verify->add_option("--m", v_m, "clock divisor");
    auto* o_tsmall = verify->add_option("--t-small", v_tsmall, "small-t clock");
    auto* o_theta = verify->add_option("--theta", v_theta, "kill rate");
    auto* o_mu = verify->add_option("--mu", v_mu, "mu vector")->delimiter(',');
    auto* o_nu = verify->add_option("--nu", v_nu, "nu vector")->delimiter(',');
    auto* o_p = verify->add_option("--p", v_p, "ray probabilities")->delimiter(',');
    auto* o_lambda = verify->add_option("--lambda", v_lambda, "per-ray lambda vector")
                         ->delimiter(',');
    auto* o_lambdas =
        verify->add_option("--lambdas", v_lambdas, "lambda grid")->delimiter(',');
    auto* o_nsteps = verify->add_option("--n-steps", v_nsteps, "walk steps (even)");
    verify->add_option("--n", va.n, "draws / paths");
    std::uint64_t verify_seed = 0;
    auto* verify_seed_opt = verify->add_option("--seed", verify_seed, "RNG seed");
    verify->add_option("--threads", va.threads, "worker threads (0 = hardware)");
    verify->add_option("--out", va.out, "report path (default <id>_report.json)");

    // --- suite ---
    std::string suite_config;
    int suite_threads = 0;
    auto* suite = app.add_subcommand("suite", "run a TOML-configured identity suite");
    suite->add_option("config", suite_config, "TOML config path")->required();
    suite->add_option("--threads", suite_threads, "worker threads (0 = hardware)");

    // --- catalog ---
    auto* catalog = app.add_subcommand("catalog", "list registered identity ids");

    sample->callback([&]() {
        if (sample_seed_opt->count() > 0) sa.seed = sample_seed;
        exit_code = cmd_sample(sa);
    });
    density->callback([&]() {
        if (density_seed_opt->count() > 0) da.seed = density_seed;
        exit_code = cmd_density(da);
    });
    verify->callback([&]() {
        if (verify_seed_opt->count() > 0) va.seed = verify_seed;
        if (o_alpha->count()) va.params["alpha"] = v_alpha;
        if (o_t->count()) va.params["t"] = v_t;
        if (o_m->count()) va.params["m"] = v_m;
        if (o_tsmall->count()) va.params["t_small"] = v_tsmall;
        if (o_theta->count()) va.params["theta"] = v_theta;
        if (o_mu->count()) va.params["mu"] = v_mu;
        if (o_nu->count()) va.params["nu"] = v_nu;
        if (o_p->count()) va.params["p"] = v_p;
        if (o_lambda->count()) va.params["lambda"] = v_lambda;
        if (o_lambdas->count()) va.params["lambdas"] = v_lambdas;
        if (o_nsteps->count()) va.params["n_steps"] = v_nsteps;
        exit_code = cmd_verify(va);
    });
    suite->callback([&]() { exit_code = cmd_suite(suite_config, suite_threads); });
    catalog->callback([&]() {
        for (const auto& info : identity_catalog())
            std::cout << info.id << "  " << info.summary << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // bad usage is a config error
    } catch (const toml_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
