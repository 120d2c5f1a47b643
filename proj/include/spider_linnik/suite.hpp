#pragma once

// Suite configuration: a TOML file describing which identity batteries to run,
// with optional t/alpha sweeps per entry, plus the sequential runner that
// writes one JSON report per job and a one-row-per-member summary.

#include "identities.hpp"
#include "report.hpp"
#include "toml_lite.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spider_linnik {

struct SuiteEntry {
    std::string identity_id;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    std::uint64_t n = 100000;
    std::vector<double> t_values;      // empty: run params as-is
    std::vector<double> alpha_values;  // empty: run params as-is
};

struct SuiteConfig {
    std::uint64_t master_seed = 20240817;
    std::string output_path = "reports";
    std::string format = "csv";  // summary format: "csv" or "json"
    std::vector<SuiteEntry> identities;
};

namespace detail {

inline bool catalog_has(const std::string& id) {
    for (const auto& info : identity_catalog())
        if (info.id == id) return true;
    return false;
}

inline std::uint64_t to_u64(const nlohmann::ordered_json& v, const std::string& what) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw std::invalid_argument("suite config: " + what +
                                    " must be a non-negative integer");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
}

inline std::vector<double> to_num_vec(const nlohmann::ordered_json& v,
                                      const std::string& what) {
    if (!v.is_array())
        throw std::invalid_argument("suite config: " + what + " must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw std::invalid_argument("suite config: " + what + " entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace detail

inline SuiteConfig suite_from_toml(const std::string& text) {
    const nlohmann::ordered_json doc = parse_toml(text);
    SuiteConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "master_seed") {
            cfg.master_seed = detail::to_u64(value, "master_seed");
        } else if (key == "output_path") {
            if (!value.is_string())
                throw std::invalid_argument("suite config: output_path must be a string");
            cfg.output_path = value.get<std::string>();
        } else if (key == "format") {
            if (!value.is_string() ||
                (value.get<std::string>() != "csv" && value.get<std::string>() != "json"))
                throw std::invalid_argument(
                    "suite config: format must be \"csv\" or \"json\"");
            cfg.format = value.get<std::string>();
        } else if (key == "identity") {
            if (!value.is_array())
                throw std::invalid_argument(
                    "suite config: identity must be declared as [[identity]] entries");
            for (const auto& entry : value) {
                SuiteEntry e;
                for (const auto& [ekey, evalue] : entry.items()) {
                    if (ekey == "id" || ekey == "identity_id") {
                        if (!evalue.is_string())
                            throw std::invalid_argument("suite config: id must be a string");
                        e.identity_id = evalue.get<std::string>();
                    } else if (ekey == "n") {
                        e.n = detail::to_u64(evalue, "identity n");
                    } else if (ekey == "params") {
                        if (!evalue.is_object())
                            throw std::invalid_argument(
                                "suite config: params must be a table");
                        e.params = evalue;
                    } else if (ekey == "t_values") {
                        e.t_values = detail::to_num_vec(evalue, "t_values");
                    } else if (ekey == "alpha_values") {
                        e.alpha_values = detail::to_num_vec(evalue, "alpha_values");
                    } else {
                        throw std::invalid_argument(
                            "suite config: unknown identity key '" + ekey + "'");
                    }
                }
                if (e.identity_id.empty())
                    throw std::invalid_argument(
                        "suite config: every [[identity]] entry needs an id");
                if (!detail::catalog_has(e.identity_id))
                    throw std::invalid_argument("suite config: unknown identity id '" +
                                                e.identity_id + "'");
                cfg.identities.push_back(std::move(e));
            }
        } else {
            throw std::invalid_argument("suite config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

struct SuiteJob {
    std::string identity_id;
    nlohmann::ordered_json params;
    RunOptions options;
};

// One job per (entry, t, alpha) combination; sweep values are merged into the
// params map.  Job seeds derive from the master seed and the job index, so a
// config is reproducible as a whole.
inline std::vector<SuiteJob> expand_suite(const SuiteConfig& cfg, int threads = 0) {
    std::vector<SuiteJob> jobs;
    for (const auto& entry : cfg.identities) {
        const std::vector<double> ts =
            entry.t_values.empty() ? std::vector<double>{0.0} : entry.t_values;
        const std::vector<double> alphas =
            entry.alpha_values.empty() ? std::vector<double>{0.0} : entry.alpha_values;
        for (std::size_t ti = 0; ti < ts.size(); ++ti) {
            for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
                SuiteJob job;
                job.identity_id = entry.identity_id;
                job.params = entry.params;
                if (!entry.t_values.empty()) job.params["t"] = ts[ti];
                if (!entry.alpha_values.empty()) job.params["alpha"] = alphas[ai];
                job.options.n = entry.n;
                job.options.seed = cfg.master_seed + 1000003ull * jobs.size();
                job.options.threads = threads;
                jobs.push_back(std::move(job));
            }
        }
    }
    return jobs;
}

struct SuiteResult {
    std::vector<TestReport> reports;
    bool all_pass = true;
};

// Runs every job sequentially (each verifier parallelizes internally), writing
// <output_path>/<identity_id>_<job index>.json per job plus a summary file.
inline SuiteResult run_suite(const SuiteConfig& cfg, int threads = 0,
                             std::ostream* progress = nullptr) {
    const std::vector<SuiteJob> jobs = expand_suite(cfg, threads);
    SuiteResult result;
    std::filesystem::create_directories(cfg.output_path);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const SuiteJob& job = jobs[i];
        if (progress)
            (*progress) << "[" << (i + 1) << "/" << jobs.size() << "] " << job.identity_id
                        << " n=" << job.options.n << std::flush;
        TestReport report = run_identity(job.identity_id, job.params, job.options);
        if (progress)
            (*progress) << (report.pass ? "  pass" : "  FAIL")
                        << " (statistic " << report.statistic << ")\n";
        result.all_pass = result.all_pass && report.pass;
        const std::filesystem::path path =
            std::filesystem::path(cfg.output_path) /
            (job.identity_id + "_" + std::to_string(i) + ".json");
        write_report_json(report, path.string());
        result.reports.push_back(std::move(report));
    }
    if (cfg.format == "csv") {
        write_suite_csv(result.reports,
                        (std::filesystem::path(cfg.output_path) / "summary.csv").string());
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : result.reports) arr.push_back(report_to_json(r));
        std::ofstream out(std::filesystem::path(cfg.output_path) / "summary.json");
        out << arr.dump(2) << "\n";
    }
    return result;
}

}  // namespace spider_linnik
