#pragma once

// Verdict plumbing for the identity batteries: a TestReport bundles every
// sub-check of one identity run, serializes to schema-1 JSON, and feeds the
// one-row-per-sub-check CSV summary.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spider_linnik {

// One sub-check.  ratio = observed / allowance, so ratio <= 1 means pass; the
// battery statistic is the worst ratio.  p_value is NaN when no calibrated
// p-value exists for the check.
struct CheckMember {
    std::string name;
    std::string kind;  // "z", "ks", "bound", "mass", ...
    double observed = 0.0;
    double allowance = 0.0;
    double ratio = 0.0;
    double p_value = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

struct TestReport {
    std::string identity_id;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double statistic = 0.0;
    double threshold = 1.0;
    bool pass = false;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

namespace detail {
// JSON has no infinity; clamp the serialized statistic instead.
inline double json_safe(double x) {
    if (std::isnan(x)) return -1.0;
    const double cap = 1e300;
    if (x > cap) return cap;
    if (x < -cap) return -cap;
    return x;
}
}  // namespace detail

// Accumulates members and produces the battery verdict: every member must
// individually clear its stated allowance.  The Holm family-wise verdict over
// the members that carry p-values is recorded as a diagnostic.
class CheckSet {
  public:
    void add(CheckMember member) { members_.push_back(std::move(member)); }

    // |lhs - rhs| against z_mult * se.
    void add_z(const std::string& name, double lhs, double rhs, double se, double z_mult = 3.0,
               double bias_allowance = 0.0) {
        CheckMember m;
        m.name = name;
        m.kind = "z";
        m.observed = std::abs(lhs - rhs);
        m.allowance = z_mult * se + bias_allowance;
        m.ratio = ratio_of(m.observed, m.allowance);
        const double z = se > 0.0 ? (lhs - rhs) / se : (m.observed == 0.0 ? 0.0 : 1e308);
        m.p_value = std::erfc(std::abs(z) / 1.4142135623730951);
        m.pass = m.ratio <= 1.0;
        m.extra["lhs"] = detail::json_safe(lhs);
        m.extra["rhs"] = detail::json_safe(rhs);
        m.extra["se"] = detail::json_safe(se);
        m.extra["z"] = detail::json_safe(z);
        members_.push_back(std::move(m));
    }

    // KS-style: statistic against a calibrated threshold.
    void add_ks(const std::string& name, double statistic, double threshold, double p_value) {
        CheckMember m;
        m.name = name;
        m.kind = "ks";
        m.observed = statistic;
        m.allowance = threshold;
        m.ratio = ratio_of(statistic, threshold);
        m.p_value = p_value;
        m.pass = m.ratio <= 1.0;
        members_.push_back(std::move(m));
    }

    // |observed| must stay below a hard bound (correlations, tolerances).
    void add_bound(const std::string& name, double observed, double bound,
                   const std::string& kind = "bound") {
        CheckMember m;
        m.name = name;
        m.kind = kind;
        m.observed = std::abs(observed);
        m.allowance = bound;
        m.ratio = ratio_of(m.observed, bound);
        m.pass = m.ratio <= 1.0;
        members_.push_back(std::move(m));
    }

    const std::vector<CheckMember>& members() const { return members_; }

    double statistic() const {
        double worst = 0.0;
        for (const auto& m : members_) worst = std::max(worst, m.ratio);
        return worst;
    }

    bool all_pass() const {
        for (const auto& m : members_)
            if (!m.pass) return false;
        return true;
    }

    bool holm_all_pass(double level = 0.01) const {
        double p_min = 1.0;
        std::size_t count = 0;
        for (const auto& m : members_) {
            if (std::isnan(m.p_value)) continue;
            p_min = std::min(p_min, m.p_value);
            ++count;
        }
        if (count == 0) return true;
        return p_min * static_cast<double>(count) > level;
    }

    nlohmann::ordered_json members_json() const {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& m : members_) {
            nlohmann::ordered_json j;
            j["name"] = m.name;
            j["kind"] = m.kind;
            j["observed"] = detail::json_safe(m.observed);
            j["allowance"] = detail::json_safe(m.allowance);
            j["ratio"] = detail::json_safe(m.ratio);
            if (std::isnan(m.p_value))
                j["p_value"] = nullptr;
            else
                j["p_value"] = m.p_value;
            j["pass"] = m.pass;
            if (!m.extra.empty()) j["extra"] = m.extra;
            arr.push_back(std::move(j));
        }
        return arr;
    }

  private:
    static double ratio_of(double observed, double allowance) {
        if (allowance > 0.0) return observed / allowance;
        return observed == 0.0 ? 0.0 : 1e308;
    }

    std::vector<CheckMember> members_;
};

inline nlohmann::ordered_json report_to_json(const TestReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["identity_id"] = report.identity_id;
    j["params"] = report.params;
    j["n"] = report.n;
    j["seed"] = report.seed;
    j["statistic"] = detail::json_safe(report.statistic);
    j["threshold"] = report.threshold;
    j["pass"] = report.pass;
    j["details"] = report.details;
    return j;
}

inline TestReport report_from_json(const nlohmann::ordered_json& j) {
    if (!j.contains("schema") || j.at("schema").get<int>() != 1)
        throw std::invalid_argument("report_from_json: unsupported schema");
    TestReport r;
    r.identity_id = j.at("identity_id").get<std::string>();
    r.params = j.value("params", nlohmann::ordered_json::object());
    r.n = j.at("n").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.statistic = j.at("statistic").get<double>();
    r.threshold = j.at("threshold").get<double>();
    r.pass = j.at("pass").get<bool>();
    r.details = j.value("details", nlohmann::ordered_json::object());
    return r;
}

inline void write_report_json(const TestReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
    out << report_to_json(report).dump(2) << '\n';
}

namespace detail {
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}
}  // namespace detail

// One row per sub-check, preceded by a header row.
inline std::string suite_summary_csv(const std::vector<TestReport>& reports) {
    std::ostringstream out;
    out << "identity_id,member,kind,observed,allowance,ratio,p_value,pass,n,seed\n";
    out.precision(12);
    for (const auto& report : reports) {
        const auto& members = report.details.contains("members")
                                  ? report.details.at("members")
                                  : nlohmann::ordered_json::array();
        for (const auto& m : members) {
            out << detail::csv_field(report.identity_id) << ','
                << detail::csv_field(m.at("name").get<std::string>()) << ','
                << m.at("kind").get<std::string>() << ',' << m.at("observed").get<double>() << ','
                << m.at("allowance").get<double>() << ',' << m.at("ratio").get<double>() << ',';
            if (m.at("p_value").is_null())
                out << "";
            else
                out << m.at("p_value").get<double>();
            out << ',' << (m.at("pass").get<bool>() ? "true" : "false") << ',' << report.n << ','
                << report.seed << '\n';
        }
    }
    return out.str();
}

inline void write_suite_csv(const std::vector<TestReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_suite_csv: cannot open " + path);
    out << suite_summary_csv(reports);
}

}  // namespace spider_linnik
