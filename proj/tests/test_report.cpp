#include <catch2/catch_amalgamated.hpp>

#include <spider_linnik/report.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace spider_linnik;

namespace {

TestReport sample_report() {
    CheckSet checks;
    checks.add_z("lt l=1", 0.501, 0.5, 0.002);
    checks.add_ks("ks coord 1", 0.012, 0.023, 0.44);
    checks.add_bound("corr pair", -0.004, 0.0095, "corr");

    TestReport r;
    r.identity_id = "cor1";
    r.params = {{"alpha", 0.5}, {"nu", {0.25, 0.25}}, {"t", 1.0}};
    r.n = 100000;
    r.seed = 42;
    r.statistic = checks.statistic();
    r.pass = checks.all_pass();
    r.details["members"] = checks.members_json();
    r.details["holm_all_pass"] = checks.holm_all_pass();
    return r;
}

}  // namespace

TEST_CASE("check members compute ratios against their allowances") {
    CheckSet checks;
    checks.add_z("z member", 1.0, 1.05, 0.02);  // |diff| = 0.05, allowance 0.06
    REQUIRE(checks.members().back().pass);
    REQUIRE(checks.members().back().ratio == Catch::Approx(0.05 / 0.06));
    checks.add_z("failing z", 1.0, 1.2, 0.02);
    REQUIRE_FALSE(checks.members().back().pass);
    REQUIRE(checks.statistic() > 1.0);
    REQUIRE_FALSE(checks.all_pass());

    CheckSet bias;
    bias.add_z("biased member", 1.0, 1.05, 0.01, 3.0, 0.03);  // allowance 0.06
    REQUIRE(bias.members().back().pass);
}

TEST_CASE("holm verdict uses only members that carry p-values") {
    CheckSet checks;
    checks.add_bound("no p-value", 0.5, 1.0);
    REQUIRE(checks.holm_all_pass());  // vacuous
    checks.add_ks("tiny p", 0.5, 0.1, 1e-9);
    REQUIRE_FALSE(checks.holm_all_pass());
    CheckSet ok;
    ok.add_ks("fine", 0.01, 0.02, 0.6);
    ok.add_z("fine z", 1.0, 1.001, 0.01);
    REQUIRE(ok.holm_all_pass());
}

TEST_CASE("report json round-trips exactly") {
    const TestReport r = sample_report();
    const auto j = report_to_json(r);
    REQUIRE(j.at("schema").get<int>() == 1);
    const TestReport back = report_from_json(j);
    REQUIRE(report_to_json(back).dump() == j.dump());
    REQUIRE(back.identity_id == r.identity_id);
    REQUIRE(back.n == r.n);
    REQUIRE(back.seed == r.seed);
    REQUIRE(back.pass == r.pass);
    REQUIRE(back.statistic == r.statistic);
}

TEST_CASE("report json survives non-finite member values") {
    CheckSet checks;
    checks.add_z("nan se", 1.0, 1.0, std::nan(""));
    TestReport r = sample_report();
    r.details["members"] = checks.members_json();
    const auto j = report_to_json(r);
    REQUIRE_NOTHROW(j.dump());  // no NaN leaks into the serialized payload
}

TEST_CASE("report writes to disk and rejects bad schema") {
    const TestReport r = sample_report();
    const std::filesystem::path path = std::filesystem::temp_directory_path() /
                                       "spider_linnik_test_report.json";
    write_report_json(r, path.string());
    std::ifstream in(path);
    nlohmann::ordered_json j;
    in >> j;
    REQUIRE(report_from_json(j).identity_id == "cor1");
    j["schema"] = 99;
    REQUIRE_THROWS_AS(report_from_json(j), std::invalid_argument);
    std::filesystem::remove(path);
}

TEST_CASE("suite csv has one row per member plus a header") {
    const TestReport r = sample_report();
    const std::string csv = suite_summary_csv({r, r});
    std::istringstream lines(csv);
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++count;
    REQUIRE(count == 1 + 2 * 3);
    REQUIRE(csv.rfind("identity_id,member,kind,observed,allowance,ratio,p_value,pass,n,seed",
                      0) == 0);
}

TEST_CASE("csv fields with commas or quotes are escaped") {
    CheckSet checks;
    checks.add_bound("weird, \"name\"", 0.1, 1.0);
    TestReport r = sample_report();
    r.details["members"] = checks.members_json();
    const std::string csv = suite_summary_csv({r});
    REQUIRE(csv.find("\"weird, \"\"name\"\"\"") != std::string::npos);
}
