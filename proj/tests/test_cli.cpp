#include "ctmdp/cli.h"

#include "support/corpus.h"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

using json = nlohmann::json;

namespace {

struct CliRun {
    int code;
    json report;
    std::string err;
};

std::vector<std::string> split_args(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false, any = false;
    char quote = 0;
    for (char c : line) {
        if (quoted) {
            if (c == quote) {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '\'' || c == '"') {
            quoted = true;
            quote = c;
            any = true;
        } else if (c == ' ') {
            if (any || !cur.empty()) out.push_back(cur);
            cur.clear();
            any = false;
        } else {
            cur += c;
        }
    }
    if (any || !cur.empty()) out.push_back(cur);
    return out;
}

CliRun run(std::vector<std::string> args, const std::string& input = "") {
    args.insert(args.begin(), "ctmdp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = ctmdp::cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
    json report;
    if (!out.str().empty()) report = json::parse(out.str());
    return {code, report, err.str()};
}

std::string fx(const std::string& name) { return ctmdp::testkit::fixture_path(name); }

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Every field of `expected` must appear in `actual`; numbers within 1e-9.
void expect_subset(const json& expected, const json& actual, const std::string& where) {
    if (expected.is_object()) {
        ASSERT_TRUE(actual.is_object()) << where;
        for (auto it = expected.begin(); it != expected.end(); ++it) {
            ASSERT_TRUE(actual.contains(it.key())) << where << "." << it.key();
            expect_subset(it.value(), actual[it.key()], where + "." + it.key());
        }
    } else if (expected.is_array()) {
        ASSERT_TRUE(actual.is_array()) << where;
        ASSERT_EQ(expected.size(), actual.size()) << where;
        for (std::size_t i = 0; i < expected.size(); ++i)
            expect_subset(expected[i], actual[i], where + "[" + std::to_string(i) + "]");
    } else if (expected.is_number() && actual.is_number()) {
        EXPECT_NEAR(expected.get<double>(), actual.get<double>(), 1e-9) << where;
    } else {
        EXPECT_EQ(expected, actual) << where;
    }
}

}  // namespace

TEST(Cli, ReportShape) {
    const CliRun r = run({"classify", fx("fig1-pair")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.report["report_version"], "1");
    EXPECT_EQ(r.report["command"], "classify");
    EXPECT_TRUE(r.report["input_digest"].get<std::string>().starts_with("sha256:"));
    EXPECT_EQ(r.report["input_digest"].get<std::string>().size(), 7u + 64u);
    EXPECT_EQ(r.report["results"]["status"], "recurrent");
    EXPECT_TRUE(r.report["results"].contains("witness_state"));
    EXPECT_TRUE(r.report["warnings"].is_array());
    EXPECT_TRUE(r.report["wall_time_ms"].is_number());
    EXPECT_EQ(r.report["parameters"]["model"], fx("fig1-pair"));
}

TEST(Cli, DigestIsSha256OfInput) {
    // sha256 of the empty string.
    const CliRun r = run({"validate", "-"}, "");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.report["input_digest"], "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Cli, EquivAndFlags) {
    CliRun r = run({"equiv", "--mode", "strong", "--s", "0", "--r", "1", fx("fig1-pair")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.report["results"]["bisimilar"], false);
    r = run({"equiv", "--s", "0", "--r", "1", "--fail-on-distinguished", fx("fig1-pair")});
    EXPECT_EQ(r.code, 1);
    r = run({"equiv", "--s", "0", "--r", "1", "--fail-on-distinguished", fx("example3-x")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.report["results"]["bisimilar"], true);
    r = run({"equiv", "--s", "0", "--r", "9", fx("fig1-pair")});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.report["error"]["kind"], "usage");
}

TEST(Cli, InputErrors) {
    CliRun r = run({"classify", "-"}, "{\"ap\": [1,");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.report["error"]["message"].get<std::string>().find("byte"), std::string::npos);
    r = run({"classify", "/nonexistent/file.json"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.report["error"]["kind"], "io");
    r = run({"frobnicate"});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
    r = run({});
    EXPECT_EQ(r.code, 2);
    r = run({"check", fx("fig1-pair"), "--formula", "P<=2 (X[0,1] \"l1\")"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.report["error"]["kind"], "formula");
    r = run({"minimize", "--mode", "ctmc-strong", fx("fig1-pair")});
    EXPECT_EQ(r.code, 2);
    const std::string invalid = R"({"ap":["a"],"states":[{"id":0,"labels":["a"]}],"initial":0,
        "transitions":[{"from":0,"rate":"1","to":{"0":"0.9"}}]})";
    r = run({"validate", "-"}, invalid);
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.report["results"]["valid"], false);
    EXPECT_EQ(r.report["results"]["violations"].size(), 1u);
    r = run({"classify", "-"}, invalid);
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.report["error"]["kind"], "invalid-model");
}

TEST(Cli, HelpExitsZero) {
    const CliRun r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("minimize"), std::string::npos);
}

TEST(Cli, MinimizeWritesQuotient) {
    const std::string out = ::testing::TempDir() + "/quotient.json";
    const CliRun r = run({"minimize", fx("example3-x"), "--out", out});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.report["results"]["blocks"], json::parse("[[0,1],[2],[3]]"));
    EXPECT_EQ(json::parse(slurp(out)), r.report["results"]["quotient"]);
    const CliRun w = run({"minimize", "--mode", "weak", "--rate", "5", fx("example2-rates")});
    EXPECT_EQ(w.report["results"]["uniformization_rate"], "5");
    EXPECT_EQ(run({"minimize", "--mode", "ctmc-weak", fx("erlang-mini")}).report["results"]["blocks"].size(), 5u);
}

TEST(Cli, UniformizeAndGadget) {
    CliRun r = run({"uniformize", fx("example2-rates")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.report["results"]["uniformization_rate"], "4");
    r = run({"uniformize", "--rate", "1", fx("example2-rates")});
    EXPECT_EQ(r.code, 2);
    const std::string out = ::testing::TempDir() + "/fig1.json";
    r = run({"gadget", "--variant", "fig1-pair", "--out", out});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.report["input_digest"], nullptr);
    EXPECT_EQ(slurp(out), slurp(fx("fig1-pair")));
    r = run({"gadget", "--variant", "subset-sum", "--weights", "1/8,-1/8"});
    EXPECT_EQ(r.report["results"]["model"], json::parse(slurp(fx("subset-sum-yes"))));
    r = run({"gadget", "--variant", "subset-sum", "--weights", "1/2"});
    EXPECT_EQ(r.code, 2);
    r = run({"gadget", "--variant", "nope"});
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, CheckAndDistinguish) {
    CliRun r = run({"check", fx("example2-rates"), "--formula", "P<=0.46 (X[0.2,1] \"l1\")"});
    EXPECT_EQ(r.code, 0);
    ASSERT_EQ(r.report["results"]["states"].size(), 3u);
    EXPECT_EQ(r.report["results"]["states"][0]["verdict"], true);
    EXPECT_EQ(r.report["results"]["states"][1]["verdict"], false);
    EXPECT_NEAR(r.report["results"]["states"][1]["upper"].get<double>(), std::exp(-0.4) - std::exp(-2.0), 1e-11);
    r = run({"check", fx("fig1-pair"), "--state", "1", "--dialect", "cslstar", "--formula",
             "P<=0.312 ((\"l0\" U[0.6,inf] \"l1\") | (\"l0\" U[1,inf] \"l3\"))"});
    ASSERT_EQ(r.report["results"]["states"].size(), 1u);
    EXPECT_EQ(r.report["results"]["states"][0]["verdict"], false);
    r = run({"distinguish", "--s", "0", "--r", "1", fx("example2-rates")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.report["results"]["method"], "rate");
    r = run({"distinguish", "--s", "0", "--r", "1", fx("example3-x")});
    EXPECT_EQ(r.code, 1);
}

TEST(Cli, SimulateIsDeterministic) {
    const std::vector<std::string> args = {"simulate", fx("example4-modified"), "--state", "1", "--formula",
                                           "P>=0.27 ((\"l0\" | \"l3\") U[0,1] (\"l2\" | \"l4\"))", "--n", "4000", "--seed", "5"};
    CliRun a = run(args), b = run(args);
    EXPECT_EQ(a.code, 0);
    a.report.erase("wall_time_ms");
    b.report.erase("wall_time_ms");
    EXPECT_EQ(a.report, b.report);
    const std::string sched = ::testing::TempDir() + "/sched.json";
    std::ofstream(sched) << R"({"kind":"positional","choices":{"1":3}})";
    std::vector<std::string> with = args;
    with.push_back("--scheduler");
    with.push_back(sched);
    const CliRun c = run(with);
    EXPECT_EQ(c.code, 0);
    EXPECT_NEAR(c.report["results"]["estimate"].get<double>(), 0.269, 4 * 0.0075);
    std::ofstream(sched) << R"({"kind":"positional","choices":{"1":0}})";
    EXPECT_EQ(run(with).code, 2);
}

// Runs each README example and compares the documented fields.
TEST(Cli, ReadmeExamples) {
    const std::string readme = slurp(std::string(CTMDP_SOURCE_DIR) + "/README.md");
    ASSERT_FALSE(readme.empty());
    const std::regex block(R"(```sh\n\$ ctmdp ([^\n]*)\n```\n+```json\n([\s\S]*?)\n```)");
    int examples = 0;
    for (auto it = std::sregex_iterator(readme.begin(), readme.end(), block); it != std::sregex_iterator(); ++it) {
        std::string line = (*it)[1];
        int expected_code = 0;
        if (auto pos = line.find("  # exit "); pos != std::string::npos) {
            expected_code = std::stoi(line.substr(pos + 9));
            line = line.substr(0, pos);
        }
        std::vector<std::string> args = split_args(line);
        for (auto& a : args)
            if (a.starts_with("fixtures/")) a = std::string(CTMDP_SOURCE_DIR) + "/" + a;
        const CliRun r = run(args);
        SCOPED_TRACE(line);
        EXPECT_EQ(r.code, expected_code);
        expect_subset(json::parse((*it)[2].str()), r.report, "report");
        ++examples;
    }
    EXPECT_GE(examples, 6);
}
