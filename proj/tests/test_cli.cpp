#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using tbc::read_file;
using tbc::test::fixture_path;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = tbc::cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fresh_dir(const std::string& name) {
    const fs::path dir = fs::path(TBC_WORK_DIR) / "cli" / name;
    fs::remove_all(dir);
    return dir.string();
}

std::size_t line_count(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::vector<std::string> walkthrough(const std::string& out) {
    return {"generate", "--spec", fixture_path("bmi.json"), "--tests", fixture_path("bmi_seed.txt"),
            "--iterations", "1", "--per-iteration", "1", "--pool", "3", "--seed", "7", "--out", out};
}

} // namespace

TEST_CASE("fixtures listing") {
    const auto r = run({"fixtures"});
    CHECK(r.code == 0);
    for (const char* id : {"bmi", "piecewise", "poly3", "binom_small"}) {
        CHECK(r.out.find(id) != std::string::npos);
    }
}

TEST_CASE("usage errors exit 1, file errors exit 2") {
    CHECK(run({}).code == 1);
    CHECK(run({"explode"}).code == 1);
    const auto unknown_flag = run({"fixtures", "--frobnicate"});
    CHECK(unknown_flag.code == 1);
    CHECK(unknown_flag.err.find("Usage") != std::string::npos);
    CHECK(run({"generate", "--fixture", "nope", "--out", fresh_dir("bad")}).code == 1);
    CHECK(run({"generate", "--fixture", "bmi", "--population", "0", "--out", fresh_dir("bad")}).code == 1);
    CHECK(run({"generate", "--spec", "/definitely/missing.json", "--tests", "x", "--out", fresh_dir("bad")}).code ==
          2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("walkthrough generate writes a 7-line suite") {
    const auto dir = fresh_dir("walk");
    const auto r = run(walkthrough(dir));
    REQUIRE(r.code == 0);
    const auto suite = read_file(dir + "/suite.txt");
    CHECK(line_count(suite) == 7);
    CHECK(suite.rfind("1.7 50\n1.8 70\n", 0) == 0);
    CHECK(line_count(read_file(dir + "/outputs.txt")) == 7);
    const auto log = read_file(dir + "/campaign.jsonl");
    CHECK(line_count(log) == 2);
    std::istringstream lines(log);
    std::string first;
    std::string second;
    std::getline(lines, first);
    std::getline(lines, second);
    const auto head = nlohmann::json::parse(first);
    CHECK(head["config"]["randomPoolSize"] == 3);
    CHECK(head["config"]["gp"]["populationSize"] == 800);
    const auto rec = nlohmann::json::parse(second);
    CHECK(rec["selected"].size() == 1);
    CHECK(rec["committeeSize"] == 10);
    CHECK_FALSE(rec.contains("wallClockMs"));
}

TEST_CASE("same argv twice and replay from the log are byte identical") {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    const auto c = fresh_dir("det_c");
    REQUIRE(run(walkthrough(a)).code == 0);
    REQUIRE(run(walkthrough(b)).code == 0);
    REQUIRE(run({"generate", "--config", a + "/campaign.jsonl", "--out", c}).code == 0);
    for (const char* f : {"/suite.txt", "/outputs.txt", "/campaign.jsonl"}) {
        CHECK(read_file(a + f) == read_file(b + f));
        CHECK(read_file(a + f) == read_file(c + f));
    }
}

TEST_CASE("precedence: defaults < config file < flags") {
    const auto dir = fresh_dir("prec");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir + "/cfg.json");
        cfg << R"({"iterations": 2, "testsPerIteration": 2, "randomPoolSize": 20,
                  "gp": {"populationSize": 30, "maxGenerations": 3}, "committeeSize": 4})";
    }
    REQUIRE(run({"generate", "--fixture", "poly3", "--config", dir + "/cfg.json", "--out", dir + "/a"}).code == 0);
    CHECK(line_count(read_file(dir + "/a/suite.txt")) == 4 + 2 * 2);
    REQUIRE(run({"generate", "--fixture", "poly3", "--config", dir + "/cfg.json", "--iterations", "3", "--out",
                 dir + "/b"})
                .code == 0);
    CHECK(line_count(read_file(dir + "/b/suite.txt")) == 4 + 3 * 2);
    const auto head = nlohmann::json::parse(read_file(dir + "/b/campaign.jsonl").substr(0, read_file(dir + "/b/campaign.jsonl").find('\n')));
    CHECK(head["config"]["iterations"] == 3);
    CHECK(head["config"]["gp"]["populationSize"] == 30);
    CHECK(head["config"]["gp"]["crossoverRate"] == 0.9);

    {
        std::ofstream bad(dir + "/bad.json");
        bad << R"({"iterationz": 2})";
    }
    CHECK(run({"generate", "--fixture", "poly3", "--config", dir + "/bad.json", "--out", dir + "/c"}).code == 1);
}

TEST_CASE("baseline suites have the TBC budget") {
    const auto dir = fresh_dir("baseline");
    for (const char* s : {"random", "art"}) {
        const auto out = dir + "/" + s;
        REQUIRE(run({"baseline", "--strategy", s, "--fixture", "binom_small", "--iterations", "5", "--per-iteration",
                     "3", "--seed", "2", "--out", out})
                    .code == 0);
        CHECK(line_count(read_file(out + "/suite.txt")) == 4 + 15);
        CHECK(line_count(read_file(out + "/campaign.jsonl")) == 1 + 5);
    }
    CHECK(run({"baseline", "--strategy", "tbc", "--fixture", "bmi", "--out", dir + "/x"}).code == 1);
}

TEST_CASE("evaluate writes kill records") {
    const auto dir = fresh_dir("evaluate");
    fs::create_directories(dir);
    {
        std::ofstream suite(dir + "/suite.txt");
        suite << "1.7 50\n";
    }
    REQUIRE(run({"evaluate", "--fixture", "bmi", "--suite", dir + "/suite.txt", "--out", dir}).code == 0);
    const auto j = nlohmann::json::parse(read_file(dir + "/kills.json"));
    CHECK(j["records"][0]["name"] == "weight/height");
    CHECK(j["records"][0]["killed"] == true);
    CHECK(j["records"][0]["witness"] == "1.7 50");
    {
        std::ofstream outputs(dir + "/outputs.txt");
        outputs << "1\n2\n";
    }
    CHECK(run({"evaluate", "--fixture", "bmi", "--suite", dir + "/suite.txt", "--outputs", dir + "/outputs.txt",
               "--out", dir})
              .code == 1);
}

TEST_CASE("infer dumps the top-k models") {
    const auto dir = fresh_dir("infer");
    REQUIRE(run({"infer", "--spec", fixture_path("bmi.json"), "--tests", fixture_path("bmi_seed.txt"), "--population",
                 "100", "--generations", "5", "--top-k", "3", "--out", dir})
                .code == 0);
    const auto j = nlohmann::json::parse(read_file(dir + "/models.json"));
    REQUIRE(j["models"].size() == 3);
    CHECK(j["models"][0]["error"].get<double>() <= j["models"][2]["error"].get<double>());
}

TEST_CASE("a failing system under test exits 2 and keeps partial artifacts") {
    const auto dir = fresh_dir("failing");
    fs::create_directories(dir);
    {
        std::ofstream spec(dir + "/spec.json");
        spec << R"({"command": "false", "parameters": [{"name": "x", "type": "double", "min": 0, "max": 1}],
                   "output": [{"name": "y", "type": "double"}]})";
        std::ofstream tests(dir + "/seed.txt");
        tests << "0.5\n";
    }
    const auto r = run({"generate", "--spec", dir + "/spec.json", "--tests", dir + "/seed.txt", "--out", dir + "/o"});
    CHECK(r.code == 2);
    CHECK(fs::exists(dir + "/o/campaign.jsonl"));
}

TEST_CASE("compare writes csv, summary and config") {
    const auto dir = fresh_dir("compare");
    const std::vector<std::string> args{"compare", "--fixture", "poly3", "--runs", "2", "--iterations", "2",
                                        "--per-iteration", "2", "--population", "30", "--generations", "3",
                                        "--pool", "30", "--committee", "5", "--seed", "9", "--out", dir};
    REQUIRE(run(args).code == 0);
    const auto csv = read_file(dir + "/report.csv");
    CHECK(line_count(csv) == 1 + 3 * 2 * 3);
    const auto summary = nlohmann::json::parse(read_file(dir + "/summary.json"));
    CHECK(summary["pairwise"].size() == 6);
    auto again = args;
    again.back() = dir + "_again";
    fs::remove_all(again.back());
    REQUIRE(run(again).code == 0);
    CHECK(read_file(again.back() + "/report.csv") == csv);
    CHECK(read_file(again.back() + "/summary.json") == read_file(dir + "/summary.json"));
}

TEST_CASE("a nondeterministic system under test is rejected at setup") {
    const auto dir = fresh_dir("flaky");
    fs::create_directories(dir);
    {
        std::ofstream script(dir + "/flaky.sh");
        script << "#!/bin/bash\necho \"$RANDOM.$RANDOM$RANDOM\"\n";
        std::ofstream spec(dir + "/spec.json");
        spec << R"({"command": "flaky.sh", "parameters": [{"name": "x", "type": "double", "min": 0, "max": 1}],
                   "output": [{"name": "y", "type": "double"}]})";
        std::ofstream tests(dir + "/seed.txt");
        tests << "0.5\n";
    }
    fs::permissions(dir + "/flaky.sh", fs::perms::owner_all);
    const auto r = run({"generate", "--spec", dir + "/spec.json", "--tests", dir + "/seed.txt", "--out", dir + "/o"});
    CHECK(r.code == 2);
    CHECK(r.err.find("not deterministic") != std::string::npos);
}
