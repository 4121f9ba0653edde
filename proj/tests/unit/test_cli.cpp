#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "adams/cli/commands.hpp"
#include "adams/cli/config.hpp"
#include "adams/io.hpp"

using namespace adams;
using namespace adams::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / "adams_cli_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

template <class Parse>
void check_round_trip(Parse parse) {
    auto a = parse("", Overrides{});
    std::string text = dump(to_json(a));
    auto b = parse(text, Overrides{});
    CHECK(dump(to_json(b)) == text);
}

}  // namespace

TEST_CASE("effective configs re-parse to themselves") {
    check_round_trip(parse_train);
    check_round_trip(parse_ema);
    check_round_trip(parse_theory);
    check_round_trip(parse_compare);
    check_round_trip(parse_sweep);
    const fs::path configs = fs::path(ADAMS_SOURCE_DIR) / "configs";
    CHECK_NOTHROW(parse_train(read_file(configs / "train.json")));
    CHECK_NOTHROW(parse_ema(read_file(configs / "simulate_ema.json")));
    CHECK_NOTHROW(parse_theory(read_file(configs / "verify_theory.json")));
    CHECK_NOTHROW(parse_compare(read_file(configs / "compare_updates.json")));
    CHECK_NOTHROW(parse_sweep(read_file(configs / "sweep.json")));
    // The shipped EMA grid has enough Monte-Carlo points for the moment criterion.
    CHECK(parse_ema(read_file(configs / "simulate_ema.json")).points().size() >= 20);
}

TEST_CASE("schema violations name the line") {
    const std::string text = "{\n  \"schema_version\": 1,\n  \"optimizer\": {\n    \"betta1\": 0.9\n  }\n}\n";
    try {
        parse_train(text);
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(e.line() == 4);
        CHECK(std::string(e.what()).find("betta1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_train(R"({"schema_version": 2})"), SchemaError);
    CHECK_THROWS_AS(parse_train(R"({"schema_version": 1, "batch_size": "big"})"), SchemaError);
    CHECK_THROWS_AS(parse_train(R"({"schema_version": 1, "optimizer": {"beta2": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_train("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_compare(R"({"schema_version": 1, "lion_scaling": true})"), SchemaError);
}

TEST_CASE("overrides") {
    auto s = parse_train(R"({"schema_version": 1, "seed": 3})", Overrides{11u, 2u, 5});
    CHECK(s.train.seed == 11);
    CHECK(s.train.threads == 2);
    CHECK(s.train.steps == 5);
    CHECK(s.train.warmup_steps <= 5);
}

TEST_CASE("exit codes") {
    auto dir = scratch("codes");
    std::string err;
    CHECK(run({"frobnicate"}, &err) == kExitConfigError);
    CHECK(run({"train", "--config", (dir / "missing.json").string()}, &err) == kExitConfigError);
    write_file_atomic(dir / "bad.json", R"({"schema_version": 1, "bogus": 1})");
    CHECK(run({"train", "--config", (dir / "bad.json").string(), "--out", (dir / "o").string()}, &err) ==
          kExitConfigError);
    CHECK(err.find("line 1") != std::string::npos);

    write_file_atomic(dir / "blowup.json", R"({"schema_version": 1, "optimizer": {"kind": "sgdm", "peak_lr": 1e6,
        "clip_threshold": null}, "schedule": {"steps": 50, "warmup_steps": 1}})");
    CHECK(run({"train", "--config", (dir / "blowup.json").string(), "--out", (dir / "b").string()}) ==
          kExitDivergence);
    CHECK(fs::exists(dir / "b" / "summary.json"));

    write_file_atomic(dir / "high.json", R"({"schema_version": 1, "schedule": {"steps": 30, "warmup_steps": 3},
        "window": {"first": 5, "last": 30}, "baseline": 0.9999})");
    CHECK(run({"compare-updates", "--config", (dir / "high.json").string(), "--out", (dir / "c").string()}) ==
          kExitSuiteFailure);
    CHECK(run({"verify-theory", "--config", (fs::path(ADAMS_SOURCE_DIR) / "configs/verify_theory.json").string(),
               "--out", (dir / "t").string()}) == kExitPass);
    auto report = Json::parse(read_file(dir / "t" / "report.json"));
    CHECK(report["suites"]["constants"]["regression_checked"].get<bool>());
    CHECK(report["suites"]["bounded_update"]["lemma_violations"].get<std::int64_t>() > 0);
}

TEST_CASE("default train run matches the frozen seed-7 summary") {
    auto dir = scratch("train7");
    CHECK(run({"train", "--out", dir.string()}) == kExitPass);
    for (const char* f : {"trajectory.csv", "model.ckpt", "optimizer.ckpt", "summary.json", "timing.json",
                          "effective_config.json"}) {
        CHECK(fs::exists(dir / f));
    }
    auto frozen = read_file(fs::path(ADAMS_SOURCE_DIR) / "baselines/train_seed7_summary.json");
    CHECK(read_file(dir / "summary.json") == frozen);
}

TEST_CASE("sweep flags and writes one row per cell") {
    auto dir = scratch("sweep");
    write_file_atomic(dir / "s.json", R"({"schema_version": 1, "schedule": {"steps": 40, "warmup_steps": 4}})");
    CHECK(run({"sweep", "--config", (dir / "s.json").string(), "--out", (dir / "o").string()}) == kExitPass);
    auto table = CsvTable::parse(read_file(dir / "o" / "sweep.csv"));
    CHECK(table.rows.size() == 10);
    auto summary = Json::parse(read_file(dir / "o" / "summary.json"));
    CHECK(summary["cells"].get<int>() == 10);
}

TEST_CASE("simulate-ema on a small grid") {
    auto dir = scratch("ema");
    write_file_atomic(dir / "e.json", R"({"schema_version": 1, "samples": 20000,
        "grid": {"mu": [1.0], "sigma": [1.0], "beta2": [0.9], "v_beta": [0.9], "v_beta1": [0.9], "degenerate_mu": [2.0]},
        "max_failure_fraction": 0.5})");
    CHECK(run({"simulate-ema", "--config", (dir / "e.json").string(), "--out", (dir / "o").string()}) == kExitPass);
    auto table = CsvTable::parse(read_file(dir / "o" / "ema.csv"));
    CHECK(table.rows.size() == 4);
}
