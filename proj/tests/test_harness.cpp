#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "rewardlab/harness.hpp"
#include "test_util.hpp"

using namespace rewardlab;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("rewardlab_harness_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.gen.n_states = 4;
    cfg.gen.n_actions = 2;
    cfg.gen.gamma = 0.9;
    cfg.gen.pairs_per_env = 3;
    cfg.gen.interp_steps = 4;
    cfg.n_envs = 2;
    cfg.metric_specs = {"VAL-2-2", "EPIC-2-2"};
    cfg.master_seed = 5;
    cfg.parallelism = 1;
    return cfg;
}

} // namespace

TEST_CASE("pearson correlation of affine and reversed sequences") {
    std::vector<double> xs = {1.0, 2.0, 3.5, -1.0, 0.25};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(2.0 * x + 3.0);
    CHECK(std::abs(pearson_correlation(xs, ys) - 1.0) <= 1e-12);
    std::vector<double> neg;
    for (double x : xs) neg.push_back(-x);
    CHECK(std::abs(pearson_correlation(xs, neg) + 1.0) <= 1e-12);
}

TEST_CASE("pearson correlation matches a two-pass textbook computation") {
    Rng rng(31);
    std::vector<double> xs(1000), ys(1000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = rng.gaussian();
        ys[i] = 0.4 * xs[i] + rng.gaussian();
    }
    // Independent oracle: explicit means first, then moments.
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    double expected = sxy / std::sqrt(sxx * syy);
    CHECK(std::abs(pearson_correlation(xs, ys) - expected) <= 1e-10);
}

TEST_CASE("pearson correlation error cases") {
    CHECK_THROWS_AS(pearson_correlation({1.0, 2.0}, {1.0}), Error);
    CHECK_THROWS_AS(pearson_correlation({1.0}, {1.0}), Error);
    CHECK_THROWS_AS(pearson_correlation({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("records CSV writes a header-only file for no records") {
    TempDir tmp;
    write_records_csv({}, {"VAL-2-2"}, tmp.file("empty.csv"));
    CHECK(slurp(tmp.file("empty.csv")) == "env_id,pair_id,interp_step,regret,VAL-2-2\n");
}

TEST_CASE("records CSV round-trips exactly") {
    TempDir tmp;
    std::vector<ComparisonRecord> records;
    Rng rng(77);
    for (int i = 0; i < 20; ++i) {
        ComparisonRecord rec;
        rec.env_id = i / 10;
        rec.pair_id = i % 10;
        rec.interp_step = i % 4 + 1;
        rec.regret = rng.uniform();
        rec.metric_values = {rng.gaussian(), rng.gaussian()};
        if (i == 7) rec.metric_values[1] = std::numeric_limits<double>::quiet_NaN();
        records.push_back(rec);
    }
    std::vector<std::string> specs = {"VAL-2-2", "EPIC-2-2"};
    write_records_csv(records, specs, tmp.file("records.csv"));

    std::vector<std::string> specs_out;
    auto loaded = read_records_csv(tmp.file("records.csv"), specs_out);
    CHECK(specs_out == specs);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].env_id == records[i].env_id);
        CHECK(loaded[i].pair_id == records[i].pair_id);
        CHECK(loaded[i].interp_step == records[i].interp_step);
        CHECK(loaded[i].regret == records[i].regret); // %.17g is lossless
        for (std::size_t k = 0; k < 2; ++k) {
            if (std::isnan(records[i].metric_values[k]))
                CHECK(std::isnan(loaded[i].metric_values[k]));
            else
                CHECK(loaded[i].metric_values[k] == records[i].metric_values[k]);
        }
    }
}

TEST_CASE("summary CSV layout and tie ordering") {
    TempDir tmp;
    CorrelationSummary summary;
    summary.rows = {{"B-2-2", 0.5, 10}, {"A-2-2", 0.5, 10}, {"C-2-2", 0.9, 10}};
    // summarise_records owns sorting; emulate by sorting through it instead:
    std::vector<ComparisonRecord> records;
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        ComparisonRecord rec;
        rec.env_id = 0;
        rec.pair_id = 0;
        rec.interp_step = i;
        rec.regret = rng.uniform();
        double noise = rng.gaussian();
        // Two identical columns (exact tie) and one anticorrelated column.
        rec.metric_values = {rec.regret + 0.1 * noise, rec.regret + 0.1 * noise,
                             -rec.regret};
        records.push_back(rec);
    }
    CorrelationSummary s =
        summarise_records(records, {"Z-2-2", "A-2-2", "neg-0-0"});
    REQUIRE(s.rows.size() == 3);
    CHECK(s.rows[0].spec == "A-2-2"); // tie broken by spec string
    CHECK(s.rows[1].spec == "Z-2-2");
    CHECK(s.rows[0].correlation == s.rows[1].correlation);
    CHECK(s.rows[2].spec == "neg-0-0");
    CHECK(s.rows[2].correlation < 0.0);
    for (const auto& row : s.rows) CHECK(row.n_samples == 50);

    write_summary_csv(s, tmp.file("summary.csv"));
    std::string text = slurp(tmp.file("summary.csv"));
    CHECK(text.substr(0, text.find('\n')) == "metric,correlation,n");
    CHECK(text.find("A-2-2") < text.find("Z-2-2"));
    CHECK(text.find("Z-2-2") < text.find("neg-0-0"));
}

TEST_CASE("a one-row summary writes a two-line file") {
    TempDir tmp;
    CorrelationSummary s;
    s.rows = {{"VAL-2-2", 0.875, 2048}};
    write_summary_csv(s, tmp.file("one.csv"));
    std::string text = slurp(tmp.file("one.csv"));
    CHECK(text == "metric,correlation,n\nVAL-2-2,0.875,2048\n");
}

TEST_CASE("summary correlations are permutation-invariant up to rounding") {
    std::vector<ComparisonRecord> records;
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        ComparisonRecord rec;
        rec.env_id = 0;
        rec.pair_id = 0;
        rec.interp_step = i;
        rec.regret = rng.uniform();
        rec.metric_values = {rec.regret + 0.3 * rng.gaussian()};
        records.push_back(rec);
    }
    CorrelationSummary forward = summarise_records(records, {"VAL-2-2"});
    std::vector<ComparisonRecord> reversed(records.rbegin(), records.rend());
    CorrelationSummary backward = summarise_records(reversed, {"VAL-2-2"});
    CHECK(std::abs(forward.rows[0].correlation - backward.rows[0].correlation) <=
          1e-12);
}

TEST_CASE("summary excludes missing values pairwise") {
    std::vector<ComparisonRecord> records;
    Rng rng(9);
    for (int i = 0; i < 30; ++i) {
        ComparisonRecord rec;
        rec.env_id = 0;
        rec.pair_id = 0;
        rec.interp_step = i;
        rec.regret = rng.uniform();
        rec.metric_values = {rec.regret};
        if (i % 3 == 0) rec.metric_values[0] = std::numeric_limits<double>::quiet_NaN();
        records.push_back(rec);
    }
    CorrelationSummary s = summarise_records(records, {"VAL-2-2"});
    CHECK(s.rows[0].n_samples == 20);
    CHECK(std::abs(s.rows[0].correlation - 1.0) <= 1e-12);
}

TEST_CASE("experiment runs and is deterministic across worker counts") {
    ExperimentConfig cfg = tiny_config();
    ExperimentResult serial = run_experiment(cfg);
    CHECK(serial.records.size() == 2 * 3 * 4);
    for (const auto& row : serial.summary.rows) {
        CHECK(row.correlation >= -1.0);
        CHECK(row.correlation <= 1.0);
    }
    for (const auto& rec : serial.records) {
        CHECK(rec.regret >= 0.0);
        CHECK(rec.regret <= 1.0);
    }

    cfg.parallelism = 4;
    ExperimentResult parallel = run_experiment(cfg);
    REQUIRE(parallel.records.size() == serial.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        CHECK(parallel.records[i].regret == serial.records[i].regret);
        CHECK(parallel.records[i].metric_values == serial.records[i].metric_values);
    }
}

TEST_CASE("rollout-mode experiments are deterministic too") {
    ExperimentConfig cfg = tiny_config();
    cfg.regret_mode = RegretMode::Rollout;
    ExperimentResult serial = run_experiment(cfg);
    cfg.parallelism = 3;
    ExperimentResult parallel = run_experiment(cfg);
    REQUIRE(parallel.records.size() == serial.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i)
        CHECK(parallel.records[i].regret == serial.records[i].regret);
}

TEST_CASE("experiment records are ordered by (env, pair, step)") {
    ExperimentConfig cfg = tiny_config();
    ExperimentResult result = run_experiment(cfg);
    std::size_t idx = 0;
    for (int env = 0; env < cfg.n_envs; ++env)
        for (int p = 0; p < cfg.gen.pairs_per_env; ++p)
            for (int i = 1; i <= cfg.gen.interp_steps; ++i, ++idx) {
                CHECK(result.records[idx].env_id == env);
                CHECK(result.records[idx].pair_id == p);
                CHECK(result.records[idx].interp_step == i);
            }
}

TEST_CASE("scatter SVG handles empty and single-point inputs") {
    TempDir tmp;
    emit_scatter_svg({}, {"VAL-2-2"}, "VAL-2-2", tmp.file("empty.svg"));
    std::string empty = slurp(tmp.file("empty.svg"));
    CHECK(empty.find("<svg") != std::string::npos);
    CHECK(empty.find("</svg>") != std::string::npos);
    CHECK(empty.find("circle") == std::string::npos);

    ComparisonRecord rec;
    rec.env_id = 0;
    rec.pair_id = 0;
    rec.interp_step = 1;
    rec.regret = 0.25;
    rec.metric_values = {0.5};
    emit_scatter_svg({rec}, {"VAL-2-2"}, "VAL-2-2", tmp.file("one.svg"));
    std::string one = slurp(tmp.file("one.svg"));
    CHECK(one.find("circle") != std::string::npos);

    CHECK_THROWS_AS(emit_scatter_svg({rec}, {"VAL-2-2"}, "EPIC-2-2", tmp.file("x.svg")),
                    Error);
}

TEST_CASE("scatter SVG output is reproducible byte for byte") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    ExperimentResult result = run_experiment(cfg);
    emit_scatter_svg(result.records, cfg.metric_specs, "VAL-2-2", tmp.file("a.svg"));
    emit_scatter_svg(result.records, cfg.metric_specs, "VAL-2-2", tmp.file("b.svg"));
    CHECK(slurp(tmp.file("a.svg")) == slurp(tmp.file("b.svg")));
}
