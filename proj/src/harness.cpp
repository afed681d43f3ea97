#include "rewardlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace rewardlab {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void run_env_task(const ExperimentConfig& config, int env_id,
                  const std::vector<MetricSpec>& specs,
                  std::vector<ComparisonRecord>& records) {
    const int pairs = config.gen.pairs_per_env;
    const int steps = config.gen.interp_steps;
    RewardPairBatch batch = gen_batch(config.gen, config.master_seed, env_id);
    const Mdp& mdp = batch.env;
    DistributionPair dists = DistributionPair::uniform(mdp.n_states, mdp.n_actions);

    for (int p = 0; p < pairs; ++p) {
        const RewardTable& r1 = batch.base_pairs[p].first;
        Policy pi_1 = optimal_policy(mdp, r1);
        Policy pi_x = worst_policy(mdp, r1);

        // Standardised r1 is identical across the pair's interpolants.
        std::vector<RewardTable> std_r1(specs.size());
        std::vector<bool> std_r1_ok(specs.size(), false);
        for (std::size_t k = 0; k < specs.size(); ++k) {
            try {
                std_r1[k] = standardise(specs[k], r1, mdp, dists);
                std_r1_ok[k] = true;
            } catch (const Error&) {
                std_r1_ok[k] = false;
            }
        }

        for (int i = 0; i < steps; ++i) {
            const RewardTable& ri = batch.interpolants[p][i];
            ComparisonRecord rec;
            rec.env_id = env_id;
            rec.pair_id = p;
            rec.interp_step = i + 1;
            std::uint64_t seed = hash64({config.master_seed,
                                         static_cast<std::uint64_t>(env_id),
                                         static_cast<std::uint64_t>(p),
                                         static_cast<std::uint64_t>(i), kSeedRoleRegret});
            rec.regret = pair_regret_with_policies(mdp, r1, ri, pi_1, pi_x,
                                                   config.regret_mode, seed)
                             .regret;
            rec.metric_values.assign(specs.size(),
                                     std::numeric_limits<double>::quiet_NaN());
            for (std::size_t k = 0; k < specs.size(); ++k) {
                if (!std_r1_ok[k]) continue;
                try {
                    RewardTable si = standardise(specs[k], ri, mdp, dists);
                    rec.metric_values[k] =
                        distance_eval(specs[k].dist, std_r1[k], si, mdp, dists);
                } catch (const Error&) {
                    // left as NaN; excluded pairwise from the correlation
                }
            }
            records[(static_cast<std::size_t>(env_id) * pairs + p) * steps + i] =
                std::move(rec);
        }
    }
}

} // namespace

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw Error(ErrorCode::LengthMismatch, "need two equal-length sequences of >= 2");
    double mean_x = 0.0, mean_y = 0.0, m2x = 0.0, m2y = 0.0, cxy = 0.0;
    long n = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ++n;
        double dx = xs[i] - mean_x;
        double dy = ys[i] - mean_y;
        mean_x += dx / n;
        mean_y += dy / n;
        m2x += dx * (xs[i] - mean_x);
        m2y += dy * (ys[i] - mean_y);
        cxy += dx * (ys[i] - mean_y);
    }
    if (!(m2x > 0.0) || !(m2y > 0.0))
        throw Error(ErrorCode::ZeroVariance, "constant sequence");
    return std::clamp(cxy / std::sqrt(m2x * m2y), -1.0, 1.0);
}

CorrelationSummary summarise_records(const std::vector<ComparisonRecord>& records,
                                     const std::vector<std::string>& specs) {
    CorrelationSummary summary;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        std::vector<double> xs, ys;
        xs.reserve(records.size());
        ys.reserve(records.size());
        for (const ComparisonRecord& rec : records) {
            double v = rec.metric_values[k];
            if (std::isfinite(v)) {
                xs.push_back(v);
                ys.push_back(rec.regret);
            }
        }
        CorrelationSummary::Row row;
        row.spec = specs[k];
        row.n_samples = static_cast<long>(xs.size());
        try {
            row.correlation = pearson_correlation(xs, ys);
        } catch (const Error&) {
            row.correlation = std::numeric_limits<double>::quiet_NaN();
        }
        summary.rows.push_back(std::move(row));
    }
    std::sort(summary.rows.begin(), summary.rows.end(),
              [](const CorrelationSummary::Row& a, const CorrelationSummary::Row& b) {
                  bool fa = std::isfinite(a.correlation);
                  bool fb = std::isfinite(b.correlation);
                  if (fa != fb) return fa; // NaN rows sink to the bottom
                  if (fa && a.correlation != b.correlation)
                      return a.correlation > b.correlation;
                  return a.spec < b.spec;
              });
    return summary;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.gen.validate();
    if (config.n_envs < 1) throw Error(ErrorCode::BadConfig, "n_envs must be >= 1");
    std::vector<MetricSpec> specs;
    specs.reserve(config.metric_specs.size());
    for (const std::string& text : config.metric_specs)
        specs.push_back(parse_metric_spec(text));

    ExperimentResult result;
    result.records.resize(static_cast<std::size_t>(config.n_envs) *
                          config.gen.pairs_per_env * config.gen.interp_steps);

    int workers = config.parallelism > 0
                      ? config.parallelism
                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, config.n_envs);

    if (workers <= 1) {
        for (int env = 0; env < config.n_envs; ++env)
            run_env_task(config, env, specs, result.records);
    } else {
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(workers);
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&, w]() {
                try {
                    for (int env = w; env < config.n_envs; env += workers)
                        run_env_task(config, env, specs, result.records);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : threads) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    result.summary = summarise_records(result.records, config.metric_specs);
    return result;
}

void write_records_csv(const std::vector<ComparisonRecord>& records,
                       const std::vector<std::string>& specs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "env_id,pair_id,interp_step,regret";
    for (const std::string& s : specs) out << "," << s;
    out << "\n";
    for (const ComparisonRecord& rec : records) {
        out << rec.env_id << "," << rec.pair_id << "," << rec.interp_step << ","
            << format_double(rec.regret);
        for (double v : rec.metric_values) {
            out << ",";
            if (std::isfinite(v)) out << format_double(v);
        }
        out << "\n";
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::vector<ComparisonRecord> read_records_csv(const std::string& path,
                                               std::vector<std::string>& specs_out) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::IoError, path + ": empty file");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 4 || header[0] != "env_id" || header[1] != "pair_id" ||
        header[2] != "interp_step" || header[3] != "regret")
        throw Error(ErrorCode::IoError, path + ": unexpected header");
    specs_out.assign(header.begin() + 4, header.end());

    std::vector<ComparisonRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        while (cells.size() < header.size()) cells.push_back(""); // trailing empties
        if (cells.size() != header.size())
            throw Error(ErrorCode::IoError, path + ": ragged row");
        ComparisonRecord rec;
        rec.env_id = std::stoi(cells[0]);
        rec.pair_id = std::stoi(cells[1]);
        rec.interp_step = std::stoi(cells[2]);
        rec.regret = std::stod(cells[3]);
        for (std::size_t k = 4; k < cells.size(); ++k)
            rec.metric_values.push_back(
                cells[k].empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : std::stod(cells[k]));
        records.push_back(std::move(rec));
    }
    return records;
}

void write_summary_csv(const CorrelationSummary& summary, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "metric,correlation,n\n";
    for (const auto& row : summary.rows)
        out << row.spec << "," << format_double(row.correlation) << "," << row.n_samples
            << "\n";
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

} // namespace rewardlab
