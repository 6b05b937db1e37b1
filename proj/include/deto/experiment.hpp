#ifndef DETO_EXPERIMENT_HPP
#define DETO_EXPERIMENT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "deto/benchmark.hpp"
#include "deto/optimizer.hpp"

namespace deto {

struct ProblemSpec {
    std::string id;
    MPBConfig mpb;
};

struct AlgorithmSpec {
    std::string id;
    AlgorithmConfig config;
};

/// One experiment sweep: every (problem, algorithm, repetition) triple runs
/// once, seeded from (master_seed, ids, repetition) so that editing the
/// config never reshuffles existing runs. The benchmark instance seed
/// depends only on (master_seed, problem, repetition): all algorithms face
/// the same landscape trajectory within a repetition, which is what makes
/// the paired statistics meaningful.
struct ExperimentConfig {
    std::vector<ProblemSpec> problems;
    std::vector<AlgorithmSpec> algorithms;
    int time_steps = 10;
    int repetitions = 31;
    std::uint64_t master_seed = 1;
    std::string output_dir = "results";
    int parallelism = 0;  // 0 -> hardware concurrency
    std::string baseline = "rbo";
};

/// Parses and validates a JSON config file. Unknown keys and invalid values
/// raise std::invalid_argument naming the offending field.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& json_text);
std::string config_to_json_text(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Plain-text run record: a commented header (ids, seeds, per-step optima
/// and wall clock) followed by CSV rows (step, fe, x..., y, best_y).
void write_run_record(const RunRecord& record, const std::string& path);
RunRecord read_run_record(const std::string& path);

struct ExperimentResult {
    int failures = 0;
    int completed = 0;
    std::string output_dir;
};

/// Executes the full sweep with a worker pool over runs, persists one record
/// file per run plus summary.csv / stats.csv, and mirrors the resolved
/// config to experiment.json. Individual run failures are logged to
/// failures.txt and skipped.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Prints the summary and statistics tables recomputed from the persisted
/// records in `results_dir`.
void write_report(const std::string& results_dir, std::ostream& out);

/// Writes plot_<kind>.csv next to the records. Kinds: trajectory (mean loss
/// per evaluation with a 95% band), bars (eps_f / eps_t mean and sd), rho
/// (budget ratios per algorithm).
std::string emit_plot_data(const std::string& results_dir, const std::string& kind);

}  // namespace deto

#endif  // DETO_EXPERIMENT_HPP
