#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gradkit/ensemble.hpp"
#include "gradkit/model.hpp"
#include "gradkit/optimizer.hpp"
#include "gradkit/trainer.hpp"

namespace gradkit {

struct OptimizerEntry {
    std::string label;  // run-id prefix; defaults to the variant name
    OptimConfig optim;
    std::vector<std::uint64_t> seeds;
};

struct EnsembleSpec {
    std::string name;
    std::vector<std::string> members;  // run ids; repeats are allowed
};

struct ExperimentConfig {
    std::string dataset_path;
    double feature_scale = 16.0;
    ModelSpec model;
    TrainConfig train;
    int folds = 5;
    std::uint64_t fold_seed = 0;
    std::string out_dir = "runs";
    // Fuse raw pre-softmax rows instead of probabilities when computing the
    // in-memory ensemble reports. Files always carry probabilities.
    bool fuse_logits = false;
    std::vector<OptimizerEntry> optimizers;
    std::vector<EnsembleSpec> ensembles;

    void validate() const;
};

std::string run_id(const std::string& label, std::uint64_t seed);
std::string prediction_filename(const std::string& id, int fold);

/// JSON config. Unknown keys are rejected so typos cannot silently fall
/// back to defaults.
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin);
ExperimentConfig load_experiment_config(const std::string& path);

struct RunOutcome {
    std::string id;
    std::string label;
    std::uint64_t seed = 0;
    int fold = 0;
    std::string file;
    bool ok = false;
    std::string error;
};

struct SummaryRow {
    std::string label;
    std::size_t seed_count = 0;
    double acc_avg = 0.0;
    double acc_std = 0.0;  // sample standard deviation; 0 for a single seed
    double f_avg = 0.0;
    double f_std = 0.0;
};

struct ExperimentResult {
    std::vector<RunOutcome> runs;
    bool partial = false;
    std::vector<EvalReport> standalone;  // one per (label, seed), pooled over folds
    std::vector<SummaryRow> summaries;   // across-seed avg/std per label
    std::vector<EvalReport> ensembles;
    std::vector<std::string> skipped;    // groups dropped because a member run failed
};

/// Worker count: GRADKIT_WORKERS wins, then `requested`, then the hardware
/// count. Always at least 1.
unsigned resolve_workers(unsigned requested);

/// Trains every (optimizer, seed, fold) job, saving one prediction file
/// each, then builds stand-alone, summary, and ensemble reports. Failed
/// runs are excluded and recorded; the result is marked partial.
ExperimentResult experiment_run(const ExperimentConfig& cfg, unsigned workers = 0);

/// Fusion over previously saved prediction files; optionally writes the
/// fused sets back as prediction files next to their members.
std::vector<EvalReport> fuse_saved(const ExperimentConfig& cfg, bool write_fused_files);

/// Full report (stand-alone, summaries, ensembles) from saved files only.
ExperimentResult report_saved(const ExperimentConfig& cfg);

struct ReportRow {
    std::string method;
    std::size_t members = 1;
    std::string fold;  // "0".."k-1", "pooled", "pooled-avg", "pooled-std"
    double accuracy = 0.0;
    double f_measure = 0.0;
};

std::vector<ReportRow> flatten_reports(const ExperimentResult& res);
void write_csv(const std::string& path, const std::vector<ReportRow>& rows);
void write_text_table(std::ostream& out, const std::vector<ReportRow>& rows);
void write_manifest(const std::string& path, const ExperimentResult& res);

}  // namespace gradkit
