#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "advml/active.hpp"
#include "advml/attacks.hpp"
#include "advml/corpus.hpp"
#include "advml/extract.hpp"
#include "advml/nnet.hpp"
#include "advml/oracle.hpp"
#include "advml/target.hpp"

namespace advml {

struct ExperimentConfig {
    // Corpus: loaded from corpus_path when set, generated otherwise.
    std::string corpus_path;
    std::size_t corpus_n = 12000;
    std::size_t corpus_vocab_size = 200;
    double corpus_overlap = 0.3;

    TargetKind oracle_kind = TargetKind::naive_bayes;
    std::size_t calls_per_day = 1000;
    std::size_t target_train = 5000;

    std::size_t vocab_k = 2000;
    std::size_t test_size = 1000;
    std::size_t extract_labels = 500;
    // Cap on all oracle classify calls made by the run.
    std::size_t budget = 20000;
    TrainingConfig initial_profile = full_data_profile();
    TrainingConfig refine_profile = limited_data_profile();

    std::size_t active_initial = 100;
    std::vector<std::size_t> active_draws{500, 1000, 2000};
    // Per-row selection counts for closest_k; ignored for margin.
    std::vector<std::size_t> active_selects{224, 579, 1007};
    SelectionKind active_strategy = SelectionKind::margin;
    double active_margin = 0.25;
    std::size_t active_rounds = 1;

    double poison_p = 10.0;
    std::size_t attack_pool = 1000;
    std::size_t attack_eval = 1000;
    std::size_t evasion_n = 100;
    EvasionObjective evasion_objective = EvasionObjective::average_error;

    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "reports";

    // "key = value" assignment; throws InputError on unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    void validate() const;
    // Canonical key = value listing of every field.
    std::string describe() const;
};

// Reads "key = value" lines; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

// Disjoint slices of the corpus for one run, all derived from the master seed.
struct Partitions {
    SampleSet target_train;
    std::vector<Sample> test;
    std::vector<Sample> attack_pool;
    std::vector<Sample> attack_eval;
    // Extraction queries come from the front, then the active-learning
    // initial labels, then the active-learning draw pool.
    std::vector<Sample> adversary_pool;
};

Partitions make_partitions(const ExperimentConfig& config);

// The target the served or in-process oracle runs for this config.
std::unique_ptr<OracleService> make_oracle(const ExperimentConfig& config, const Partitions& parts);

// One report-table row: paired active and benchmark runs at equal totals.
struct TableRow {
    std::size_t initial_samples = 0;
    std::size_t active_additional = 0;
    DivergenceReport active;
    std::size_t benchmark_additional = 0;
    DivergenceReport benchmark;
};

struct Table {
    std::string csv;
    std::string text;
};

// Throws InputError when a row's active and benchmark totals differ.
Table emit_table(std::span<const TableRow> rows);

enum class Stage { extract, active, evade, poison };

std::set<Stage> all_stages();

struct PipelineResult {
    int exit_status = 0;
    std::string failed_stage;
    std::string error;
    // File name -> contents, exactly as written to the output directory.
    std::map<std::string, std::string> files;
    // Oracle calls attributed to each stage.
    std::map<std::string, std::size_t> calls_by_stage;
    std::size_t budget_consumed = 0;
    std::uint64_t oracle_total_calls = 0;
};

// Runs the requested stages against `oracle` (in-process when null: one is
// built from the config). Reports are written to config.out_dir unless
// write_files is false; they are always returned in the result.
PipelineResult run_pipeline(const ExperimentConfig& config, const std::set<Stage>& stages, Oracle* oracle = nullptr,
                            bool write_files = true);

} // namespace advml
