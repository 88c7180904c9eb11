#include "advml/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "advml/errors.hpp"
#include "advml/rng.hpp"

namespace advml {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::size_t to_size(std::string_view key, std::string_view value) {
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw InputError("config: '" + std::string(key) + "' expects a non-negative integer, got '" +
                         std::string(value) + "'");
    return out;
}

double to_real(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::string text(value);
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::logic_error&) {
        throw InputError("config: '" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
    }
}

std::vector<std::size_t> to_sizes(std::string_view key, std::string_view value) {
    std::vector<std::size_t> out;
    std::string item;
    std::istringstream in{std::string(value)};
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_size(key, item));
    }
    return out;
}

bool set_profile(TrainingConfig& c, std::string_view field, std::string_view key, std::string_view value) {
    if (field == "hidden_layers") c.hidden_layers = to_size(key, value);
    else if (field == "neurons_per_layer") c.neurons_per_layer = to_size(key, value);
    else if (field == "loss") c.loss = parse_loss_kind(value);
    else if (field == "weight_init_scale") c.weight_init_scale = to_real(key, value);
    else if (field == "minibatch_size") c.minibatch_size = to_size(key, value);
    else if (field == "momentum") c.momentum = to_real(key, value);
    else if (field == "epochs") c.epochs = to_size(key, value);
    else if (field == "learning_rate") c.learning_rate = to_real(key, value);
    else return false;
    return true;
}

std::string join(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

std::string profile_lines(std::string_view prefix, const TrainingConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << prefix << ".hidden_layers = " << c.hidden_layers << '\n'
        << prefix << ".neurons_per_layer = " << c.neurons_per_layer << '\n'
        << prefix << ".loss = " << to_string(c.loss) << '\n'
        << prefix << ".weight_init_scale = " << c.weight_init_scale << '\n'
        << prefix << ".minibatch_size = " << c.minibatch_size << '\n'
        << prefix << ".momentum = " << c.momentum << '\n'
        << prefix << ".epochs = " << c.epochs << '\n'
        << prefix << ".learning_rate = " << c.learning_rate << '\n';
    return out.str();
}

} // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
    if (key == "corpus.path") corpus_path = std::string(value);
    else if (key == "corpus.n") corpus_n = to_size(key, value);
    else if (key == "corpus.vocab_size") corpus_vocab_size = to_size(key, value);
    else if (key == "corpus.overlap") corpus_overlap = to_real(key, value);
    else if (key == "oracle.kind") oracle_kind = parse_target_kind(value);
    else if (key == "oracle.calls_per_day") calls_per_day = to_size(key, value);
    else if (key == "oracle.target_train") target_train = to_size(key, value);
    else if (key == "vocab.k") vocab_k = to_size(key, value);
    else if (key == "test.size") test_size = to_size(key, value);
    else if (key == "extract.labels") extract_labels = to_size(key, value);
    else if (key == "budget") budget = to_size(key, value);
    else if (key == "active.initial") active_initial = to_size(key, value);
    else if (key == "active.draws") active_draws = to_sizes(key, value);
    else if (key == "active.selects") active_selects = to_sizes(key, value);
    else if (key == "active.strategy") active_strategy = parse_selection_kind(value);
    else if (key == "active.margin") active_margin = to_real(key, value);
    else if (key == "active.rounds") active_rounds = to_size(key, value);
    else if (key == "attack.p") poison_p = to_real(key, value);
    else if (key == "attack.pool") attack_pool = to_size(key, value);
    else if (key == "attack.eval") attack_eval = to_size(key, value);
    else if (key == "evasion.n") evasion_n = to_size(key, value);
    else if (key == "evasion.objective") evasion_objective = parse_evasion_objective(value);
    else if (key == "seed") seed = to_size(key, value);
    else if (key == "out") out_dir = std::string(value);
    else if (key.starts_with("initial.") && set_profile(initial_profile, key.substr(8), key, value)) {
    } else if (key.starts_with("refine.") && set_profile(refine_profile, key.substr(7), key, value)) {
    } else {
        throw InputError("config: unknown key '" + std::string(key) + "'");
    }
}

void ExperimentConfig::validate() const {
    initial_profile.validate();
    refine_profile.validate();
    if (vocab_k == 0) throw InputError("config: vocab.k must be positive");
    if (calls_per_day == 0) throw InputError("config: oracle.calls_per_day must be positive");
    if (active_draws.empty()) throw InputError("config: active.draws is empty");
    if (active_strategy == SelectionKind::closest_k && active_selects.size() != active_draws.size())
        throw InputError("config: active.selects needs one entry per active.draws entry");
    if (active_rounds == 0) throw InputError("config: active.rounds must be positive");
    if (!(poison_p >= 0.0 && poison_p <= 100.0)) throw InputError("config: attack.p must be in [0, 100]");
    if (evasion_n > attack_pool) throw InputError("config: evasion.n exceeds attack.pool");
    if (corpus_path.empty()) {
        const std::size_t need = target_train + test_size + attack_pool + attack_eval + extract_labels +
                                 active_initial + *std::max_element(active_draws.begin(), active_draws.end());
        if (need > corpus_n)
            throw InputError("config: corpus.n = " + std::to_string(corpus_n) + " is too small, need " +
                             std::to_string(need));
    }
}

std::string ExperimentConfig::describe() const {
    std::ostringstream out;
    out.precision(17);
    out << "corpus.path = " << corpus_path << '\n'
        << "corpus.n = " << corpus_n << '\n'
        << "corpus.vocab_size = " << corpus_vocab_size << '\n'
        << "corpus.overlap = " << corpus_overlap << '\n'
        << "oracle.kind = " << to_string(oracle_kind) << '\n'
        << "oracle.calls_per_day = " << calls_per_day << '\n'
        << "oracle.target_train = " << target_train << '\n'
        << "vocab.k = " << vocab_k << '\n'
        << "test.size = " << test_size << '\n'
        << "extract.labels = " << extract_labels << '\n'
        << "budget = " << budget << '\n'
        << profile_lines("initial", initial_profile) << profile_lines("refine", refine_profile)
        << "active.initial = " << active_initial << '\n'
        << "active.draws = " << join(active_draws) << '\n'
        << "active.selects = " << join(active_selects) << '\n'
        << "active.strategy = " << to_string(active_strategy) << '\n'
        << "active.margin = " << active_margin << '\n'
        << "active.rounds = " << active_rounds << '\n'
        << "attack.p = " << poison_p << '\n'
        << "attack.pool = " << attack_pool << '\n'
        << "attack.eval = " << attack_eval << '\n'
        << "evasion.n = " << evasion_n << '\n'
        << "evasion.objective = " << to_string(evasion_objective) << '\n'
        << "seed = " << seed << '\n';
    return out.str();
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        try {
            base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const InputError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    return parse_config(in, std::move(base));
}

Partitions make_partitions(const ExperimentConfig& config) {
    config.validate();
    SampleSet corpus = config.corpus_path.empty()
                           ? generate_corpus(config.corpus_n, config.corpus_vocab_size, config.corpus_overlap,
                                             derive_seed(config.seed, "corpus"))
                           : load_corpus(config.corpus_path);

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, "partition"));
    rng.shuffle(std::span<std::size_t>(order));

    const std::size_t fixed = config.target_train + config.test_size + config.attack_pool + config.attack_eval;
    if (fixed > corpus.size()) throw InputError("corpus has too few samples for the configured partitions");

    Partitions parts;
    parts.target_train.provenance = corpus.provenance;
    std::size_t k = 0;
    auto take = [&](std::size_t count, std::vector<Sample>& into) {
        for (std::size_t i = 0; i < count; ++i) into.push_back(corpus.samples[order[k++]]);
    };
    take(config.target_train, parts.target_train.samples);
    take(config.test_size, parts.test);
    take(config.attack_pool, parts.attack_pool);
    take(config.attack_eval, parts.attack_eval);
    take(corpus.size() - k, parts.adversary_pool);
    // The adversary only ever learns labels through the oracle.
    for (auto& s : parts.adversary_pool) s.label.reset();
    return parts;
}

std::unique_ptr<OracleService> make_oracle(const ExperimentConfig& config, const Partitions& parts) {
    OracleOptions options;
    options.calls_per_day = config.calls_per_day;
    return std::make_unique<OracleService>(parts.target_train, config.oracle_kind,
                                           derive_seed(config.seed, "target"), options);
}

Table emit_table(std::span<const TableRow> rows) {
    Table t;
    t.csv = "initial_samples,additional_samples,total_samples,d1_active,d2_active,d1_benchmark,d2_benchmark\n";
    t.text = "Initial Samples | Additional Samples | Total Samples | Active d1 | Active d2 | Benchmark d1 | "
             "Benchmark d2\n";
    char buf[256];
    for (const auto& r : rows) {
        if (r.active_additional != r.benchmark_additional)
            throw InputError("emit_table: active and benchmark additional samples differ (" +
                             std::to_string(r.active_additional) + " vs " + std::to_string(r.benchmark_additional) +
                             ")");
        const std::size_t total = r.initial_samples + r.active_additional;
        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.6f,%.6f,%.6f,%.6f\n", r.initial_samples, r.active_additional,
                      total, r.active.d1, r.active.d2, r.benchmark.d1, r.benchmark.d2);
        t.csv += buf;
        std::snprintf(buf, sizeof buf, "%15zu | %18zu | %13zu | %8.2f%% | %8.2f%% | %11.2f%% | %11.2f%%\n",
                      r.initial_samples, r.active_additional, total, 100 * r.active.d1, 100 * r.active.d2,
                      100 * r.benchmark.d1, 100 * r.benchmark.d2);
        t.text += buf;
    }
    return t;
}

std::set<Stage> all_stages() { return {Stage::extract, Stage::active, Stage::evade, Stage::poison}; }

namespace {

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Tracks oracle calls per stage through the shared budget.
class StageMeter {
public:
    StageMeter(PipelineResult& result, QueryBudget& budget, std::string stage)
        : result_(result), budget_(budget), stage_(std::move(stage)), start_(budget.consumed) {
        result_.failed_stage = stage_;
    }
    ~StageMeter() { result_.calls_by_stage[stage_] += budget_.consumed - start_; }

private:
    PipelineResult& result_;
    QueryBudget& budget_;
    std::string stage_;
    std::size_t start_;
};

struct RowOutcome {
    TableRow row;
    ActiveResult active;
};

} // namespace

PipelineResult run_pipeline(const ExperimentConfig& config, const std::set<Stage>& stages, Oracle* oracle,
                            bool write_files) {
    PipelineResult result;
    QueryBudget budget{config.budget, 0};
    std::unique_ptr<OracleService> local;
    std::uint64_t calls_at_start = 0;

    auto emit = [&](const std::string& name, std::string contents) {
        if (write_files) {
            std::filesystem::create_directories(config.out_dir);
            std::ofstream out(config.out_dir / name, std::ios::binary);
            out << contents;
        }
        result.files[name] = std::move(contents);
    };

    try {
        result.failed_stage = "setup";
        const Partitions parts = make_partitions(config);
        result.failed_stage = "target";
        if (oracle == nullptr) {
            local = make_oracle(config, parts);
            oracle = local.get();
        }
        calls_at_start = oracle->stats().total_calls;
        emit("config.txt", config.describe());

        const bool want_active = stages.contains(Stage::active);
        const bool want_attacks = stages.contains(Stage::evade) || stages.contains(Stage::poison);
        const bool want_extract = stages.contains(Stage::extract) || (want_attacks && !want_active);

        SampleSet test_labeled;
        if (want_extract || want_active) {
            StageMeter meter(result, budget, "test_labels");
            test_labeled = collect_labels(*oracle, parts.test, budget).labeled;
        }

        // The adversary's vocabulary comes from texts it holds, labeled or not.
        SampleSet visible;
        visible.samples = parts.adversary_pool;
        const Vocabulary vocab = build_vocabulary(visible, config.vocab_k);

        const auto extract_end = std::min(config.extract_labels, parts.adversary_pool.size());
        const auto initial_end = std::min(extract_end + config.active_initial, parts.adversary_pool.size());
        std::span<const Sample> adversary(parts.adversary_pool);

        std::optional<SubstituteClassifier> substitute;
        if (want_extract) {
            StageMeter meter(result, budget, "extract");
            auto collected = collect_labels(*oracle, adversary.subspan(0, extract_end), budget);
            TrainingConfig profile = config.initial_profile;
            profile.seed = derive_seed(config.seed, "extract.train");
            auto fit = fit_substitute(collected.labeled, profile, vocab, derive_seed(config.seed, "extract.split"));
            ExtractionReport report{evaluate_substitute(fit.substitute, test_labeled), budget.consumed,
                                    collected.days_elapsed, config_digest(profile), config.seed};
            auto j = to_json(report);
            j["validation"] = to_json(fit.validation);
            j["threshold"] = fit.substitute.threshold;
            j["labels"] = collected.labeled.size();
            emit("extraction.json", dump(j));
            std::ostringstream model;
            write_substitute(fit.substitute, model);
            emit("substitute.model", model.str());
            substitute = std::move(fit.substitute);
        }

        if (want_active) {
            StageMeter meter(result, budget, "active");
            ActiveLearningSetup setup;
            setup.initial_labeled =
                collect_labels(*oracle, adversary.subspan(extract_end, initial_end - extract_end), budget).labeled;
            setup.pool.assign(adversary.begin() + static_cast<std::ptrdiff_t>(initial_end), adversary.end());
            setup.test_set = test_labeled;
            setup.vocab = vocab;
            setup.initial_config = config.initial_profile;
            setup.config = config.refine_profile;

            std::vector<TableRow> rows;
            std::string jsonl;
            for (std::size_t row = 0; row < config.active_draws.size(); ++row) {
                setup.seed = derive_seed(config.seed, "active.row", row);
                const std::size_t draw_per_round = config.active_draws[row] / config.active_rounds;
                SelectionStrategy strategy =
                    config.active_strategy == SelectionKind::margin
                        ? SelectionStrategy::within_margin(config.active_margin)
                        : SelectionStrategy::closest(config.active_selects[row] / config.active_rounds);

                const std::size_t before = budget.consumed;
                auto active = run_active_learning(*oracle, setup, config.active_rounds, draw_per_round, strategy, budget);
                const std::size_t additional = budget.consumed - before;
                auto bench = run_random_benchmark(*oracle, setup, additional, budget);

                jsonl += nlohmann::json{{"row", row}, {"scheme", "initial"}, {"round", 0},
                                        {"training_size", setup.initial_labeled.size()},
                                        {"divergence", to_json(active.initial)}}
                             .dump() +
                         "\n";
                for (const auto& r : active.rounds) {
                    auto j = to_json(r);
                    j["row"] = row;
                    j["scheme"] = "active";
                    jsonl += j.dump() + "\n";
                }
                for (const auto& r : bench.rounds) {
                    auto j = to_json(r);
                    j["row"] = row;
                    j["scheme"] = "benchmark";
                    jsonl += j.dump() + "\n";
                }
                const auto& active_final = active.rounds.empty() ? active.initial : active.rounds.back().divergence;
                rows.push_back(TableRow{setup.initial_labeled.size(), additional, active_final,
                                        bench.rounds.back().selected, bench.rounds.back().divergence});
                substitute = std::move(active.substitute);
            }
            emit("active_rounds.jsonl", jsonl);
            const Table table = emit_table(rows);
            emit("table1.csv", table.csv);
            emit("table1.txt", table.text);
        }

        if (stages.contains(Stage::evade)) {
            StageMeter meter(result, budget, "evade");
            auto selection = select_evasion(*substitute, parts.attack_pool, config.evasion_n, config.evasion_objective);
            std::vector<std::size_t> order(parts.attack_pool.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            Rng rng(derive_seed(config.seed, "evasion.baseline"));
            rng.shuffle(std::span<std::size_t>(order));
            order.resize(config.evasion_n);
            std::sort(order.begin(), order.end());
            std::vector<Sample> baseline;
            for (auto i : order) baseline.push_back(parts.attack_pool[i]);

            const auto on_selected = labels_of(collect_labels(*oracle, selection.samples, budget).labeled);
            const auto on_baseline = labels_of(collect_labels(*oracle, baseline, budget).labeled);
            auto outcome = evaluate_evasion(on_selected, selection.samples, on_baseline, baseline);
            auto j = to_json(outcome);
            j["objective"] = to_string(config.evasion_objective);
            j["short"] = selection.is_short;
            j["threshold"] = substitute->threshold;
            emit("evasion.json", dump(j));
        }

        if (stages.contains(Stage::poison)) {
            StageMeter meter(result, budget, "poison");
            const auto plan = plan_poison(*substitute, parts.attack_pool, config.poison_p);
            const auto attacked = run_causative(*oracle, plan, parts.attack_eval, budget);
            oracle->reset();
            const auto random_plan = plan_random_flip_baseline(*substitute, parts.attack_pool, plan.items.size(),
                                                               derive_seed(config.seed, "poison.random"));
            const auto control = run_causative(*oracle, random_plan, parts.attack_eval, budget);
            oracle->reset();
            emit("poison_plan.json", dump(to_json(plan)));
            emit("poison_report.json", dump(nlohmann::json{{"rank_selected", to_json(attacked)},
                                                           {"random_flip", to_json(control)}}));
        }
        result.failed_stage.clear();
    } catch (const std::exception& e) {
        result.exit_status = 1;
        result.error = e.what();
        std::cerr << "advml: stage '" << result.failed_stage << "' failed: " << e.what() << '\n';
        emit("error.json", dump(nlohmann::json{{"stage", result.failed_stage}, {"error", result.error}}));
    }

    result.budget_consumed = budget.consumed;
    if (oracle != nullptr) {
        try {
            result.oracle_total_calls = oracle->stats().total_calls - calls_at_start;
        } catch (const std::exception&) {
        }
    }
    nlohmann::json calls(result.calls_by_stage);
    calls["total_budget_consumed"] = result.budget_consumed;
    calls["oracle_total_calls"] = result.oracle_total_calls;
    emit("oracle_calls.json", dump(calls));

    std::ostringstream summary;
    summary << "status: " << (result.exit_status == 0 ? "ok" : "failed in " + result.failed_stage) << '\n';
    summary << "oracle calls: " << result.oracle_total_calls << " (budget consumed " << result.budget_consumed
            << " of " << config.budget << ")\n";
    for (const auto& [stage, n] : result.calls_by_stage) summary << "  " << stage << ": " << n << '\n';
    if (auto it = result.files.find("table1.txt"); it != result.files.end()) summary << '\n' << it->second;
    emit("summary.txt", summary.str());
    return result;
}

} // namespace advml
