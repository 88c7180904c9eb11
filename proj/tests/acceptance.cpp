// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "advml/errors.hpp"
#include "advml/harness.hpp"
#include "advml/protocol.hpp"
#include "reference.hpp"

using namespace advml;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%.3f", v[i]);
    return s + "]";
}

// Criterion 9 bookkeeping: every pipeline run is repeated over the wire.
struct WireCheck {
    std::size_t runs = 0;
    std::vector<std::string> mismatches;
};
WireCheck g_wire;

PipelineResult run_served(const ExperimentConfig& config, const std::set<Stage>& stages) {
    auto oracle = make_oracle(config, make_partitions(config));
    OracleServer server(*oracle);
    RemoteOracle remote("127.0.0.1", server.port());
    return run_pipeline(config, stages, &remote, false);
}

PipelineResult run(const ExperimentConfig& config, const std::set<Stage>& stages, const std::string& tag) {
    auto local = run_pipeline(config, stages, nullptr, false);
    if (local.exit_status != 0) throw Error(tag + ": pipeline failed in " + local.failed_stage + ": " + local.error);
    ++g_wire.runs;
    const auto wire = run_served(config, stages);
    if (wire.files != local.files) g_wire.mismatches.push_back(tag);
    return local;
}

json file_json(const PipelineResult& r, const std::string& name) { return json::parse(r.files.at(name)); }

ExperimentConfig base_config(std::uint64_t seed) {
    ExperimentConfig c;
    c.seed = seed;
    c.corpus_n = 10000;
    c.target_train = 5000;
    c.test_size = 1000;
    c.active_draws = {500};
    c.active_selects = {224};
    return c;
}

Outcome gradient_correctness() {
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        for (auto kind : {LossKind::cross_entropy, LossKind::squared_error}) {
            Rng rng(derive_seed(seed, "acceptance.gradient"));
            const std::size_t dim = 1 + rng.below(10), layers = 1 + rng.below(3), width = 2 + rng.below(6);
            const auto params = ref::random_network(rng, dim, layers, width);
            std::vector<LabeledFeatures> batch;
            for (std::size_t i = 0, n = 1 + rng.below(8); i < n; ++i)
                batch.push_back({ref::random_features(rng, dim), rng.below(2) ? Label::two : Label::one});
            TrainingConfig config;
            config.hidden_layers = layers;
            config.neurons_per_layer = width;
            config.loss = kind;
            const auto norm = Normalizer::identity(dim);
            worst = std::max(worst, ref::max_relative_error(gradients(params, batch, config, norm),
                                                            ref::finite_difference(params, batch, kind, norm, 1e-5)));
            ++checked;
        }
    }
    return {worst < 1e-4, std::to_string(checked) + " networks, max relative error " + fmt("%.2e", worst)};
}

Outcome metric_equivalence() {
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(derive_seed(seed, "acceptance.metric"));
        const std::size_t n = 2 + rng.below(199);
        std::vector<Label> a(n), b(n);
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.below(2) ? Label::two : Label::one;
            b[i] = rng.below(2) ? Label::two : Label::one;
            // Coarse grid forces ties.
            scores[i] = rng.below(3) == 0 ? static_cast<double>(rng.below(11)) / 10.0 : rng.uniform();
        }
        a[0] = Label::one;
        a[1] = Label::two;
        if (!(divergence(a, b) == ref::divergence(a, b))) ++mismatches;
        const auto t = optimize_threshold(scores, a);
        if (t.d_max != ref::best_d_max(scores, a) || ref::d_max_at(scores, a, t.threshold) != t.d_max) ++mismatches;
    }
    return {mismatches == 0, "100 instances, " + std::to_string(mismatches) + " mismatches"};
}

Outcome quota_exactness() {
    OracleService oracle(generate_corpus(500, 50, 0.3, 1), TargetKind::naive_bayes, 1, {.calls_per_day = 1000});
    bool ok = true;
    for (int day = 0; day < 3; ++day) {
        for (int i = 0; i < 1000; ++i) {
            oracle.classify("probe text " + std::to_string(i));
            if (i % 100 == 0) oracle.submit_feedback("feedback text", Label::two);
        }
        bool limited = false;
        try {
            oracle.classify("one too many");
        } catch (const RateLimitedError&) {
            limited = true;
        }
        oracle.submit_feedback("feedback after limit", Label::one);
        ok = ok && limited && oracle.stats().calls_used_today == 1000;
        oracle.advance_day();
    }
    ok = ok && oracle.stats().total_calls == 3000;
    return {ok, "3 days x 1000 calls, 1001st rejected each day, feedback free"};
}

Outcome extraction_learns() {
    std::vector<double> d100, d500, d1000;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (std::size_t labels : {100u, 500u, 1000u}) {
            auto c = base_config(seed);
            c.extract_labels = labels;
            const double d =
                file_json(run(c, {Stage::extract}, "c4 seed " + std::to_string(seed)), "extraction.json")["d_max"];
            (labels == 100 ? d100 : labels == 500 ? d500 : d1000).push_back(d);
        }
    }
    const double single = d500[0];
    const double m100 = median(d100), m500 = median(d500), m1000 = median(d1000);
    const bool pass = single < 0.35 && m1000 < m100;
    return {pass, "seed 1 d_max(500) = " + fmt("%.3f", single) + "; medians 100/500/1000 = " + fmt("%.3f", m100) +
                      "/" + fmt("%.3f", m500) + "/" + fmt("%.3f", m1000)};
}

Outcome active_beats_benchmark() {
    std::vector<double> active[2], bench[2];
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto c = base_config(seed);
        c.active_draws = {500, 1000};
        c.active_selects = {224, 579};
        c.active_strategy = SelectionKind::closest_k;
        const auto r = run(c, {Stage::active}, "c5 seed " + std::to_string(seed));
        std::istringstream lines(r.files.at("active_rounds.jsonl"));
        double a[2] = {0, 0}, b[2] = {0, 0};
        for (std::string line; std::getline(lines, line);) {
            const auto j = json::parse(line);
            const int row = j["row"];
            if (j["scheme"] == "active") a[row] = j["divergence"]["d_max"];
            if (j["scheme"] == "benchmark") b[row] = j["divergence"]["d_max"];
        }
        for (int row = 0; row < 2; ++row) {
            active[row].push_back(a[row]);
            bench[row].push_back(b[row]);
        }
    }
    bool pass = true;
    std::string detail;
    const char* names[2] = {"+224", "+579"};
    for (int row = 0; row < 2; ++row) {
        int wins = 0;
        std::vector<double> gain;
        for (std::size_t s = 0; s < 5; ++s) {
            wins += active[row][s] <= bench[row][s];
            gain.push_back(bench[row][s] - active[row][s]);
        }
        const double g = median(gain);
        pass = pass && wins >= 4 && g > 0.0;
        detail += std::string(row ? "; " : "") + names[row] + ": wins " + std::to_string(wins) + "/5, median gain " +
                  fmt("%+.3f", g) + ", active " + list(active[row]) + " bench " + list(bench[row]);
    }
    return {pass, detail};
}

Outcome attacks(Outcome& evasion) {
    int poison_ok = 0, evasion_ok = 0;
    std::vector<double> ranked, random, sel, base;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto c = base_config(seed);
        c.poison_p = 10.0;
        c.attack_pool = 1000;
        c.evasion_n = 100;
        const auto r = run(c, {Stage::extract, Stage::evade, Stage::poison}, "c6/c7 seed " + std::to_string(seed));
        const auto p = file_json(r, "poison_report.json");
        const double dr = p["rank_selected"]["d"], dn = p["random_flip"]["d"];
        ranked.push_back(dr);
        random.push_back(dn);
        poison_ok += dr > 0.0 && dr >= dn;
        const auto e = file_json(r, "evasion.json");
        sel.push_back(e["selected_error_rate"]);
        base.push_back(e["baseline_error_rate"]);
        evasion_ok += sel.back() >= base.back();
    }
    evasion = {evasion_ok >= 4, std::to_string(evasion_ok) + "/5 seeds; selected " + list(sel) + " random " + list(base)};
    return {poison_ok >= 4, std::to_string(poison_ok) + "/5 seeds; rank-selected d " + list(ranked) + " random-flip d " +
                                list(random)};
}

std::map<std::string, std::string> read_dir(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        out[entry.path().filename().string()] = buf.str();
    }
    return out;
}

Outcome determinism() {
    const auto root = std::filesystem::temp_directory_path() / "advml_acceptance";
    std::filesystem::remove_all(root);
    ExperimentConfig a;
    a.out_dir = root / "a";
    ExperimentConfig b = a;
    b.out_dir = root / "b";
    const auto ra = run_pipeline(a, all_stages());
    const auto rb = run_pipeline(b, all_stages());
    ++g_wire.runs;
    if (run_served(a, all_stages()).files != ra.files) g_wire.mismatches.push_back("default pipeline");
    const bool ok = ra.exit_status == 0 && rb.exit_status == 0 && ra.files == rb.files &&
                    read_dir(a.out_dir) == read_dir(b.out_dir) && read_dir(a.out_dir) == ra.files;
    std::filesystem::remove_all(root);
    return {ok, std::to_string(ra.files.size()) + " report files compared byte for byte"};
}

} // namespace

int main() {
    std::vector<std::pair<std::string, Outcome>> results;
    std::vector<double> seconds;
    auto timed = [&](const std::string& name, const std::function<Outcome()>& fn) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
        results.emplace_back(name, o);
    };

    timed("gradient correctness", gradient_correctness);
    timed("metric oracle equivalence", metric_equivalence);
    timed("quota exactness", quota_exactness);
    timed("extraction learns", extraction_learns);
    timed("active learning beats benchmark", active_beats_benchmark);
    Outcome evasion;
    timed("causative attack, rank selection matters", [&] { return attacks(evasion); });
    results.emplace_back("evasion selection effective", evasion);
    seconds.push_back(0.0);
    timed("determinism", determinism);
    results.emplace_back("protocol equivalence",
                         Outcome{g_wire.mismatches.empty() && g_wire.runs > 0,
                                 std::to_string(g_wire.runs) + " runs repeated over TCP, " +
                                     std::to_string(g_wire.mismatches.size()) + " differ"});
    seconds.push_back(0.0);

    bool all = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& [name, o] = results[i];
        all = all && o.pass;
        std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, name.c_str(),
                    o.detail.c_str(), seconds[i]);
    }
    std::fflush(stdout);
    return all ? 0 : 1;
}
