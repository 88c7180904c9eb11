#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "advml/corpus.hpp"
#include "advml/errors.hpp"
#include "advml/harness.hpp"
#include "advml/protocol.hpp"
#include "advml/rng.hpp"

namespace {

using namespace advml;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string oracle_addr;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_oracle_addr) {
    cmd->add_option("--config", args.config_path, "key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--set", args.overrides, "override a config key (key=value), repeatable");
    if (with_oracle_addr) {
        cmd->add_option("--out", args.out, "report directory");
        cmd->add_option("--oracle-addr", args.oracle_addr, "HOST:PORT of a served oracle");
    }
}

ExperimentConfig resolve(const CommonArgs& args) {
    ExperimentConfig config = args.config_path.empty() ? ExperimentConfig{} : load_config(args.config_path);
    for (const auto& kv : args.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed) config.seed = *args.seed;
    if (!args.out.empty()) config.out_dir = args.out;
    config.validate();
    return config;
}

int run_stages(const CommonArgs& args, const std::set<Stage>& stages) {
    const ExperimentConfig config = resolve(args);
    std::unique_ptr<RemoteOracle> remote;
    if (!args.oracle_addr.empty()) {
        auto [host, port] = RemoteOracle::parse_address(args.oracle_addr);
        remote = std::make_unique<RemoteOracle>(host, port);
    }
    const auto result = run_pipeline(config, stages, remote.get());
    if (result.exit_status == 0) std::cout << result.files.at("summary.txt");
    std::cout << "reports: " << config.out_dir.string() << '\n';
    return result.exit_status;
}

OracleServer* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Black-box extraction, active learning and follow-on attacks against a rate-limited text classifier"};
    app.require_subcommand(1);

    std::string corpus_out;
    std::size_t gen_n = 10000, gen_vocab = ExperimentConfig{}.corpus_vocab_size;
    double gen_overlap = 0.3;
    std::uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("gen-corpus", "write a synthetic labeled corpus as TSV");
    gen->add_option("--out", corpus_out, "output path")->required();
    gen->add_option("-n,--samples", gen_n, "number of samples");
    gen->add_option("--vocab-size", gen_vocab, "words per class vocabulary");
    gen->add_option("--overlap", gen_overlap, "fraction of each class vocabulary shared")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", gen_seed, "master seed");

    CommonArgs serve_args;
    std::uint16_t port = 7700;
    bool stdio = false;
    auto* serve = app.add_subcommand("serve-oracle", "serve the configured target over NDJSON");
    add_common(serve, serve_args, false);
    serve->add_option("--port", port, "TCP port on 127.0.0.1");
    serve->add_flag("--stdio", stdio, "serve stdin/stdout instead of TCP");

    CommonArgs stage_args;
    struct Sub {
        const char* name;
        const char* help;
        std::set<Stage> stages;
    };
    const std::vector<Sub> subs{
        {"extract", "label queries, train the substitute, optimize its threshold", {Stage::extract}},
        {"active", "active-learning refinement against the random benchmark", {Stage::active}},
        {"evade", "pick near-threshold evasion samples", {Stage::extract, Stage::evade}},
        {"poison", "rank-selected label-flipping feedback attack", {Stage::extract, Stage::poison}},
        {"pipeline", "every stage end to end", all_stages()},
    };
    std::vector<CLI::App*> stage_cmds;
    for (const auto& s : subs) {
        auto* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, stage_args, true);
        stage_cmds.push_back(cmd);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            if (auto parent = std::filesystem::path(corpus_out).parent_path(); !parent.empty())
                std::filesystem::create_directories(parent);
            save_corpus(generate_corpus(gen_n, gen_vocab, gen_overlap, derive_seed(gen_seed, "corpus")), corpus_out);
            std::cout << "wrote " << gen_n << " samples to " << corpus_out << '\n';
            return 0;
        }
        if (*serve) {
            const ExperimentConfig config = resolve(serve_args);
            auto oracle = make_oracle(config, make_partitions(config));
            if (stdio) {
                serve_stream(*oracle, std::cin, std::cout);
                return 0;
            }
            OracleServer server(*oracle, port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "oracle listening on 127.0.0.1:" << server.port() << '\n';
            server.wait();
            g_server = nullptr;
            return 0;
        }
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (*stage_cmds[i]) return run_stages(stage_args, subs[i].stages);
    } catch (const std::exception& e) {
        std::cerr << "advml: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
