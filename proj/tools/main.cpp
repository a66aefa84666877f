#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mailsig/errors.hpp"
#include "mailsig/learn.hpp"
#include "mailsig/pipeline.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 1;
    std::string events;
    std::string attributes;
    std::string format;
    std::string model;
    std::size_t components = 2;
    std::size_t rounds = 50;
    std::string weak;
    double threshold = 0.5;
    std::size_t clusters = 0;
};

void add_common_options(CLI::App* sub, CliState& state) {
    sub->add_option("--config", state.config_path, "JSON configuration file");
    sub->add_option("--out", state.out, "output directory (default: out)");
    sub->add_option("--seed", state.seed, "global random seed");
    sub->add_option("--events", state.events, "input events file (jsonl or mbox)");
    sub->add_option("--attributes", state.attributes, "actor attributes CSV");
    sub->add_option("--format", state.format, "input format: jsonl or mbox");
    sub->add_option("--model", state.model, "supervised model: adaboost or pls_logit");
    sub->add_option("--components", state.components, "PLS components");
    sub->add_option("--rounds", state.rounds, "boosting rounds");
    sub->add_option("--weak", state.weak, "weak learner: stump or logit1");
    sub->add_option("--threshold", state.threshold, "classification threshold");
    sub->add_option("--clusters", state.clusters, "cluster count (0 = elbow suggestion)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"email communication indicators toolkit"};
    app.require_subcommand(1);

    CliState state;
    const std::vector<std::pair<const char*, const char*>> commands = {
        {"synth", "generate a synthetic email corpus with planted archetypes"},
        {"ingest", "normalize raw events into the canonical archive"},
        {"indicators", "compute all per-actor, per-period indicators"},
        {"train", "fit the supervised model on the indicator panel"},
        {"evaluate", "leave-one-out evaluation and period stability test"},
        {"cluster", "profile the top performers with k-means / GMM / PCA"},
        {"report", "collect stage manifests into the run manifest"},
        {"all", "run every stage in order"},
    };
    for (const auto& [name, description] : commands) {
        add_common_options(app.add_subcommand(name, description), state);
    }

    CLI11_PARSE(app, argc, argv);

    CLI::App* active = app.get_subcommands().front();
    try {
        mailsig::RunConfig config;
        if (active->count("--config") > 0) config = mailsig::load_config(state.config_path);
        if (active->count("--out") > 0) config.out = state.out;
        if (active->count("--seed") > 0) config.seed = state.seed;
        if (active->count("--events") > 0) config.events_path = state.events;
        if (active->count("--attributes") > 0) config.attributes_path = state.attributes;
        if (active->count("--format") > 0) config.input_format = state.format;
        if (active->count("--model") > 0) config.model = state.model;
        if (active->count("--components") > 0) config.components = state.components;
        if (active->count("--rounds") > 0) config.rounds = state.rounds;
        if (active->count("--weak") > 0) config.weak = state.weak;
        if (active->count("--threshold") > 0) config.threshold = state.threshold;
        if (active->count("--clusters") > 0) config.clusters = state.clusters;

        if (config.input_format != "jsonl" && config.input_format != "mbox") {
            throw mailsig::ConfigError("input_format must be 'jsonl' or 'mbox'");
        }
        if (config.model != "adaboost" && config.model != "pls_logit") {
            throw mailsig::ConfigError("model must be 'adaboost' or 'pls_logit'");
        }
        mailsig::parse_weak_kind(config.weak);
        if (config.threshold <= 0 || config.threshold >= 1) {
            throw mailsig::ConfigError("threshold must lie strictly between 0 and 1");
        }

        const std::string name = active->get_name();
        if (name == "synth") mailsig::run_synth(config);
        else if (name == "ingest") mailsig::run_ingest(config);
        else if (name == "indicators") mailsig::run_indicators(config);
        else if (name == "train") mailsig::run_train(config);
        else if (name == "evaluate") mailsig::run_evaluate(config);
        else if (name == "cluster") mailsig::run_cluster(config);
        else if (name == "report") mailsig::run_report(config);
        else mailsig::run_all(config);
        return 0;
    } catch (const mailsig::MissingArtifactError& e) {
        const nlohmann::json err{{"error", e.what()}, {"run_first", e.stage_required}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        const nlohmann::json err{{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
