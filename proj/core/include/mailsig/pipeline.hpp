#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mailsig/synth.hpp"
#include "mailsig/types.hpp"

namespace mailsig {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a pipeline run needs. Loaded from a JSON config file; CLI
/// flags override individual fields. The canonical JSON dump of this
/// struct is hashed into every manifest.
struct RunConfig {
    std::filesystem::path out = "out";
    std::uint64_t seed = 1;

    // ingest
    std::string input_format = "jsonl";  // "jsonl" or "mbox"
    std::filesystem::path events_path;   // empty -> out/synth/events.jsonl
    std::filesystem::path attributes_path;
    bool anonymize = true;
    std::string salt = "mailsig";

    // windows (seconds)
    std::int64_t weekly_window = 7 * 86400;
    std::int64_t influence_window = 4 * 86400;
    std::int64_t reply_horizon = 4 * 86400;

    // content resources
    std::filesystem::path lexicon_path = "data/lexicon.csv";
    std::filesystem::path stopwords_path = "data/stopwords.txt";

    // analysis periods; empty -> synth stage output
    std::vector<Period> periods;

    // topics
    std::size_t lda_topics = 6;
    double lda_alpha = -1.0;  // <= 0 means 50/K
    double lda_beta = 0.01;
    std::size_t lda_iterations = 1000;
    std::size_t top_words_k = 10;

    // supervised model
    std::string model = "adaboost";  // or "pls_logit"
    std::size_t components = 2;
    std::size_t rounds = 50;
    std::string weak = "stump";  // or "logit1"
    double threshold = 0.5;
    bool period_dummy = false;

    // clustering
    std::size_t clusters = 0;  // 0 = accept the elbow suggestion
    std::size_t kmeans_restarts = 8;
    std::size_t elbow_max_k = 6;

    SynthSpec synth;
};

RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON serialization (sorted keys) and its SHA-256.
std::string config_to_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

/// Stages. Each writes its artifacts under config.out plus a stage manifest
/// in <out>/manifest.d/. A stage invoked before its inputs exist throws
/// MissingArtifactError naming the stage to run first.
void run_synth(const RunConfig& config);
void run_ingest(const RunConfig& config);
void run_indicators(const RunConfig& config);
void run_train(const RunConfig& config);
void run_evaluate(const RunConfig& config);
void run_cluster(const RunConfig& config);
void run_report(const RunConfig& config);
void run_all(const RunConfig& config);

}  // namespace mailsig
