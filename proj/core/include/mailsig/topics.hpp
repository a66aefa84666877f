#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mailsig/content.hpp"
#include "mailsig/stats.hpp"
#include "mailsig/types.hpp"

namespace mailsig {

struct ActorDocument {
    ActorId actor;
    std::size_t period = 0;  // 0-based period index
    std::vector<std::pair<std::string, double>> terms;  // weight-ranked, distinct
};

/// Top-k terms of one actor-period by summed TF-IDF weight, ties broken
/// lexicographically. Empty optional when the actor sent no tokens.
std::optional<ActorDocument> top_words(const ActorId& actor, std::size_t period_index,
                                       std::span<const EmailEvent* const> actor_emails,
                                       const CorpusStats& stats, std::size_t k = 10);

/// One document per (actor, period) with at least one token, ordered by
/// (actor, period). Stats are built per period.
std::vector<ActorDocument> actor_documents(std::span<const EmailEvent> events,
                                           std::span<const Period> periods, std::size_t k = 10);

struct TopicModel {
    std::size_t k = 0;
    double alpha = 0;
    double beta = 0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> vocabulary;  // sorted
    Matrix phi;                           // k x V, rows sum to 1
    Matrix theta;                         // docs x k, rows sum to 1
};

/// Collapsed Gibbs sampler over the documents' term bags (each term once).
/// alpha <= 0 selects the default 50/k. K = 0 or no documents is fatal;
/// k = 1 is the degenerate single-topic case.
TopicModel fit_lda(const std::vector<ActorDocument>& documents, std::size_t k = 6,
                   double alpha = -1.0, double beta = 0.01, std::size_t iterations = 1000,
                   std::uint64_t seed = 1);

/// Theta rows keyed by (actor, period index).
std::map<std::pair<ActorId, std::size_t>, std::vector<double>> topic_features(
    const TopicModel& model, const std::vector<ActorDocument>& documents);

void write_topic_model(const std::filesystem::path& path, const TopicModel& model,
                       const std::vector<ActorDocument>& documents);

}  // namespace mailsig
