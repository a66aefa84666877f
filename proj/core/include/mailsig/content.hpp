#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mailsig/types.hpp"

namespace mailsig {

/// Lowercase, split on non-alphanumeric, drop tokens shorter than two
/// characters and stopwords. No stemming.
std::vector<std::string> tokenize(std::string_view text,
                                  const std::set<std::string>& stopwords = {});

std::set<std::string> load_stopwords(const std::filesystem::path& path);

struct Lexicon {
    std::map<std::string, double> valence;  // term -> [-1, 1]
};

/// CSV with header term,valence. An empty lexicon is a ConfigError.
Lexicon load_lexicon(const std::filesystem::path& path);

/// 0.5 + mean matched valence / 2; 0.5 when nothing matches.
double sentiment_score(std::span<const std::string> tokens, const Lexicon& lexicon);

/// Document-frequency statistics over the tokenized emails of one period.
struct CorpusStats {
    std::size_t doc_count = 0;
    std::map<std::string, std::size_t> doc_freq;

    /// Fraction of documents containing the term; terms never seen count as
    /// present in one document so their weight stays finite.
    double p(const std::string& term) const;
};

CorpusStats build_corpus_stats(std::span<const EmailEvent> events);

/// (1/n) * sum over the email's terms of q(w) * ln(1/p(w)).
double complexity_index(std::span<const std::string> tokens, const CorpusStats& stats);

using TfIdfVector = std::map<std::string, double>;

/// Raw term count times ln(1/p(w)); zero weights are not stored.
TfIdfVector tfidf_vector(std::span<const std::string> tokens, const CorpusStats& stats);

/// Cosine similarity; 0 when either vector is empty.
double cosine(const TfIdfVector& a, const TfIdfVector& b);

/// Cosine between one email and the concatenation of the receiver's
/// follow-up emails.
double influence_index(const EmailEvent& sender_email,
                       std::span<const EmailEvent* const> receiver_followups,
                       const CorpusStats& stats);

struct ContentRow {
    ActorId actor;
    std::optional<double> sentiment;     // [0,1]
    std::optional<double> emotionality;  // [0,0.5]
    std::optional<double> complexity;    // >= 0
    std::optional<double> influence;     // [0,1]
};

/// All four content indicators per actor over one period. Stats (and hence
/// idf weights) are built from this period's emails only.
std::map<ActorId, ContentRow> content_indicators(std::span<const EmailEvent> events, Period period,
                                                 const Lexicon& lexicon,
                                                 std::int64_t influence_window = 4 * 86400);

}  // namespace mailsig
