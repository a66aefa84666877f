#include "mailsig/content.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "mailsig/csv.hpp"
#include "mailsig/errors.hpp"
#include "mailsig/stats.hpp"

namespace mailsig {

std::vector<std::string> tokenize(std::string_view text, const std::set<std::string>& stopwords) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2 && !stopwords.contains(cur)) tokens.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        // Bytes >= 0x80 are kept so multi-byte UTF-8 sequences survive intact.
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stopword list " + path.string());
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        std::string word = line.substr(start);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        words.insert(word);
    }
    return words;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    const std::size_t term_col = table.column("term");
    const std::size_t valence_col = table.column("valence");
    Lexicon lexicon;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& term = table.rows[r][term_col];
        double valence = 0;
        try {
            valence = std::stod(table.rows[r][valence_col]);
        } catch (const std::exception&) {
            throw DataError(path.string() + ": row " + std::to_string(r + 2) +
                            ": non-numeric valence");
        }
        if (valence < -1.0 || valence > 1.0) {
            throw DataError(path.string() + ": row " + std::to_string(r + 2) +
                            ": valence outside [-1,1]");
        }
        lexicon.valence[term] = valence;
    }
    if (lexicon.valence.empty()) throw ConfigError("empty lexicon: " + path.string());
    return lexicon;
}

double sentiment_score(std::span<const std::string> tokens, const Lexicon& lexicon) {
    if (lexicon.valence.empty()) throw ConfigError("empty lexicon");
    double sum = 0;
    std::size_t matches = 0;
    for (const auto& token : tokens) {
        auto it = lexicon.valence.find(token);
        if (it == lexicon.valence.end()) continue;
        sum += it->second;
        ++matches;
    }
    if (matches == 0) return 0.5;
    return 0.5 + (sum / static_cast<double>(matches)) / 2.0;
}

double CorpusStats::p(const std::string& term) const {
    if (doc_count == 0) return 1.0;
    auto it = doc_freq.find(term);
    const std::size_t df = it == doc_freq.end() ? 1 : std::max<std::size_t>(it->second, 1);
    return static_cast<double>(df) / static_cast<double>(doc_count);
}

CorpusStats build_corpus_stats(std::span<const EmailEvent> events) {
    CorpusStats stats;
    for (const auto& event : events) {
        if (event.tokens.empty()) continue;
        ++stats.doc_count;
        std::set<std::string> seen(event.tokens.begin(), event.tokens.end());
        for (const auto& term : seen) ++stats.doc_freq[term];
    }
    return stats;
}

double complexity_index(std::span<const std::string> tokens, const CorpusStats& stats) {
    if (tokens.empty()) return 0.0;
    std::map<std::string, std::size_t> counts;
    for (const auto& token : tokens) ++counts[token];
    double sum = 0;
    for (const auto& [term, q] : counts) {
        sum += static_cast<double>(q) * std::log(1.0 / stats.p(term));
    }
    return sum / static_cast<double>(tokens.size());
}

TfIdfVector tfidf_vector(std::span<const std::string> tokens, const CorpusStats& stats) {
    std::map<std::string, std::size_t> counts;
    for (const auto& token : tokens) ++counts[token];
    TfIdfVector vec;
    for (const auto& [term, tf] : counts) {
        const double weight = static_cast<double>(tf) * std::log(1.0 / stats.p(term));
        if (weight > 0) vec[term] = weight;
    }
    return vec;
}

double cosine(const TfIdfVector& a, const TfIdfVector& b) {
    if (a.empty() || b.empty()) return 0.0;
    double dot = 0;
    for (const auto& [term, wa] : a) {
        auto it = b.find(term);
        if (it != b.end()) dot += wa * it->second;
    }
    if (dot == 0) return 0.0;
    double na = 0, nb = 0;
    for (const auto& [term, w] : a) na += w * w;
    for (const auto& [term, w] : b) nb += w * w;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double influence_index(const EmailEvent& sender_email,
                       std::span<const EmailEvent* const> receiver_followups,
                       const CorpusStats& stats) {
    std::vector<std::string> combined;
    for (const auto* followup : receiver_followups) {
        combined.insert(combined.end(), followup->tokens.begin(), followup->tokens.end());
    }
    return cosine(tfidf_vector(sender_email.tokens, stats), tfidf_vector(combined, stats));
}

std::map<ActorId, ContentRow> content_indicators(std::span<const EmailEvent> events, Period period,
                                                 const Lexicon& lexicon,
                                                 std::int64_t influence_window) {
    const auto slice = events_in_period(events, period);
    const CorpusStats stats = build_corpus_stats(slice);

    // Sent-email index per actor, in time order (slice is already sorted).
    std::map<ActorId, std::vector<const EmailEvent*>> sent;
    for (const auto& event : slice) sent[event.sender].push_back(&event);

    std::map<ActorId, ContentRow> rows;
    for (const auto& [actor, emails] : sent) {
        std::vector<double> scores;
        std::vector<double> complexities;
        for (const auto* email : emails) {
            if (email->tokens.empty()) continue;
            scores.push_back(sentiment_score(email->tokens, lexicon));
            complexities.push_back(complexity_index(email->tokens, stats));
        }
        if (scores.empty()) continue;  // no tokenized email this period

        ContentRow row;
        row.actor = actor;
        row.sentiment = mean(scores);
        double dev = 0;
        for (double s : scores) dev += std::fabs(s - 0.5);
        row.emotionality = dev / static_cast<double>(scores.size());
        row.complexity = mean(complexities);

        double influence_sum = 0;
        std::size_t influence_pairs = 0;
        for (const auto* email : emails) {
            if (email->tokens.empty()) continue;
            for (const auto& recipient : email->recipients) {
                auto it = sent.find(recipient);
                if (it == sent.end()) continue;
                const auto& theirs = it->second;
                auto lo = std::upper_bound(theirs.begin(), theirs.end(), email->timestamp,
                                           [](std::int64_t t, const EmailEvent* e) {
                                               return t < e->timestamp;
                                           });
                auto hi = std::upper_bound(lo, theirs.end(), email->timestamp + influence_window,
                                           [](std::int64_t t, const EmailEvent* e) {
                                               return t < e->timestamp;
                                           });
                if (lo == hi) continue;  // recipient silent inside the window
                std::vector<const EmailEvent*> followups(lo, hi);
                influence_sum += influence_index(*email, followups, stats);
                ++influence_pairs;
            }
        }
        if (influence_pairs > 0)
            row.influence = influence_sum / static_cast<double>(influence_pairs);
        rows[actor] = std::move(row);
    }
    return rows;
}

}  // namespace mailsig
