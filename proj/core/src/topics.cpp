#include "mailsig/topics.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "mailsig/errors.hpp"
#include "mailsig/rng.hpp"

namespace mailsig {

std::optional<ActorDocument> top_words(const ActorId& actor, std::size_t period_index,
                                       std::span<const EmailEvent* const> actor_emails,
                                       const CorpusStats& stats, std::size_t k) {
    std::map<std::string, double> weight;
    for (const auto* email : actor_emails) {
        for (const auto& [term, w] : tfidf_vector(email->tokens, stats)) weight[term] += w;
    }
    if (weight.empty()) return std::nullopt;

    std::vector<std::pair<std::string, double>> ranked(weight.begin(), weight.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);

    ActorDocument doc;
    doc.actor = actor;
    doc.period = period_index;
    doc.terms = std::move(ranked);
    return doc;
}

std::vector<ActorDocument> actor_documents(std::span<const EmailEvent> events,
                                           std::span<const Period> periods, std::size_t k) {
    std::vector<ActorDocument> docs;
    for (std::size_t p = 0; p < periods.size(); ++p) {
        const auto slice = events_in_period(events, periods[p]);
        const CorpusStats stats = build_corpus_stats(slice);
        std::map<ActorId, std::vector<const EmailEvent*>> sent;
        for (const auto& event : slice) sent[event.sender].push_back(&event);
        for (const auto& [actor, emails] : sent) {
            if (auto doc = top_words(actor, p, emails, stats, k)) docs.push_back(std::move(*doc));
        }
    }
    std::sort(docs.begin(), docs.end(), [](const ActorDocument& a, const ActorDocument& b) {
        if (a.actor != b.actor) return a.actor < b.actor;
        return a.period < b.period;
    });
    return docs;
}

TopicModel fit_lda(const std::vector<ActorDocument>& documents, std::size_t k, double alpha,
                   double beta, std::size_t iterations, std::uint64_t seed) {
    if (k == 0) throw ConfigError("topic count must be at least 1");
    if (documents.empty()) throw ConfigError("no documents to fit topics on");
    if (documents.size() < k) throw ConfigError("fewer documents than topics");
    if (alpha <= 0) alpha = 50.0 / static_cast<double>(k);
    if (beta <= 0) throw ConfigError("beta must be positive");

    TopicModel model;
    model.k = k;
    model.alpha = alpha;
    model.beta = beta;
    model.iterations = iterations;
    model.seed = seed;

    std::map<std::string, std::size_t> term_index;
    for (const auto& doc : documents) {
        for (const auto& [term, weight] : doc.terms) term_index.emplace(term, 0);
    }
    model.vocabulary.reserve(term_index.size());
    for (auto& [term, index] : term_index) {
        index = model.vocabulary.size();
        model.vocabulary.push_back(term);
    }
    const std::size_t v = model.vocabulary.size();
    const std::size_t d = documents.size();

    // Bags: each of a document's top-k terms once.
    std::vector<std::vector<std::size_t>> words(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (const auto& [term, weight] : documents[i].terms)
            words[i].push_back(term_index[term]);
    }

    std::vector<std::vector<int>> n_dk(d, std::vector<int>(k, 0));
    std::vector<std::vector<int>> n_kw(k, std::vector<int>(v, 0));
    std::vector<int> n_k(k, 0);
    std::vector<std::vector<std::size_t>> z(d);

    Rng rng(seed);
    for (std::size_t i = 0; i < d; ++i) {
        z[i].resize(words[i].size());
        for (std::size_t j = 0; j < words[i].size(); ++j) {
            const std::size_t topic = rng.below(k);
            z[i][j] = topic;
            ++n_dk[i][topic];
            ++n_kw[topic][words[i][j]];
            ++n_k[topic];
        }
    }

    const double vbeta = static_cast<double>(v) * beta;
    std::vector<double> weights(k);
    for (std::size_t iter = 0; iter < iterations && k > 1; ++iter) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < words[i].size(); ++j) {
                const std::size_t w = words[i][j];
                const std::size_t old = z[i][j];
                --n_dk[i][old];
                --n_kw[old][w];
                --n_k[old];

                double total = 0;
                for (std::size_t t = 0; t < k; ++t) {
                    weights[t] = (n_dk[i][t] + alpha) * (n_kw[t][w] + beta) / (n_k[t] + vbeta);
                    total += weights[t];
                }
                double u = rng.next_double() * total;
                std::size_t next = k - 1;
                for (std::size_t t = 0; t < k; ++t) {
                    u -= weights[t];
                    if (u <= 0) {
                        next = t;
                        break;
                    }
                }
                z[i][j] = next;
                ++n_dk[i][next];
                ++n_kw[next][w];
                ++n_k[next];
            }
        }
    }

    model.theta.assign(d, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        const double denom = static_cast<double>(words[i].size()) +
                             static_cast<double>(k) * alpha;
        for (std::size_t t = 0; t < k; ++t) {
            model.theta[i][t] = (n_dk[i][t] + alpha) / denom;
        }
    }
    model.phi.assign(k, std::vector<double>(v, 0.0));
    for (std::size_t t = 0; t < k; ++t) {
        const double denom = n_k[t] + vbeta;
        for (std::size_t w = 0; w < v; ++w) {
            model.phi[t][w] = (n_kw[t][w] + beta) / denom;
        }
    }
    return model;
}

std::map<std::pair<ActorId, std::size_t>, std::vector<double>> topic_features(
    const TopicModel& model, const std::vector<ActorDocument>& documents) {
    std::map<std::pair<ActorId, std::size_t>, std::vector<double>> features;
    for (std::size_t i = 0; i < documents.size(); ++i) {
        features[{documents[i].actor, documents[i].period}] = model.theta[i];
    }
    return features;
}

void write_topic_model(const std::filesystem::path& path, const TopicModel& model,
                       const std::vector<ActorDocument>& documents) {
    nlohmann::ordered_json j;
    j["k"] = model.k;
    j["alpha"] = model.alpha;
    j["beta"] = model.beta;
    j["iterations"] = model.iterations;
    j["seed"] = model.seed;
    j["vocabulary"] = model.vocabulary;
    j["phi"] = model.phi;
    j["theta"] = model.theta;
    nlohmann::ordered_json doc_list = nlohmann::ordered_json::array();
    for (const auto& doc : documents) {
        doc_list.push_back({{"actor", doc.actor}, {"period", doc.period + 1}});
    }
    j["documents"] = std::move(doc_list);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace mailsig
