#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mailsig/ingest.hpp"
#include "mailsig/rng.hpp"
#include "mailsig/types.hpp"

namespace testutil {

using namespace mailsig;

inline EmailEvent make_event(std::string id, std::string sender,
                             std::vector<std::string> recipients, std::int64_t ts,
                             std::optional<std::string> in_reply_to = std::nullopt,
                             std::vector<std::string> tokens = {}) {
    EmailEvent event;
    event.message_id = std::move(id);
    event.sender = std::move(sender);
    event.recipients = std::move(recipients);
    event.timestamp = ts;
    event.in_reply_to = std::move(in_reply_to);
    event.tokens = std::move(tokens);
    return event;
}

inline std::vector<EmailEvent> sorted_events(std::vector<EmailEvent> events) {
    std::sort(events.begin(), events.end(), event_order);
    return events;
}

// --- independent centrality oracles (dense, exponential-time) -------------

struct OracleGraph {
    std::size_t n = 0;
    std::vector<std::vector<bool>> adj;  // adj[i][j]: arc i -> j

    explicit OracleGraph(std::size_t nodes)
        : n(nodes), adj(nodes, std::vector<bool>(nodes, false)) {}
};

/// Betweenness by enumerating every simple path of every ordered pair and
/// crediting interior nodes of the shortest ones.
inline std::vector<double> betweenness_by_enumeration(const OracleGraph& g) {
    std::vector<double> score(g.n, 0.0);
    std::vector<std::size_t> path;
    std::vector<bool> used(g.n, false);

    for (std::size_t s = 0; s < g.n; ++s) {
        for (std::size_t t = 0; t < g.n; ++t) {
            if (s == t) continue;
            std::size_t best = std::numeric_limits<std::size_t>::max();
            std::vector<std::vector<std::size_t>> shortest;

            path.assign(1, s);
            std::fill(used.begin(), used.end(), false);
            used[s] = true;
            auto dfs = [&](auto&& self, std::size_t v) -> void {
                if (v == t) {
                    const std::size_t len = path.size() - 1;
                    if (len < best) {
                        best = len;
                        shortest.clear();
                    }
                    if (len == best) shortest.push_back(path);
                    return;
                }
                for (std::size_t w = 0; w < g.n; ++w) {
                    if (!g.adj[v][w] || used[w]) continue;
                    used[w] = true;
                    path.push_back(w);
                    self(self, w);
                    path.pop_back();
                    used[w] = false;
                }
            };
            dfs(dfs, s);
            if (shortest.empty()) continue;

            std::vector<std::size_t> hits(g.n, 0);
            for (const auto& p : shortest) {
                for (std::size_t k = 1; k + 1 < p.size(); ++k) ++hits[p[k]];
            }
            for (std::size_t v = 0; v < g.n; ++v) {
                if (hits[v] > 0) {
                    score[v] += static_cast<double>(hits[v]) /
                                static_cast<double>(shortest.size());
                }
            }
        }
    }
    return score;
}

/// Closeness from Floyd-Warshall distances.
inline std::vector<double> closeness_by_floyd_warshall(const OracleGraph& g) {
    constexpr long long inf = 1LL << 40;
    std::vector<std::vector<long long>> d(g.n, std::vector<long long>(g.n, inf));
    for (std::size_t i = 0; i < g.n; ++i) {
        d[i][i] = 0;
        for (std::size_t j = 0; j < g.n; ++j) {
            if (g.adj[i][j]) d[i][j] = 1;
        }
    }
    for (std::size_t k = 0; k < g.n; ++k) {
        for (std::size_t i = 0; i < g.n; ++i) {
            for (std::size_t j = 0; j < g.n; ++j) {
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
            }
        }
    }
    std::vector<double> score(g.n, 0.0);
    if (g.n <= 1) return score;
    for (std::size_t i = 0; i < g.n; ++i) {
        double reached = 0, total = 0;
        for (std::size_t j = 0; j < g.n; ++j) {
            if (j == i || d[i][j] >= inf) continue;
            reached += 1;
            total += static_cast<double>(d[i][j]);
        }
        if (reached > 0) {
            score[i] = (reached / static_cast<double>(g.n - 1)) * (reached / total);
        }
    }
    return score;
}

inline std::vector<int> degree_by_pairs(const OracleGraph& g) {
    std::vector<int> score(g.n, 0);
    for (std::size_t i = 0; i < g.n; ++i) {
        std::set<std::size_t> contacts;
        for (std::size_t j = 0; j < g.n; ++j) {
            if (j == i) continue;
            if (g.adj[i][j] || g.adj[j][i]) contacts.insert(j);
        }
        score[i] = static_cast<int>(contacts.size());
    }
    return score;
}

inline std::string oracle_actor(std::size_t i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "n%zu", i);
    return buf;
}

/// One event per arc, timestamps inside [0, arcs).
inline std::vector<EmailEvent> events_from_oracle(const OracleGraph& g) {
    std::vector<EmailEvent> events;
    std::size_t serial = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = 0; j < g.n; ++j) {
            if (!g.adj[i][j]) continue;
            char id[16];
            std::snprintf(id, sizeof(id), "e%04zu", serial);
            events.push_back(make_event(id, oracle_actor(i), {oracle_actor(j)},
                                        static_cast<std::int64_t>(serial)));
            ++serial;
        }
    }
    return events;
}

inline OracleGraph random_oracle_graph(Rng& rng, std::size_t max_nodes = 8) {
    const std::size_t n = 2 + rng.below(max_nodes - 1);
    OracleGraph g(n);
    const double density = 0.15 + 0.5 * rng.next_double();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && rng.bernoulli(density)) g.adj[i][j] = true;
        }
    }
    // An actor with no arcs would not exist in an email archive at all; give
    // every node at least one so the graphs describe the same universe.
    for (std::size_t i = 0; i < n; ++i) {
        bool appears = false;
        for (std::size_t j = 0; j < n; ++j) appears |= g.adj[i][j] || g.adj[j][i];
        if (!appears) g.adj[i][(i + 1) % n] = true;
    }
    return g;
}

// --- distribution checks -----------------------------------------------------

/// One-sample Kolmogorov-Smirnov p-value against Uniform(0,1),
/// with the usual asymptotic tail approximation.
inline double ks_uniform_pvalue(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::fabs(samples[i] - lo), std::fabs(samples[i] - hi)});
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0;
    for (int j = 1; j <= 100; ++j) {
        const double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
        p += term;
        if (std::fabs(term) < 1e-12) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

// --- filesystem scratch -------------------------------------------------------

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("mailsig_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    std::filesystem::path file(const std::string& name, const std::string& contents) const {
        const std::filesystem::path p = path / name;
        std::ofstream out(p, std::ios::binary);
        out << contents;
        return p;
    }
};

}  // namespace testutil
