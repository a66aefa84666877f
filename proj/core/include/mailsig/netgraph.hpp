#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mailsig/types.hpp"

namespace mailsig {

/// Directed communication graph of one period. Arc weights count emails but
/// all path-based indicators treat arcs as unit length.
class CommGraph {
public:
    CommGraph() = default;
    CommGraph(std::span<const EmailEvent> events, Period period);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<ActorId>& nodes() const { return nodes_; }
    const std::vector<std::vector<std::size_t>>& out_edges() const { return out_; }
    const std::vector<std::vector<std::size_t>>& in_edges() const { return in_; }
    const std::map<std::pair<std::size_t, std::size_t>, int>& arc_weights() const {
        return weights_;
    }
    Period period() const { return period_; }
    std::optional<std::size_t> index_of(const ActorId& actor) const;

private:
    std::vector<ActorId> nodes_;                           // sorted
    std::vector<std::vector<std::size_t>> out_;            // sorted adjacency
    std::vector<std::vector<std::size_t>> in_;
    std::map<std::pair<std::size_t, std::size_t>, int> weights_;
    Period period_;
};

CommGraph build_graph(std::span<const EmailEvent> events, Period period);

/// Brandes' accumulation over directed unweighted shortest paths.
std::map<ActorId, double> betweenness(const CommGraph& graph);

/// Reachable-set closeness: with R nodes reachable from i at total distance
/// S, closeness(i) = (R/(N-1)) * (R/S); 0 when nothing is reachable.
std::map<ActorId, double> closeness(const CommGraph& graph);

/// Count of distinct contacts in either direction.
std::map<ActorId, int> degree(const CommGraph& graph);

struct ContributionRow {
    ActorId actor;
    int messages_sent = 0;
    int messages_received = 0;
    std::optional<double> contribution_index;  // missing when sent+received == 0
};

std::map<ActorId, ContributionRow> contribution(std::span<const EmailEvent> events, Period period);

}  // namespace mailsig
