#include "mailsig/netgraph.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace mailsig {

CommGraph::CommGraph(std::span<const EmailEvent> events, Period period) : period_(period) {
    const auto slice = events_in_period(events, period);
    std::set<ActorId> node_set;
    for (const auto& event : slice) {
        node_set.insert(event.sender);
        node_set.insert(event.recipients.begin(), event.recipients.end());
    }
    nodes_.assign(node_set.begin(), node_set.end());

    std::map<ActorId, std::size_t> index;
    for (std::size_t i = 0; i < nodes_.size(); ++i) index[nodes_[i]] = i;

    for (const auto& event : slice) {
        const std::size_t src = index[event.sender];
        for (const auto& recipient : event.recipients) {
            ++weights_[{src, index[recipient]}];
        }
    }

    out_.assign(nodes_.size(), {});
    in_.assign(nodes_.size(), {});
    for (const auto& [arc, weight] : weights_) {
        out_[arc.first].push_back(arc.second);
        in_[arc.second].push_back(arc.first);
    }
}

std::optional<std::size_t> CommGraph::index_of(const ActorId& actor) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), actor);
    if (it == nodes_.end() || *it != actor) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

CommGraph build_graph(std::span<const EmailEvent> events, Period period) {
    return CommGraph(events, period);
}

std::map<ActorId, double> betweenness(const CommGraph& graph) {
    const std::size_t n = graph.size();
    std::vector<double> score(n, 0.0);
    const auto& out = graph.out_edges();

    // Brandes (2001): one BFS + dependency accumulation per source.
    std::vector<std::int64_t> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<std::size_t>> preds(n);
    std::vector<std::size_t> order;
    order.reserve(n);

    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();

        dist[s] = 0;
        sigma[s] = 1;
        std::deque<std::size_t> queue{s};
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (const std::size_t w : out[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const std::size_t w = *it;
            for (const std::size_t v : preds[w]) {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if (w != s) score[w] += delta[w];
        }
    }

    std::map<ActorId, double> result;
    for (std::size_t i = 0; i < n; ++i) result[graph.nodes()[i]] = score[i];
    return result;
}

std::map<ActorId, double> closeness(const CommGraph& graph) {
    const std::size_t n = graph.size();
    const auto& out = graph.out_edges();
    std::map<ActorId, double> result;
    std::vector<std::int64_t> dist(n);

    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::deque<std::size_t> queue{s};
        std::size_t reachable = 0;
        std::int64_t total = 0;
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop_front();
            for (const std::size_t w : out[v]) {
                if (dist[w] >= 0) continue;
                dist[w] = dist[v] + 1;
                ++reachable;
                total += dist[w];
                queue.push_back(w);
            }
        }
        double value = 0;
        if (reachable > 0 && n > 1) {
            const double r = static_cast<double>(reachable);
            value = (r / static_cast<double>(n - 1)) * (r / static_cast<double>(total));
        }
        result[graph.nodes()[s]] = value;
    }
    return result;
}

std::map<ActorId, int> degree(const CommGraph& graph) {
    const std::size_t n = graph.size();
    std::map<ActorId, int> result;
    for (std::size_t v = 0; v < n; ++v) {
        std::set<std::size_t> contacts;
        contacts.insert(graph.out_edges()[v].begin(), graph.out_edges()[v].end());
        contacts.insert(graph.in_edges()[v].begin(), graph.in_edges()[v].end());
        contacts.erase(v);
        result[graph.nodes()[v]] = static_cast<int>(contacts.size());
    }
    return result;
}

std::map<ActorId, ContributionRow> contribution(std::span<const EmailEvent> events, Period period) {
    const auto slice = events_in_period(events, period);
    std::map<ActorId, ContributionRow> rows;
    auto row = [&rows](const ActorId& actor) -> ContributionRow& {
        auto& r = rows[actor];
        r.actor = actor;
        return r;
    };
    for (const auto& event : slice) {
        ++row(event.sender).messages_sent;
        for (const auto& recipient : event.recipients) ++row(recipient).messages_received;
    }
    for (auto& [actor, r] : rows) {
        const int total = r.messages_sent + r.messages_received;
        if (total > 0) {
            r.contribution_index =
                static_cast<double>(r.messages_sent - r.messages_received) / total;
        }
    }
    return rows;
}

}  // namespace mailsig
