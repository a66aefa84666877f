#include "mailsig/dynamics.hpp"

#include <algorithm>
#include <set>

#include "mailsig/netgraph.hpp"
#include "mailsig/stats.hpp"

namespace mailsig {

std::map<ActorId, std::vector<double>> betweenness_series(std::span<const EmailEvent> events,
                                                          Period period, std::int64_t window) {
    const auto slice = events_in_period(events, period);
    std::set<ActorId> universe;
    for (const auto& event : slice) {
        universe.insert(event.sender);
        universe.insert(event.recipients.begin(), event.recipients.end());
    }

    const std::int64_t length = period.length();
    const std::size_t windows =
        window > 0 ? static_cast<std::size_t>((length + window - 1) / window) : 0;

    std::map<ActorId, std::vector<double>> series;
    for (const auto& actor : universe) series[actor].assign(windows, 0.0);

    for (std::size_t w = 0; w < windows; ++w) {
        Period sub{period.start + static_cast<std::int64_t>(w) * window,
                   std::min(period.start + static_cast<std::int64_t>(w + 1) * window, period.end)};
        const auto scores = betweenness(CommGraph(slice, sub));
        for (const auto& [actor, value] : scores) {
            auto it = series.find(actor);
            if (it != series.end()) it->second[w] = value;
        }
    }
    return series;
}

std::optional<int> oscillation(std::span<const double> series) {
    if (series.size() < 3) return std::nullopt;
    std::vector<double> collapsed;
    for (double v : series) {
        if (collapsed.empty() || collapsed.back() != v) collapsed.push_back(v);
    }
    int count = 0;
    for (std::size_t k = 1; k + 1 < collapsed.size(); ++k) {
        if ((collapsed[k] - collapsed[k - 1]) * (collapsed[k + 1] - collapsed[k]) < 0) ++count;
    }
    return count;
}

std::map<ActorId, DynamicsRow> nudges_and_art(std::span<const EmailEvent> events,
                                              const ReplyResolution& replies, Period period) {
    const auto slice = events_in_period(events, period);

    std::map<std::string, const EmailEvent*> in_period;
    std::set<ActorId> universe;
    for (const auto& event : slice) {
        in_period[event.message_id] = &event;
        universe.insert(event.sender);
        universe.insert(event.recipients.begin(), event.recipients.end());
    }

    // Response delays, from the reply links with both endpoints in the period.
    std::map<ActorId, std::vector<double>> ego_delays, alter_delays;
    for (const auto& event : slice) {
        auto it = replies.replies_of.find(event.message_id);
        if (it == replies.replies_of.end()) continue;
        for (const auto& reply_id : it->second) {
            auto reply_it = in_period.find(reply_id);
            if (reply_it == in_period.end()) continue;
            const EmailEvent& reply = *reply_it->second;
            const auto delay = static_cast<double>(reply.timestamp - event.timestamp);
            ego_delays[reply.sender].push_back(delay);
            alter_delays[event.sender].push_back(delay);
        }
    }

    // Nudges: replay the log; a response samples and clears the pending count
    // of its (prompter, responder) pair.
    std::map<std::pair<ActorId, ActorId>, int> pending;
    std::map<std::pair<ActorId, ActorId>, std::vector<double>> samples;
    for (const auto& event : slice) {
        if (auto it = replies.prompts_of.find(event.message_id); it != replies.prompts_of.end()) {
            for (const auto& prompt_id : it->second) {
                auto prompt_it = in_period.find(prompt_id);
                if (prompt_it == in_period.end()) continue;
                const std::pair<ActorId, ActorId> pair{prompt_it->second->sender, event.sender};
                auto pend = pending.find(pair);
                if (pend != pending.end() && pend->second > 0) {
                    samples[pair].push_back(pend->second);
                    pend->second = 0;
                }
            }
        }
        for (const auto& recipient : event.recipients) {
            ++pending[{event.sender, recipient}];
        }
    }

    // pair_nudges[(A,B)] = mean emails from A to B per response from B.
    std::map<ActorId, std::vector<double>> ego_pair_means, alter_pair_means;
    for (const auto& [pair, values] : samples) {
        const double pair_mean = mean(values);
        ego_pair_means[pair.first].push_back(pair_mean);
        alter_pair_means[pair.second].push_back(pair_mean);
    }

    std::map<ActorId, DynamicsRow> rows;
    for (const auto& actor : universe) {
        DynamicsRow row;
        row.actor = actor;
        if (auto it = ego_pair_means.find(actor); it != ego_pair_means.end())
            row.ego_nudges = mean(it->second);
        if (auto it = alter_pair_means.find(actor); it != alter_pair_means.end())
            row.alter_nudges = mean(it->second);
        if (auto it = ego_delays.find(actor); it != ego_delays.end())
            row.ego_art = mean(it->second);
        if (auto it = alter_delays.find(actor); it != alter_delays.end())
            row.alter_art = mean(it->second);
        rows[actor] = std::move(row);
    }
    return rows;
}

std::map<ActorId, DynamicsRow> dynamics_rows(std::span<const EmailEvent> events,
                                             const ReplyResolution& replies, Period period,
                                             std::int64_t window) {
    auto rows = nudges_and_art(events, replies, period);
    if (window > 0) {
        // oscillation() itself reports missing when fewer than 3 windows fit.
        const auto series = betweenness_series(events, period, window);
        for (auto& [actor, row] : rows) {
            if (auto it = series.find(actor); it != series.end()) {
                row.bet_osc = oscillation(it->second);
            }
        }
    }
    return rows;
}

}  // namespace mailsig
