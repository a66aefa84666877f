#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mailsig/ingest.hpp"
#include "mailsig/types.hpp"

namespace mailsig {

struct DynamicsRow {
    ActorId actor;
    std::optional<int> bet_osc;
    std::optional<double> ego_nudges;   // >= 1 when defined
    std::optional<double> alter_nudges; // >= 1 when defined
    std::optional<double> ego_art;      // seconds
    std::optional<double> alter_art;    // seconds
};

/// Betweenness per consecutive weekly sub-window (last window may be
/// partial); actors absent from a window score 0 that week.
std::map<ActorId, std::vector<double>> betweenness_series(std::span<const EmailEvent> events,
                                                          Period period,
                                                          std::int64_t window = 7 * 86400);

/// Strict local extrema count after collapsing equal-value runs. Missing
/// when the raw series is shorter than 3.
std::optional<int> oscillation(std::span<const double> series);

/// Nudges and average response times replayed from the reply links whose
/// prompt and response both fall inside the period.
std::map<ActorId, DynamicsRow> nudges_and_art(std::span<const EmailEvent> events,
                                              const ReplyResolution& replies, Period period);

/// All dynamics fields for one period (series + oscillation + nudges/ART).
std::map<ActorId, DynamicsRow> dynamics_rows(std::span<const EmailEvent> events,
                                             const ReplyResolution& replies, Period period,
                                             std::int64_t window = 7 * 86400);

}  // namespace mailsig
