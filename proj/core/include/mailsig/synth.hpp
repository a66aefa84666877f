#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mailsig/types.hpp"

namespace mailsig {

/// Synthetic organization with planted communication archetypes. Archetype
/// actors are the planted top performers (label 1); when random_label_rate
/// is positive the mix is forced to baseline and labels are drawn i.i.d.
/// per (actor, period) instead — the null model.
struct SynthSpec {
    std::size_t n_actors = 120;
    std::size_t n_weeks = 8;
    std::size_t n_periods = 2;
    std::size_t team_size = 10;
    double networker_share = 0.2;
    double influencer_share = 0.2;
    double positivist_share = 0.2;
    double base_rate = 1.2;          // emails per actor-day
    double reply_probability = 0.45;
    double effect_size = 2.0;        // target pooled-sd separation on signature indicators
    double random_label_rate = 0.0;
    std::uint64_t seed = 1;
    std::int64_t t0 = 1578268800;    // 2020-01-06 Monday 00:00 UTC
};

struct SynthResult {
    std::vector<EmailEvent> events;  // sorted, ingest-clean
    std::map<ActorId, ActorAttributes> attributes;
    std::vector<Period> periods;
    std::map<ActorId, std::string> archetype;  // truth
};

SynthResult generate(const SynthSpec& spec);

}  // namespace mailsig
