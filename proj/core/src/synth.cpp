#include "mailsig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mailsig/errors.hpp"
#include "mailsig/rng.hpp"

namespace mailsig {

namespace {

constexpr std::size_t kVocabSize = 200;
constexpr std::size_t kPersonalTerms = 6;

const std::vector<std::string> kPositivePool = {
    "excellent", "great",   "good",    "happy",       "wonderful", "fantastic",
    "awesome",   "love",    "brilliant", "superb",    "delighted", "perfect",
    "amazing",   "outstanding", "positive", "thanks"};

const std::vector<std::string> kNegativePool = {
    "bad",  "terrible", "awful",         "hate",  "horrible", "poor",
    "sad",  "angry",    "disappointing", "worst", "problem",  "fail",
    "broken", "annoying", "frustrating", "negative"};

std::string actor_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "a%03zu", i);
    return buf;
}

std::string message_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "m%06zu", i);
    return buf;
}

enum class Archetype { baseline, networker, influencer, positivist };

const char* archetype_name(Archetype a) {
    switch (a) {
        case Archetype::networker: return "networker";
        case Archetype::influencer: return "influencer";
        case Archetype::positivist: return "positivist";
        default: return "baseline";
    }
}

// Zipf-weighted sampler over the shared vocabulary.
struct VocabSampler {
    std::vector<std::string> words;
    std::vector<double> cumulative;

    VocabSampler() {
        double total = 0;
        for (std::size_t r = 0; r < kVocabSize; ++r) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "word%03zu", r);
            words.emplace_back(buf);
            total += 1.0 / static_cast<double>(r + 1);
            cumulative.push_back(total);
        }
    }

    const std::string& draw(Rng& rng) const {
        const double u = rng.next_double() * cumulative.back();
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        return words[static_cast<std::size_t>(it - cumulative.begin())];
    }
};

struct ActorProfile {
    Archetype archetype = Archetype::baseline;
    std::size_t team = 0;
    double rate = 1.0;             // initiated emails per day
    double cross_team_prob = 0.2;  // recipient outside own team
    double reply_prob = 0.45;
    std::int64_t reply_delay_base = 3 * 3600;
    std::int64_t reply_delay_span = 48 * 3600;
    double positive_frac = 0.05;
    double negative_frac = 0.05;
    double personal_frac = 0.0;
    std::vector<std::string> personal_terms;
};

}  // namespace

SynthResult generate(const SynthSpec& spec) {
    if (spec.n_actors < 2) throw ConfigError("need at least two actors");
    if (spec.n_weeks == 0 || spec.n_periods == 0) throw ConfigError("need at least one week and period");
    if (spec.team_size == 0) throw ConfigError("team size must be positive");
    if (std::llround(spec.base_rate * static_cast<double>(spec.n_weeks) * 7.0) == 0) {
        throw ConfigError("base rate too low: an actor would send no email at all");
    }

    const std::size_t n = spec.n_actors;
    const std::size_t days = spec.n_weeks * 7;
    const std::int64_t corpus_end = spec.t0 + static_cast<std::int64_t>(days) * 86400;
    const bool null_mode = spec.random_label_rate > 0.0;
    const double effect = spec.effect_size;
    Rng root(spec.seed);

    // --- archetype assignment ------------------------------------------------
    std::vector<Archetype> archetype(n, Archetype::baseline);
    if (!null_mode) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng shuffler = root.fork(1);
        shuffler.shuffle(order);
        const auto count = [&](double share) {
            return static_cast<std::size_t>(std::llround(share * static_cast<double>(n)));
        };
        std::size_t cursor = 0;
        for (std::size_t c = count(spec.networker_share); c > 0 && cursor < n; --c)
            archetype[order[cursor++]] = Archetype::networker;
        for (std::size_t c = count(spec.influencer_share); c > 0 && cursor < n; --c)
            archetype[order[cursor++]] = Archetype::influencer;
        for (std::size_t c = count(spec.positivist_share); c > 0 && cursor < n; --c)
            archetype[order[cursor++]] = Archetype::positivist;
    }

    std::vector<ActorProfile> profiles(n);
    std::size_t influencer_serial = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ActorProfile& profile = profiles[i];
        profile.archetype = archetype[i];
        profile.team = i / spec.team_size;
        profile.rate = spec.base_rate;
        profile.reply_prob = spec.reply_probability;
        switch (archetype[i]) {
            case Archetype::networker:
                profile.rate = spec.base_rate * (1.0 + 0.20 * effect);
                profile.cross_team_prob = std::min(0.90, 0.20 + 0.25 * effect);
                break;
            case Archetype::influencer: {
                profile.personal_frac = std::min(0.50, 0.125 * effect);
                for (std::size_t j = 0; j < kPersonalTerms; ++j) {
                    char buf[24];
                    std::snprintf(buf, sizeof(buf), "idea%03zu%c", influencer_serial,
                                  static_cast<char>('a' + j));
                    profile.personal_terms.emplace_back(buf);
                }
                ++influencer_serial;
                break;
            }
            case Archetype::positivist:
                profile.positive_frac = std::min(0.80, 0.05 + 0.175 * effect);
                profile.reply_prob = std::min(0.95, spec.reply_probability + 0.175 * effect);
                profile.reply_delay_base = 30 * 60;
                profile.reply_delay_span = 3 * 3600;
                break;
            default:
                break;
        }
    }

    // --- attributes -----------------------------------------------------------
    SynthResult result;
    Rng attr_rng = root.fork(2);
    Rng label_rng = root.fork(4);
    for (std::size_t i = 0; i < n; ++i) {
        ActorAttributes row;
        row.actor = actor_name(i);
        row.age = 25.0 + static_cast<double>(attr_rng.below(35));
        row.band = attr_rng.bernoulli(0.26) ? 1 : 0;
        row.tenure = 4.0 + static_cast<double>(attr_rng.below(237));
        row.tslp = static_cast<double>(attr_rng.below(133));
        row.labels.resize(spec.n_periods);
        for (std::size_t t = 0; t < spec.n_periods; ++t) {
            if (null_mode) {
                row.labels[t] = label_rng.bernoulli(spec.random_label_rate) ? 1 : 0;
            } else {
                row.labels[t] = archetype[i] == Archetype::baseline ? 0 : 1;
            }
        }
        result.attributes.emplace(row.actor, std::move(row));
        result.archetype.emplace(actor_name(i), archetype_name(archetype[i]));
    }

    // --- traffic ---------------------------------------------------------------
    const VocabSampler vocab;
    Rng traffic = root.fork(3);

    const auto draw_token = [&](const ActorProfile& profile) -> std::string {
        const double u = traffic.next_double();
        if (profile.personal_frac > 0 && u < profile.personal_frac) {
            return profile.personal_terms[traffic.below(profile.personal_terms.size())];
        }
        const double v = traffic.next_double();
        if (v < profile.positive_frac) {
            return kPositivePool[traffic.below(kPositivePool.size())];
        }
        if (v < profile.positive_frac + profile.negative_frac) {
            return kNegativePool[traffic.below(kNegativePool.size())];
        }
        return vocab.draw(traffic);
    };

    const auto draw_body = [&](const ActorProfile& profile, std::size_t length) {
        std::vector<std::string> body;
        body.reserve(length);
        for (std::size_t j = 0; j < length; ++j) body.push_back(draw_token(profile));
        return body;
    };

    const auto pick_recipient = [&](std::size_t sender) -> std::size_t {
        const ActorProfile& profile = profiles[sender];
        const std::size_t team_begin = profile.team * spec.team_size;
        const std::size_t team_end = std::min(team_begin + spec.team_size, n);
        const std::size_t team_n = team_end - team_begin;
        const bool cross = traffic.bernoulli(profile.cross_team_prob);
        if (cross && n > team_n) {
            std::size_t pick = traffic.below(n - team_n);
            if (pick >= team_begin) pick += team_n;
            return pick;
        }
        if (team_n > 1) {
            std::size_t pick = team_begin + traffic.below(team_n - 1);
            if (pick >= sender) ++pick;
            return pick;
        }
        std::size_t pick = traffic.below(n - 1);
        if (pick >= sender) ++pick;
        return pick;
    };

    std::size_t serial = 0;
    const auto emit = [&](std::size_t sender, std::vector<std::size_t> recipients,
                          std::int64_t ts, std::optional<std::string> in_reply_to,
                          std::vector<std::string> tokens) -> const EmailEvent* {
        if (ts >= corpus_end) return nullptr;
        EmailEvent event;
        event.message_id = message_name(serial++);
        event.sender = actor_name(sender);
        for (std::size_t r : recipients) event.recipients.push_back(actor_name(r));
        event.timestamp = ts;
        event.in_reply_to = std::move(in_reply_to);
        event.tokens = std::move(tokens);
        result.events.push_back(std::move(event));
        return &result.events.back();
    };

    for (std::size_t day = 0; day < days; ++day) {
        const std::int64_t day_start = spec.t0 + static_cast<std::int64_t>(day) * 86400;
        for (std::size_t sender = 0; sender < n; ++sender) {
            const ActorProfile& profile = profiles[sender];
            const std::size_t count = traffic.poisson(profile.rate);
            for (std::size_t e = 0; e < count; ++e) {
                const std::int64_t ts =
                    day_start + 9 * 3600 + static_cast<std::int64_t>(traffic.below(8 * 3600));
                std::vector<std::size_t> recipients{pick_recipient(sender)};
                if (traffic.bernoulli(0.15)) {
                    const std::size_t extra = pick_recipient(sender);
                    if (extra != recipients[0]) recipients.push_back(extra);
                }
                auto body = draw_body(profile, 12 + traffic.below(10));
                const EmailEvent* sent =
                    emit(sender, recipients, ts, std::nullopt, std::move(body));
                if (!sent) continue;

                const std::string prompt_id = sent->message_id;
                const std::vector<std::size_t> recip_idx = recipients;
                for (std::size_t r : recip_idx) {
                    const ActorProfile& receiver = profiles[r];
                    // Threaded reply (single level).
                    if (traffic.bernoulli(receiver.reply_prob)) {
                        const std::int64_t delay =
                            receiver.reply_delay_base +
                            static_cast<std::int64_t>(
                                traffic.below(static_cast<std::size_t>(receiver.reply_delay_span)));
                        emit(r, {sender}, ts + delay, prompt_id,
                             draw_body(receiver, 8 + traffic.below(8)));
                    }
                    // Idea echo: receivers of an influencer's email soon reuse
                    // the sender's pet vocabulary in their own mail.
                    if (profile.archetype == Archetype::influencer &&
                        traffic.bernoulli(std::min(0.95, 0.35 * effect))) {
                        const std::int64_t delay =
                            6 * 3600 +
                            static_cast<std::int64_t>(traffic.below(60 * 3600));
                        auto echo_body = draw_body(receiver, 9 + traffic.below(6));
                        for (std::size_t j = 0; j < 3; ++j) {
                            echo_body.push_back(
                                profile.personal_terms[traffic.below(kPersonalTerms)]);
                        }
                        std::size_t target = traffic.bernoulli(0.5) ? sender : pick_recipient(r);
                        if (target == r) target = sender;
                        emit(r, {target}, ts + delay, std::nullopt, std::move(echo_body));
                    }
                }
            }
        }
    }

    std::sort(result.events.begin(), result.events.end(), event_order);

    // --- periods ----------------------------------------------------------------
    const std::int64_t total = static_cast<std::int64_t>(days) * 86400;
    for (std::size_t t = 0; t < spec.n_periods; ++t) {
        const std::int64_t begin =
            spec.t0 + total * static_cast<std::int64_t>(t) / static_cast<std::int64_t>(spec.n_periods);
        const std::int64_t end =
            spec.t0 + total * static_cast<std::int64_t>(t + 1) / static_cast<std::int64_t>(spec.n_periods);
        result.periods.push_back(Period{begin, end});
    }
    return result;
}

}  // namespace mailsig
