#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "mailsig/errors.hpp"
#include "mailsig/synth.hpp"

using namespace mailsig;

namespace {

SynthSpec small_spec(std::uint64_t seed = 7) {
    SynthSpec spec;
    spec.n_actors = 40;
    spec.n_weeks = 4;
    spec.n_periods = 2;
    spec.team_size = 8;
    spec.seed = seed;
    return spec;
}

std::map<std::string, std::size_t> archetype_counts(const SynthResult& result) {
    std::map<std::string, std::size_t> counts;
    for (const auto& [actor, kind] : result.archetype) ++counts[kind];
    return counts;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("generation is reproducible per seed") {
    const SynthResult one = generate(small_spec(7));
    const SynthResult two = generate(small_spec(7));
    REQUIRE(one.events.size() == two.events.size());
    for (std::size_t i = 0; i < one.events.size(); ++i) {
        CHECK(one.events[i].message_id == two.events[i].message_id);
        CHECK(one.events[i].sender == two.events[i].sender);
        CHECK(one.events[i].recipients == two.events[i].recipients);
        CHECK(one.events[i].timestamp == two.events[i].timestamp);
        CHECK(one.events[i].tokens == two.events[i].tokens);
    }
    CHECK(one.archetype == two.archetype);

    const SynthResult other = generate(small_spec(8));
    bool same = one.events.size() == other.events.size();
    for (std::size_t i = 0; same && i < one.events.size(); ++i) {
        same = one.events[i].message_id == other.events[i].message_id &&
               one.events[i].timestamp == other.events[i].timestamp &&
               one.events[i].sender == other.events[i].sender;
    }
    CHECK_FALSE(same);
}

TEST_CASE("events come out clean and ordered") {
    const SynthResult result = generate(small_spec());
    REQUIRE(!result.events.empty());

    std::set<std::string> ids;
    const std::int64_t corpus_end =
        small_spec().t0 + static_cast<std::int64_t>(small_spec().n_weeks) * 7 * 86400;
    for (std::size_t i = 0; i < result.events.size(); ++i) {
        const auto& event = result.events[i];
        CHECK(ids.insert(event.message_id).second);
        REQUIRE(!event.recipients.empty());
        for (const auto& r : event.recipients) CHECK(r != event.sender);
        CHECK(event.timestamp >= small_spec().t0);
        CHECK(event.timestamp < corpus_end);
        CHECK(!event.tokens.empty());
        if (i > 0) {
            CHECK_FALSE(event_order(event, result.events[i - 1]));
        }
        if (event.in_reply_to) CHECK(ids.contains(*event.in_reply_to));
    }
}

TEST_CASE("planted archetypes follow the requested shares") {
    const SynthResult result = generate(small_spec());
    const auto counts = archetype_counts(result);
    // 20% of 40 actors per planted archetype.
    CHECK(counts.at("networker") == 8);
    CHECK(counts.at("influencer") == 8);
    CHECK(counts.at("positivist") == 8);
    CHECK(counts.at("baseline") == 16);
    CHECK(result.archetype.size() == 40);

    // Labels mark exactly the planted actors, in every period.
    for (const auto& [actor, attr] : result.attributes) {
        REQUIRE(attr.labels.size() == 2);
        const int expect = result.archetype.at(actor) == "baseline" ? 0 : 1;
        CHECK(attr.labels[0].value() == expect);
        CHECK(attr.labels[1].value() == expect);
    }
}

TEST_CASE("periods split the horizon evenly") {
    SynthSpec spec = small_spec();
    spec.n_periods = 4;
    const SynthResult result = generate(spec);
    REQUIRE(result.periods.size() == 4);
    const std::int64_t total = static_cast<std::int64_t>(spec.n_weeks) * 7 * 86400;
    const std::int64_t step = total / 4;
    for (std::size_t p = 0; p < 4; ++p) {
        CHECK(result.periods[p].start == spec.t0 + static_cast<std::int64_t>(p) * step);
    }
    CHECK(result.periods.back().end == spec.t0 + total);
    for (std::size_t p = 1; p < 4; ++p) {
        CHECK(result.periods[p].start == result.periods[p - 1].end);
    }
    // Every event falls into exactly one period.
    for (const auto& event : result.events) {
        std::size_t hits = 0;
        for (const auto& period : result.periods) {
            if (event.timestamp >= period.start && event.timestamp < period.end) ++hits;
        }
        CHECK(hits == 1);
    }
}

TEST_CASE("null mode plants nothing and draws labels at random") {
    SynthSpec spec = small_spec(3);
    spec.random_label_rate = 0.5;
    const SynthResult result = generate(spec);
    const auto counts = archetype_counts(result);
    CHECK(counts.at("baseline") == spec.n_actors);
    CHECK(counts.size() == 1);

    // Labels vary across actors and periods rather than tracking a plant.
    std::size_t ones = 0, total = 0;
    for (const auto& [actor, attr] : result.attributes) {
        for (const auto& label : attr.labels) {
            REQUIRE(label.has_value());
            ones += static_cast<std::size_t>(*label);
            ++total;
        }
    }
    CHECK(total == spec.n_actors * spec.n_periods);
    CHECK(ones > total / 5);      // nowhere near all-zero
    CHECK(ones < total * 4 / 5);  // nowhere near all-one
}

TEST_CASE("attribute columns stay inside their documented ranges") {
    const SynthResult result = generate(small_spec(11));
    REQUIRE(result.attributes.size() == 40);
    for (const auto& [actor, attr] : result.attributes) {
        CHECK(attr.age >= 25);
        CHECK(attr.age < 60);
        CHECK((attr.band == 0 || attr.band == 1));
        CHECK(attr.tenure >= 4);
        CHECK(attr.tenure < 241);
        CHECK(attr.tslp >= 0);
        CHECK(attr.tslp < 133);
    }
}

TEST_CASE("infeasible configurations are rejected") {
    SynthSpec spec = small_spec();
    spec.n_actors = 1;
    CHECK_THROWS_AS(generate(spec), ConfigError);

    spec = small_spec();
    spec.n_weeks = 0;
    CHECK_THROWS_AS(generate(spec), ConfigError);

    spec = small_spec();
    spec.n_periods = 0;
    CHECK_THROWS_AS(generate(spec), ConfigError);

    spec = small_spec();
    spec.team_size = 0;
    CHECK_THROWS_AS(generate(spec), ConfigError);

    spec = small_spec();
    spec.base_rate = 0.0;
    CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("networkers reach across teams more than baseline actors") {
    SynthSpec spec;
    spec.n_actors = 60;
    spec.n_weeks = 6;
    spec.team_size = 10;
    spec.seed = 5;
    const SynthResult result = generate(spec);

    // Teams are contiguous actor blocks; infer each actor's team from truth.
    std::map<ActorId, std::set<ActorId>> contacts;
    for (const auto& event : result.events) {
        for (const auto& r : event.recipients) contacts[event.sender].insert(r);
    }
    auto mean_fanout = [&](const std::string& kind) {
        double total = 0;
        std::size_t n = 0;
        for (const auto& [actor, k] : result.archetype) {
            if (k != kind) continue;
            total += static_cast<double>(contacts[actor].size());
            ++n;
        }
        return total / static_cast<double>(n);
    };
    CHECK(mean_fanout("networker") > mean_fanout("baseline") * 1.3);
}

TEST_CASE("positivists use happier words than baseline actors") {
    SynthSpec spec;
    spec.n_actors = 60;
    spec.n_weeks = 6;
    spec.seed = 6;
    const SynthResult result = generate(spec);
    const std::set<std::string> positive{"excellent", "great", "good", "happy", "wonderful",
                                         "fantastic", "awesome", "love", "brilliant", "superb",
                                         "delighted", "perfect", "amazing", "outstanding",
                                         "positive", "thanks"};
    std::map<std::string, std::pair<double, double>> tally;  // kind -> (hits, tokens)
    for (const auto& event : result.events) {
        auto& [hits, total] = tally[result.archetype.at(event.sender)];
        for (const auto& token : event.tokens) {
            if (positive.contains(token)) hits += 1;
            total += 1;
        }
    }
    const auto& pos = tally.at("positivist");
    const auto& base = tally.at("baseline");
    CHECK(pos.first / pos.second > 2.0 * (base.first / base.second));
}

}  // TEST_SUITE
