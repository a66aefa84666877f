#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "helpers.hpp"
#include "mailsig/netgraph.hpp"

using namespace mailsig;
using testutil::make_event;

namespace {

const Period kAll{0, 1 << 20};

std::vector<EmailEvent> line_graph() {
    // a -> b -> c -> d
    return {make_event("m1", "a", {"b"}, 10), make_event("m2", "b", {"c"}, 20),
            make_event("m3", "c", {"d"}, 30)};
}

}  // namespace

TEST_SUITE("netgraph") {

TEST_CASE("graph nodes cover senders and recipients, sorted") {
    const auto events = line_graph();
    const CommGraph graph(events, kAll);
    CHECK(graph.size() == 4);
    CHECK(graph.nodes() == std::vector<ActorId>{"a", "b", "c", "d"});
    CHECK(graph.index_of("c").value() == 2);
    CHECK_FALSE(graph.index_of("zz").has_value());
}

TEST_CASE("arc weights count repeated emails") {
    std::vector<EmailEvent> events = line_graph();
    events.push_back(make_event("m4", "a", {"b", "c"}, 40));
    const CommGraph graph(testutil::sorted_events(events), kAll);
    const auto a = graph.index_of("a").value();
    const auto b = graph.index_of("b").value();
    const auto c = graph.index_of("c").value();
    CHECK(graph.arc_weights().at({a, b}) == 2);
    CHECK(graph.arc_weights().at({a, c}) == 1);
}

TEST_CASE("events outside the period are ignored") {
    const auto events = line_graph();
    const CommGraph graph(events, Period{15, 25});  // only m2
    CHECK(graph.size() == 2);
    CHECK(graph.nodes() == std::vector<ActorId>{"b", "c"});
}

TEST_CASE("line graph betweenness puts all load on the middle") {
    const auto scores = betweenness(CommGraph(line_graph(), kAll));
    // pairs routed through b: a->c, a->d; through c: a->d, b->d.
    CHECK(scores.at("a") == doctest::Approx(0.0));
    CHECK(scores.at("b") == doctest::Approx(2.0));
    CHECK(scores.at("c") == doctest::Approx(2.0));
    CHECK(scores.at("d") == doctest::Approx(0.0));
}

TEST_CASE("diamond splits shortest-path credit") {
    // a -> b -> d, a -> c -> d: two equal paths, half credit each.
    const std::vector<EmailEvent> events = {
        make_event("m1", "a", {"b"}, 1), make_event("m2", "a", {"c"}, 2),
        make_event("m3", "b", {"d"}, 3), make_event("m4", "c", {"d"}, 4)};
    const auto scores = betweenness(CommGraph(events, kAll));
    CHECK(scores.at("b") == doctest::Approx(0.5));
    CHECK(scores.at("c") == doctest::Approx(0.5));
}

TEST_CASE("closeness of the line graph") {
    const auto scores = closeness(CommGraph(line_graph(), kAll));
    // a reaches 3 nodes at distances 1,2,3: (3/3)*(3/6) = 0.5
    CHECK(scores.at("a") == doctest::Approx(0.5).epsilon(1e-12));
    // b reaches 2 at 1,2: (2/3)*(2/3) = 4/9
    CHECK(scores.at("b") == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    // d reaches nothing.
    CHECK(scores.at("d") == doctest::Approx(0.0));
}

TEST_CASE("degree counts distinct contacts either direction") {
    std::vector<EmailEvent> events = line_graph();
    events.push_back(make_event("m4", "b", {"a"}, 40));  // reciprocal arc, no new contact
    const auto scores = degree(CommGraph(testutil::sorted_events(events), kAll));
    CHECK(scores.at("a") == 1);
    CHECK(scores.at("b") == 2);
    CHECK(scores.at("c") == 2);
    CHECK(scores.at("d") == 1);
}

TEST_CASE("contribution counts and index") {
    // a sends 3 (one to two people), receives 1.
    const std::vector<EmailEvent> events = testutil::sorted_events(
        {make_event("m1", "a", {"b", "c"}, 1), make_event("m2", "a", {"b"}, 2),
         make_event("m3", "a", {"c"}, 3), make_event("m4", "b", {"a"}, 4)});
    const auto rows = contribution(events, kAll);
    CHECK(rows.at("a").messages_sent == 3);
    CHECK(rows.at("a").messages_received == 1);
    CHECK(rows.at("a").contribution_index.value() == doctest::Approx(0.5).epsilon(1e-12));
    // b: sent 1, received 2 -> (1-2)/3
    CHECK(rows.at("b").contribution_index.value() ==
          doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    // c: sent 0, received 2 -> -1
    CHECK(rows.at("c").contribution_index.value() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("contribution index missing when silent") {
    const std::vector<EmailEvent> events = {make_event("m1", "a", {"b"}, 1)};
    const auto rows = contribution(events, Period{100, 200});
    CHECK(rows.empty());
}

TEST_CASE("contribution antisymmetry") {
    // Swapping every arc direction negates the index.
    testutil::Rng rng(99);
    for (int rep = 0; rep < 20; ++rep) {
        auto g = testutil::random_oracle_graph(rng);
        auto events = testutil::events_from_oracle(g);
        testutil::OracleGraph flipped(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            for (std::size_t j = 0; j < g.n; ++j) flipped.adj[j][i] = g.adj[i][j];
        }
        auto reversed = testutil::events_from_oracle(flipped);
        const auto fwd = contribution(events, kAll);
        const auto rev = contribution(reversed, kAll);
        for (const auto& [actor, row] : fwd) {
            const auto& other = rev.at(actor);
            CHECK(row.messages_sent == other.messages_received);
            CHECK(row.messages_received == other.messages_sent);
            if (row.contribution_index) {
                CHECK(*row.contribution_index ==
                      doctest::Approx(-*other.contribution_index).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("centrality matches enumeration oracles on random digraphs") {
    testutil::Rng rng(2024);
    for (int rep = 0; rep < 200; ++rep) {
        const auto g = testutil::random_oracle_graph(rng);
        const auto events = testutil::events_from_oracle(g);
        const CommGraph graph(events, kAll);

        const auto bet_oracle = testutil::betweenness_by_enumeration(g);
        const auto clo_oracle = testutil::closeness_by_floyd_warshall(g);
        const auto deg_oracle = testutil::degree_by_pairs(g);

        const auto bet = betweenness(graph);
        const auto clo = closeness(graph);
        const auto deg = degree(graph);

        for (std::size_t i = 0; i < g.n; ++i) {
            const auto actor = testutil::oracle_actor(i);
            bool appears = false;
            for (std::size_t j = 0; j < g.n; ++j) appears |= g.adj[i][j] || g.adj[j][i];
            if (!appears) {
                CHECK(bet.find(actor) == bet.end());
                continue;
            }
            REQUIRE(bet.count(actor) == 1);
            CHECK(std::fabs(bet.at(actor) - bet_oracle[i]) <= 1e-12);
            CHECK(std::fabs(clo.at(actor) - clo_oracle[i]) <= 1e-12);
            CHECK(deg.at(actor) == deg_oracle[i]);
        }
    }
}

TEST_CASE("relabeling actors permutes the scores") {
    testutil::Rng rng(7);
    const auto g = testutil::random_oracle_graph(rng);
    auto events = testutil::events_from_oracle(g);
    auto renamed = events;
    const auto rename = [](const ActorId& a) { return "x_" + a; };
    for (auto& event : renamed) {
        event.sender = rename(event.sender);
        for (auto& r : event.recipients) r = rename(r);
    }
    const auto base = betweenness(CommGraph(events, kAll));
    const auto mapped = betweenness(CommGraph(renamed, kAll));
    REQUIRE(base.size() == mapped.size());
    for (const auto& [actor, score] : base) {
        CHECK(mapped.at(rename(actor)) == doctest::Approx(score).epsilon(1e-15));
    }
}

}  // TEST_SUITE
