#include <benchmark/benchmark.h>

#include <cstdio>
#include <string>
#include <vector>

#include "mailsig/cluster.hpp"
#include "mailsig/learn.hpp"
#include "mailsig/netgraph.hpp"
#include "mailsig/rng.hpp"
#include "mailsig/topics.hpp"
#include "mailsig/types.hpp"

namespace {

using namespace mailsig;

std::vector<EmailEvent> random_events(std::size_t actors, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EmailEvent> events;
    events.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t s = rng.below(actors);
        std::size_t r = rng.below(actors - 1);
        if (r >= s) ++r;
        char id[16], sa[16], ra[16];
        std::snprintf(id, sizeof(id), "m%06zu", i);
        std::snprintf(sa, sizeof(sa), "a%04zu", s);
        std::snprintf(ra, sizeof(ra), "a%04zu", r);
        EmailEvent event;
        event.message_id = id;
        event.sender = sa;
        event.recipients = {ra};
        event.timestamp = static_cast<std::int64_t>(i);
        events.push_back(std::move(event));
    }
    return events;
}

void BM_Betweenness(benchmark::State& state) {
    const auto actors = static_cast<std::size_t>(state.range(0));
    const auto events = random_events(actors, actors * 6, 7);
    const Period period{0, static_cast<std::int64_t>(events.size()) + 1};
    for (auto _ : state) {
        const CommGraph graph(events, period);
        benchmark::DoNotOptimize(betweenness(graph));
    }
}
BENCHMARK(BM_Betweenness)->Arg(100)->Arg(300);

void BM_Lda(benchmark::State& state) {
    Rng rng(11);
    std::vector<ActorDocument> documents;
    for (std::size_t d = 0; d < 200; ++d) {
        ActorDocument doc;
        char actor[16];
        std::snprintf(actor, sizeof(actor), "a%04zu", d);
        doc.actor = actor;
        doc.period = 0;
        for (std::size_t t = 0; t < 10; ++t) {
            char term[16];
            std::snprintf(term, sizeof(term), "w%03llu",
                          static_cast<unsigned long long>(rng.below(300)));
            doc.terms.emplace_back(term, 1.0);
        }
        documents.push_back(std::move(doc));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_lda(documents, 6, -1.0, 0.01, 200, 1));
    }
}
BENCHMARK(BM_Lda);

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(rows, std::vector<double>(cols));
    for (auto& row : x) {
        for (auto& v : row) v = rng.normal();
    }
    return x;
}

void BM_Kmeans(benchmark::State& state) {
    const Matrix x = random_matrix(500, 12, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kmeans(x, 4, 4, 1));
    }
}
BENCHMARK(BM_Kmeans);

void BM_AdaBoost(benchmark::State& state) {
    Rng rng(5);
    Matrix x = random_matrix(400, 20, 9);
    std::vector<int> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i][0] + 0.5 * x[i][1] > 0 ? 1 : 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_adaboost(x, y, 50));
    }
}
BENCHMARK(BM_AdaBoost);

}  // namespace

BENCHMARK_MAIN();
