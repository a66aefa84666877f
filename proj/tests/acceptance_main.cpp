// End-to-end acceptance battery. Each criterion prints exactly one
// [PASS]/[FAIL] line; the process exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "mailsig/cluster.hpp"
#include "mailsig/content.hpp"
#include "mailsig/csv.hpp"
#include "mailsig/dynamics.hpp"
#include "mailsig/errors.hpp"
#include "mailsig/ingest.hpp"
#include "mailsig/learn.hpp"
#include "mailsig/netgraph.hpp"
#include "mailsig/pipeline.hpp"
#include "mailsig/synth.hpp"
#include "mailsig/topics.hpp"

using namespace mailsig;
using testutil::make_event;

namespace {

// Pinned tolerances and floors.
constexpr double kCentralityTol = 1e-12;   // vs exhaustive enumeration
constexpr double kFixtureTol = 1e-9;       // hand-worked indicator fixtures
constexpr double kGradientTol = 1e-6;      // relative, vs central differences
constexpr double kOrthoTol = 1e-8;         // normalized component correlation
constexpr double kEmSlack = 1e-9;          // allowed likelihood wobble
constexpr double kAccuracyFloor = 0.80;
constexpr double kAucFloor = 0.85;
constexpr double kNullAucLo = 0.40;
constexpr double kNullAucHi = 0.60;
constexpr double kKsFloor = 0.01;
constexpr double kElbowK = 3;
constexpr double kPurityFloor = 0.90;
constexpr double kClusterKappaFloor = 0.90;
constexpr double kTopicShareFloor = 0.90;
constexpr double kEnumerationBudgetSeconds = 10.0;
constexpr double kClassifierBudgetSeconds = 300.0;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::filesystem::path data_file(const char* name) {
    return std::filesystem::path(MAILSIG_DATA_DIR) / name;
}

RunConfig pipeline_config(const std::filesystem::path& out, std::uint64_t seed) {
    RunConfig config;
    config.out = out;
    config.seed = seed;
    config.synth.seed = seed;
    config.lexicon_path = data_file("lexicon.csv");
    config.stopwords_path = data_file("stopwords.txt");
    return config;
}

void run_through_evaluate(const RunConfig& config) {
    run_synth(config);
    run_ingest(config);
    run_indicators(config);
    run_train(config);
    run_evaluate(config);
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing " + path.string());
    return nlohmann::json::parse(in);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Rebuilds the panel rows from the indicators artifact, the same joining
/// the training stage performs.
std::pair<std::vector<PanelRow>, std::vector<std::string>> panel_from_csv(
    const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    std::vector<std::string> features;
    std::size_t actor_col = 0, period_col = 0, label_col = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c] == "actor") actor_col = c;
        else if (table.header[c] == "period") period_col = c;
        else if (table.header[c] == "label") label_col = c;
        else features.push_back(table.header[c]);
    }
    std::vector<PanelRow> rows;
    for (const auto& src : table.rows) {
        PanelRow row;
        row.actor = src[actor_col];
        row.period = static_cast<std::size_t>(std::stoull(src[period_col])) - 1;
        if (!src[label_col].empty()) row.label = std::stoi(src[label_col]);
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == actor_col || c == period_col || c == label_col) continue;
            row.values[table.header[c]] =
                src[c].empty() ? std::optional<double>{} : std::optional<double>{std::stod(src[c])};
        }
        rows.push_back(std::move(row));
    }
    return {std::move(rows), std::move(features)};
}

bool close_to(std::optional<double> got, double want, double tol = kFixtureTol) {
    return got.has_value() && std::fabs(*got - want) <= tol;
}

// --- criteria ---------------------------------------------------------------

bool centrality_vs_enumeration(std::string& note) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(2024);
    double worst = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const testutil::OracleGraph g = testutil::random_oracle_graph(rng, 8);
        const auto events = testutil::events_from_oracle(g);
        const CommGraph graph = build_graph(events, Period{0, 1 << 20});
        const auto bet = betweenness(graph);
        const auto clo = closeness(graph);
        const auto deg = degree(graph);
        const auto want_bet = testutil::betweenness_by_enumeration(g);
        const auto want_clo = testutil::closeness_by_floyd_warshall(g);
        const auto want_deg = testutil::degree_by_pairs(g);
        for (std::size_t i = 0; i < g.n; ++i) {
            const auto actor = testutil::oracle_actor(i);
            worst = std::max(worst, std::fabs(bet.at(actor) - want_bet[i]));
            worst = std::max(worst, std::fabs(clo.at(actor) - want_clo[i]));
            if (deg.at(actor) != want_deg[i]) worst = 1.0;
        }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "200 digraphs, max deviation %.2e, %.1fs", worst, elapsed);
    note = buf;
    return worst <= kCentralityTol && elapsed < kEnumerationBudgetSeconds;
}

bool hand_fixtures(std::string& note) {
    std::size_t failures = 0;
    auto expect = [&](bool ok, const char* what) {
        if (!ok) {
            ++failures;
            note += note.empty() ? what : std::string("; ") + what;
        }
    };

    {  // message-balance index
        const auto events = testutil::sorted_events({
            make_event("m1", "a", {"b"}, 10),
            make_event("m2", "a", {"b"}, 20),
            make_event("m3", "a", {"b"}, 30),
            make_event("m4", "b", {"a"}, 40),
            make_event("m5", "a", {"c"}, 50),
        });
        const auto rows = contribution(events, Period{0, 100});
        expect(close_to(rows.at("a").contribution_index, 0.6), "balance a");
        expect(close_to(rows.at("b").contribution_index, -0.5), "balance b");
        expect(close_to(rows.at("c").contribution_index, -1.0), "balance c");
    }
    {  // wording complexity against a two-document corpus
        std::vector<EmailEvent> docs{make_event("m1", "a", {"b"}, 10),
                                     make_event("m2", "b", {"a"}, 20)};
        docs[0].tokens = {"shared", "rare"};
        docs[1].tokens = {"shared", "shared"};
        const CorpusStats stats = build_corpus_stats(docs);
        expect(std::fabs(complexity_index(docs[0].tokens, stats) - 0.5 * std::log(2.0)) <=
                   kFixtureTol,
               "complexity rare");
        expect(std::fabs(complexity_index(docs[1].tokens, stats)) <= kFixtureTol,
               "complexity common");
    }
    {  // influence over the follow-up window
        Lexicon lexicon;
        lexicon.valence = {{"alpha", 0.5}};
        std::vector<EmailEvent> events{
            make_event("bg1", "x", {"y"}, 10), make_event("bg2", "y", {"x"}, 20),
            make_event("m1", "a", {"b", "c"}, 1000), make_event("m2", "b", {"a"}, 2000),
            make_event("m3", "c", {"a"}, 3000)};
        events[0].tokens = {"gamma"};
        events[1].tokens = {"delta"};
        events[2].tokens = {"alpha", "beta"};
        events[3].tokens = {"alpha", "beta"};  // perfect echo
        events[4].tokens = {"gamma"};          // unrelated follow-up
        const auto rows =
            content_indicators(testutil::sorted_events(events), Period{0, 864000}, lexicon);
        expect(close_to(rows.at("a").influence, 0.5), "influence mean");
    }
    {  // nudge counts and response times
        const auto events = testutil::sorted_events({
            make_event("p1", "a", {"b"}, 100),
            make_event("p2", "a", {"b"}, 200),
            make_event("r1", "b", {"a"}, 300, "p1"),
            make_event("p3", "a", {"b"}, 400, "x9"),
            make_event("r2", "b", {"a"}, 500, "p3"),
        });
        const auto rows = nudges_and_art(events, resolve_replies(events), Period{0, 1000});
        expect(close_to(rows.at("a").ego_nudges, 1.5), "nudges prompter");
        expect(close_to(rows.at("b").alter_nudges, 1.5), "nudges responder");
        expect(close_to(rows.at("b").ego_art, 150.0), "art replier");
        expect(close_to(rows.at("a").alter_art, 150.0), "art prompter");
    }
    {  // alternation count of weekly series
        const std::vector<double> zigzag{1, 3, 1, 3, 1};
        const std::vector<double> plateau{2, 2, 5, 5, 1};
        const std::vector<double> two{1, 2};
        expect(oscillation(zigzag) == std::optional<int>(3), "oscillation zigzag");
        expect(oscillation(plateau) == std::optional<int>(1), "oscillation plateau");
        expect(!oscillation(two).has_value(), "oscillation short");
    }
    if (failures == 0) note = "balance, complexity, influence, nudges, response, alternation";
    return failures == 0;
}

bool planted_signal_detection(std::string& note) {
    const auto start = std::chrono::steady_clock::now();
    testutil::TempDir dir("accept_signal");
    std::size_t good = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RunConfig config = pipeline_config(dir.path / ("s" + std::to_string(seed)), seed);
        run_through_evaluate(config);
        const auto eval = read_json(config.out / "evaluate" / "eval.json");
        const double accuracy = eval.at("accuracy").get<double>();
        const double auc = eval.at("auc").get<double>();
        if (accuracy >= kAccuracyFloor && auc >= kAucFloor) ++good;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%s%.2f/%.2f", detail.empty() ? "" : " ", accuracy, auc);
        detail += buf;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[192];
    std::snprintf(buf, sizeof(buf), "acc/auc per seed: %s, %zu/5 clear, %.0fs", detail.c_str(),
                  good, elapsed);
    note = buf;
    return good >= 4 && elapsed < kClassifierBudgetSeconds;
}

bool null_model_calibration(std::string& note) {
    testutil::TempDir dir("accept_null");
    // Held-out ranking of random labels must hover around chance.
    std::string aucs;
    bool auc_ok = true;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        RunConfig config = pipeline_config(dir.path / ("a" + std::to_string(seed)), seed);
        config.synth.random_label_rate = 0.5;
        run_through_evaluate(config);
        const double auc =
            read_json(config.out / "evaluate" / "eval.json").at("auc").get<double>();
        auc_ok = auc_ok && auc >= kNullAucLo && auc <= kNullAucHi;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%s%.2f", aucs.empty() ? "" : " ", auc);
        aucs += buf;
    }

    // Period-shift p-values over null replications should look uniform.
    std::vector<double> pvalues;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        RunConfig config = pipeline_config(dir.path / ("p" + std::to_string(rep)), 100 + rep);
        config.synth.random_label_rate = 0.5;
        config.synth.n_actors = 40;
        config.synth.n_weeks = 3;
        config.synth.team_size = 8;
        run_synth(config);
        run_ingest(config);
        run_indicators(config);
        auto [rows, features] = panel_from_csv(config.out / "indicators" / "indicators.csv");
        const DesignMatrix design = assemble(rows, features);
        const PeriodTest test = likelihood_ratio_period_test(design, 2);
        if (test.converged) pvalues.push_back(test.p_value);
        std::filesystem::remove_all(config.out);  // keep the scratch footprint small
    }
    const double ks = testutil::ks_uniform_pvalue(pvalues);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "null auc %s, %zu/50 tests converged, uniformity p %.3f",
                  aucs.c_str(), pvalues.size(), ks);
    note = buf;
    return auc_ok && pvalues.size() >= 45 && ks > kKsFloor;
}

bool archetype_clustering(std::string& note) {
    testutil::TempDir dir("accept_cluster");
    RunConfig config = pipeline_config(dir.path / "out", 42);
    run_all(config);

    const auto summary = read_json(config.out / "cluster" / "cluster_summary.json");
    const auto suggested = summary.at("suggested_k").get<std::size_t>();
    const double kappa = summary.at("kmeans_vs_gmm_kappa").get<double>();

    // Majority-archetype purity of the k-means clusters on the planted rows.
    std::map<std::string, std::string> truth;
    const CsvTable truth_table = read_csv(config.out / "synth" / "truth.csv");
    for (const auto& row : truth_table.rows) truth[row[0]] = row[1];
    const CsvTable assignments = read_csv(config.out / "cluster" / "assignments.csv");
    std::map<std::string, std::map<std::string, std::size_t>> votes;
    for (const auto& row : assignments.rows) votes[row[2]][truth.at(row[0])] += 1;
    std::size_t majority = 0, total = 0;
    for (const auto& [cluster, counts] : votes) {
        std::size_t best = 0;
        for (const auto& [kind, count] : counts) {
            best = std::max(best, count);
            total += count;
        }
        majority += best;
    }
    const double purity =
        total == 0 ? 0.0 : static_cast<double>(majority) / static_cast<double>(total);

    char buf[160];
    std::snprintf(buf, sizeof(buf), "suggested k %zu, purity %.3f, kmeans-gmm kappa %.3f",
                  suggested, purity, kappa);
    note = buf;
    return suggested == kElbowK && purity >= kPurityFloor && kappa >= kClusterKappaFloor;
}

bool numeric_soundness(std::string& note) {
    std::size_t failures = 0;
    auto expect = [&](bool ok, const char* what) {
        if (!ok) {
            ++failures;
            note += note.empty() ? what : std::string("; ") + what;
        }
    };

    {  // gradient vs central finite differences at random points
        Rng rng(51);
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t n = 10 + rng.below(8);
            Matrix x(n, std::vector<double>(3));
            std::vector<int> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (auto& v : x[i]) v = rng.normal();
                y[i] = rng.bernoulli(0.5) ? 1 : 0;
            }
            std::vector<double> beta(4);
            for (auto& b : beta) b = rng.normal();
            const auto grad = logistic_gradient(x, y, beta);
            for (std::size_t j = 0; j < beta.size(); ++j) {
                auto hi = beta, lo = beta;
                hi[j] += 1e-6;
                lo[j] -= 1e-6;
                const double fd =
                    (logistic_log_likelihood(x, y, hi) - logistic_log_likelihood(x, y, lo)) / 2e-6;
                const double scale = std::max(1.0, std::fabs(grad[j]));
                expect(std::fabs(grad[j] - fd) <= kGradientTol * scale, "gradient");
            }
        }
    }
    {  // boosting error bound after every round
        Rng rng(52);
        const std::size_t n = 80;
        Matrix x(n, std::vector<double>(5));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : x[i]) v = rng.normal();
            y[i] = sigmoid(2.0 * (x[i][0] - x[i][1])) > rng.next_double() ? 1 : 0;
        }
        const AdaBoostModel model = fit_adaboost(x, y, 25, WeakKind::stump);
        std::vector<double> margin(n, 0.0);
        double bound = 1.0;
        for (std::size_t r = 0; r < model.learners.size(); ++r) {
            for (std::size_t i = 0; i < n; ++i) {
                margin[i] += model.alphas[r] * model.learners[r].predict(x[i]);
            }
            bound *= 2.0 * std::sqrt(model.round_errors[r] * (1.0 - model.round_errors[r]));
            std::size_t mistakes = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if ((margin[i] > 0 ? 1 : 0) != y[i]) ++mistakes;
            }
            expect(static_cast<double>(mistakes) / static_cast<double>(n) <= bound + 1e-12,
                   "boost bound");
        }
    }
    {  // EM likelihood must never decrease
        Rng rng(53);
        Matrix x;
        for (int i = 0; i < 40; ++i) x.push_back({rng.normal(), rng.normal()});
        for (int i = 0; i < 40; ++i) x.push_back({6 + rng.normal(), 6 + rng.normal()});
        const GmmResult gmm = gmm_em(x, 2, 9);
        for (std::size_t i = 1; i < gmm.log_likelihood_trace.size(); ++i) {
            expect(gmm.log_likelihood_trace[i] >= gmm.log_likelihood_trace[i - 1] - kEmSlack,
                   "em monotone");
        }
    }
    {  // latent component scores stay mutually orthogonal
        Rng rng(54);
        const std::size_t n = 60;
        Matrix x(n, std::vector<double>(6));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : x[i]) v = rng.normal();
            y[i] = sigmoid(x[i][0] + 0.5 * x[i][2]) > rng.next_double() ? 1 : 0;
        }
        Matrix xs = x;
        standardize_columns(xs);
        const PlsLogitModel model = fit_pls_logit(xs, y, 3);
        for (std::size_t a = 0; a < model.n_components; ++a) {
            for (std::size_t b = a + 1; b < model.n_components; ++b) {
                double dot = 0, na = 0, nb = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    dot += model.train_scores[i][a] * model.train_scores[i][b];
                    na += model.train_scores[i][a] * model.train_scores[i][a];
                    nb += model.train_scores[i][b] * model.train_scores[i][b];
                }
                expect(std::fabs(dot) <= kOrthoTol * std::sqrt(na * nb) + 1e-300,
                       "component orthogonality");
            }
        }
    }
    if (failures == 0) note = "gradient, boosting bound, em trace, component orthogonality";
    return failures == 0;
}

bool topic_recovery(std::string& note) {
    double share_total = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::vector<ActorDocument> docs;
        std::vector<int> truth;
        Rng rng(seed * 977);
        for (int d = 0; d < 16; ++d) {
            const int pool = d % 2;
            truth.push_back(pool);
            std::set<std::string> terms;
            while (terms.size() < 6) {
                terms.insert((pool == 0 ? "a" : "b") + std::to_string(rng.below(10)));
            }
            ActorDocument doc;
            doc.actor = "d" + std::to_string(d);
            doc.period = 0;
            for (const auto& term : terms) doc.terms.emplace_back(term, 1.0);
            docs.push_back(std::move(doc));
        }
        const TopicModel model = fit_lda(docs, 2, 0.1, 0.01, 500, seed);
        std::size_t direct = 0;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const int assigned = model.theta[i][0] >= model.theta[i][1] ? 0 : 1;
            if (assigned == truth[i]) ++direct;
        }
        const std::size_t aligned = std::max(direct, docs.size() - direct);
        share_total += static_cast<double>(aligned) / static_cast<double>(docs.size());
    }
    const double mean_share = share_total / 5.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "mean aligned share %.3f over 5 seeds", mean_share);
    note = buf;
    return mean_share > kTopicShareFloor;
}

bool reproducibility(std::string& note) {
    testutil::TempDir dir("accept_repro");
    RunConfig one = pipeline_config(dir.path / "one", 11);
    RunConfig two = pipeline_config(dir.path / "two", 11);
    for (auto* config : {&one, &two}) {
        config->synth.n_actors = 60;
        config->synth.n_weeks = 4;
    }
    run_all(one);
    run_all(two);

    std::size_t files = 0;
    std::string mismatch;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(one.out)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const auto rel = std::filesystem::relative(entry.path(), one.out);
        const auto twin = two.out / rel;
        if (!std::filesystem::exists(twin) || slurp(entry.path()) != slurp(twin)) {
            mismatch = rel.generic_string();
            break;
        }
    }
    char buf[160];
    if (mismatch.empty()) {
        std::snprintf(buf, sizeof(buf), "%zu artifacts byte-identical across runs", files);
    } else {
        std::snprintf(buf, sizeof(buf), "first mismatch: %s", mismatch.c_str());
    }
    note = buf;
    return mismatch.empty() && files > 0;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Criterion> criteria{
        {"centrality matches exhaustive enumeration", centrality_vs_enumeration},
        {"indicator hand fixtures", hand_fixtures},
        {"planted signal detection", planted_signal_detection},
        {"null-model calibration", null_model_calibration},
        {"archetype clustering", archetype_clustering},
        {"numeric soundness", numeric_soundness},
        {"topic recovery", topic_recovery},
        {"bit-for-bit reproducibility", reproducibility},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string note;
        bool ok = false;
        try {
            ok = criteria[i].run(note);
        } catch (const std::exception& e) {
            note = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %zu. %s — %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].name,
                    note.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
