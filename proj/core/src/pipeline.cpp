#include "mailsig/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mailsig/cluster.hpp"
#include "mailsig/content.hpp"
#include "mailsig/csv.hpp"
#include "mailsig/dynamics.hpp"
#include "mailsig/errors.hpp"
#include "mailsig/hash.hpp"
#include "mailsig/ingest.hpp"
#include "mailsig/learn.hpp"
#include "mailsig/netgraph.hpp"
#include "mailsig/stats.hpp"
#include "mailsig/topics.hpp"

namespace mailsig {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("invalid JSON in " + path.string());
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

std::string file_sha256(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sha256_hex(buffer.str());
}

void write_stage_manifest(const RunConfig& config, const std::string& stage,
                          const std::vector<fs::path>& files, const json& metrics) {
    json manifest;
    manifest["stage"] = stage;
    manifest["config_hash"] = config_hash(config);
    json list = json::array();
    for (const auto& file : files) {
        list.push_back({{"path", fs::relative(file, config.out).generic_string()},
                        {"sha256", file_sha256(file)}});
    }
    manifest["files"] = list;
    manifest["metrics"] = metrics;
    write_text(config.out / "manifest.d" / (stage + ".json"), manifest.dump(2) + "\n");
}

void write_periods_json(const fs::path& path, std::span<const Period> periods) {
    json arr = json::array();
    for (const auto& p : periods) arr.push_back({p.start, p.end});
    write_text(path, arr.dump() + "\n");
}

std::vector<Period> read_periods_json(const fs::path& path) {
    const json j = read_json_file(path);
    std::vector<Period> periods;
    if (!j.is_array() || j.empty()) throw DataError("periods file must be a non-empty array");
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() ||
            !entry[1].is_number_integer()) {
            throw DataError("each period must be a [start, end] pair of integers");
        }
        Period p{entry[0].get<std::int64_t>(), entry[1].get<std::int64_t>()};
        if (p.start >= p.end) throw DataError("period start must precede its end");
        periods.push_back(p);
    }
    return periods;
}

double parse_number(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double value = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw DataError("invalid number in " + what + ": '" + text + "'");
    }
}

std::string cell(const std::optional<double>& value) {
    return value ? format_double(*value) : std::string();
}

std::string cell_int(const std::optional<int>& value) {
    return value ? std::to_string(*value) : std::string();
}

// --- config -----------------------------------------------------------------

template <typename T>
T get_as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("invalid value for config key '" + key + "'");
    }
}

void apply_synth_json(SynthSpec& spec, const json& j) {
    if (!j.is_object()) throw ConfigError("'synth' must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "n_actors") spec.n_actors = get_as<std::size_t>(value, key);
        else if (key == "n_weeks") spec.n_weeks = get_as<std::size_t>(value, key);
        else if (key == "n_periods") spec.n_periods = get_as<std::size_t>(value, key);
        else if (key == "team_size") spec.team_size = get_as<std::size_t>(value, key);
        else if (key == "networker_share") spec.networker_share = get_as<double>(value, key);
        else if (key == "influencer_share") spec.influencer_share = get_as<double>(value, key);
        else if (key == "positivist_share") spec.positivist_share = get_as<double>(value, key);
        else if (key == "base_rate") spec.base_rate = get_as<double>(value, key);
        else if (key == "reply_probability") spec.reply_probability = get_as<double>(value, key);
        else if (key == "effect_size") spec.effect_size = get_as<double>(value, key);
        else if (key == "random_label_rate") spec.random_label_rate = get_as<double>(value, key);
        else if (key == "seed") spec.seed = get_as<std::uint64_t>(value, key);
        else if (key == "t0") spec.t0 = get_as<std::int64_t>(value, key);
        else throw ConfigError("unknown config key 'synth." + key + "'");
    }
}

void apply_config_json(RunConfig& config, const json& j) {
    for (const auto& [key, value] : j.items()) {
        if (key == "out") config.out = get_as<std::string>(value, key);
        else if (key == "seed") config.seed = get_as<std::uint64_t>(value, key);
        else if (key == "input_format") config.input_format = get_as<std::string>(value, key);
        else if (key == "events_path") config.events_path = get_as<std::string>(value, key);
        else if (key == "attributes_path") config.attributes_path = get_as<std::string>(value, key);
        else if (key == "anonymize") config.anonymize = get_as<bool>(value, key);
        else if (key == "salt") config.salt = get_as<std::string>(value, key);
        else if (key == "weekly_window") config.weekly_window = get_as<std::int64_t>(value, key);
        else if (key == "influence_window") config.influence_window = get_as<std::int64_t>(value, key);
        else if (key == "reply_horizon") config.reply_horizon = get_as<std::int64_t>(value, key);
        else if (key == "lexicon_path") config.lexicon_path = get_as<std::string>(value, key);
        else if (key == "stopwords_path") config.stopwords_path = get_as<std::string>(value, key);
        else if (key == "periods") {
            if (!value.is_array()) throw ConfigError("'periods' must be an array of [start, end]");
            config.periods.clear();
            for (const auto& entry : value) {
                if (!entry.is_array() || entry.size() != 2) {
                    throw ConfigError("'periods' must be an array of [start, end]");
                }
                config.periods.push_back(Period{get_as<std::int64_t>(entry[0], key),
                                                get_as<std::int64_t>(entry[1], key)});
            }
        } else if (key == "lda_topics") config.lda_topics = get_as<std::size_t>(value, key);
        else if (key == "lda_alpha") config.lda_alpha = get_as<double>(value, key);
        else if (key == "lda_beta") config.lda_beta = get_as<double>(value, key);
        else if (key == "lda_iterations") config.lda_iterations = get_as<std::size_t>(value, key);
        else if (key == "top_words_k") config.top_words_k = get_as<std::size_t>(value, key);
        else if (key == "model") config.model = get_as<std::string>(value, key);
        else if (key == "components") config.components = get_as<std::size_t>(value, key);
        else if (key == "rounds") config.rounds = get_as<std::size_t>(value, key);
        else if (key == "weak") config.weak = get_as<std::string>(value, key);
        else if (key == "threshold") config.threshold = get_as<double>(value, key);
        else if (key == "period_dummy") config.period_dummy = get_as<bool>(value, key);
        else if (key == "clusters") config.clusters = get_as<std::size_t>(value, key);
        else if (key == "kmeans_restarts") config.kmeans_restarts = get_as<std::size_t>(value, key);
        else if (key == "elbow_max_k") config.elbow_max_k = get_as<std::size_t>(value, key);
        else if (key == "synth") apply_synth_json(config.synth, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    if (config.input_format != "jsonl" && config.input_format != "mbox") {
        throw ConfigError("input_format must be 'jsonl' or 'mbox'");
    }
    if (config.model != "adaboost" && config.model != "pls_logit") {
        throw ConfigError("model must be 'adaboost' or 'pls_logit'");
    }
    parse_weak_kind(config.weak);
    if (config.weekly_window <= 0 || config.influence_window <= 0 || config.reply_horizon <= 0) {
        throw ConfigError("window lengths must be positive");
    }
    for (const auto& p : config.periods) {
        if (p.start >= p.end) throw ConfigError("each period must satisfy start < end");
    }
    if (config.threshold <= 0 || config.threshold >= 1) {
        throw ConfigError("threshold must lie strictly between 0 and 1");
    }
}

ModelSpec spec_from_config(const RunConfig& config) {
    ModelSpec spec;
    spec.kind = config.model;
    spec.components = config.components;
    spec.rounds = config.rounds;
    spec.weak = parse_weak_kind(config.weak);
    spec.period_dummy = config.period_dummy;
    spec.threshold = config.threshold;
    return spec;
}

// --- panel ------------------------------------------------------------------

struct Panel {
    std::vector<PanelRow> rows;
    std::vector<std::string> feature_order;
};

Panel load_panel(const fs::path& path) {
    const CsvTable table = read_csv(path);
    const std::size_t actor_col = table.column("actor");
    const std::size_t period_col = table.column("period");
    const std::size_t label_col = table.column("label");

    Panel panel;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j == actor_col || j == period_col || j == label_col) continue;
        panel.feature_order.push_back(table.header[j]);
    }
    for (const auto& row : table.rows) {
        PanelRow pr;
        pr.actor = row[actor_col];
        const double period = parse_number(row[period_col], "column period");
        if (period < 1) throw DataError("period indices are 1-based");
        pr.period = static_cast<std::size_t>(period) - 1;
        if (!row[label_col].empty()) {
            pr.label = static_cast<int>(parse_number(row[label_col], "column label"));
        }
        std::size_t feature = 0;
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            if (j == actor_col || j == period_col || j == label_col) continue;
            const std::string& name = panel.feature_order[feature++];
            if (row[j].empty()) {
                pr.values[name] = std::nullopt;
            } else {
                pr.values[name] = parse_number(row[j], "column " + name);
            }
        }
        panel.rows.push_back(std::move(pr));
    }
    return panel;
}

// --- model serialization -------------------------------------------------------

json model_to_json(const FittedModel& model, const DesignMatrix& design) {
    json j;
    j["kind"] = model.spec.kind;
    j["spec"] = {{"components", model.spec.components},
                 {"rounds", model.spec.rounds},
                 {"weak", model.spec.weak == WeakKind::stump ? "stump" : "logit1"},
                 {"threshold", model.spec.threshold},
                 {"period_dummy", model.spec.period_dummy}};
    j["features"] = {{"names", design.feature_names},
                     {"dropped", design.dropped},
                     {"mean", design.scaling.mean},
                     {"sd", design.scaling.sd}};
    j["rows"] = design.x.size();
    if (model.spec.kind == "adaboost") {
        json learners = json::array();
        for (const auto& learner : model.boost.learners) {
            learners.push_back({{"kind", learner.kind == WeakKind::stump ? "stump" : "logit1"},
                                {"feature", learner.feature},
                                {"threshold", learner.threshold},
                                {"polarity", learner.polarity},
                                {"b0", learner.b0},
                                {"b1", learner.b1}});
        }
        j["adaboost"] = {{"alphas", model.boost.alphas},
                         {"round_errors", model.boost.round_errors},
                         {"learners", learners}};
    } else {
        j["pls_logit"] = {{"n_components", model.pls.n_components},
                          {"w_star", model.pls.w_star},
                          {"beta", model.pls.logit.beta},
                          {"ridge_fallback", model.pls.logit.ridge_fallback},
                          {"converged", model.pls.logit.converged},
                          {"pseudo_r2", model.pls.pseudo_r2},
                          {"aic", model.pls.aic},
                          {"period_dummy", model.pls.period_dummy}};
    }
    return j;
}

ModelSpec spec_from_model_json(const json& j) {
    ModelSpec spec;
    try {
        spec.kind = j.at("kind").get<std::string>();
        const json& s = j.at("spec");
        spec.components = s.at("components").get<std::size_t>();
        spec.rounds = s.at("rounds").get<std::size_t>();
        spec.weak = parse_weak_kind(s.at("weak").get<std::string>());
        spec.threshold = s.at("threshold").get<double>();
        spec.period_dummy = s.at("period_dummy").get<bool>();
    } catch (const json::exception&) {
        throw DataError("model file is malformed");
    }
    return spec;
}

}  // namespace

// --- config -----------------------------------------------------------------

RunConfig load_config(const fs::path& path) {
    const json j = read_json_file(path);
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    RunConfig config;
    apply_config_json(config, j);
    return config;
}

// The output directory is deliberately not serialized: the hash identifies
// the analysis, not where its artifacts land.
std::string config_to_json(const RunConfig& config) {
    json j;
    j["seed"] = config.seed;
    j["input_format"] = config.input_format;
    j["events_path"] = config.events_path.generic_string();
    j["attributes_path"] = config.attributes_path.generic_string();
    j["anonymize"] = config.anonymize;
    j["salt"] = config.salt;
    j["weekly_window"] = config.weekly_window;
    j["influence_window"] = config.influence_window;
    j["reply_horizon"] = config.reply_horizon;
    j["lexicon_path"] = config.lexicon_path.generic_string();
    j["stopwords_path"] = config.stopwords_path.generic_string();
    json periods = json::array();
    for (const auto& p : config.periods) periods.push_back({p.start, p.end});
    j["periods"] = periods;
    j["lda_topics"] = config.lda_topics;
    j["lda_alpha"] = config.lda_alpha;
    j["lda_beta"] = config.lda_beta;
    j["lda_iterations"] = config.lda_iterations;
    j["top_words_k"] = config.top_words_k;
    j["model"] = config.model;
    j["components"] = config.components;
    j["rounds"] = config.rounds;
    j["weak"] = config.weak;
    j["threshold"] = config.threshold;
    j["period_dummy"] = config.period_dummy;
    j["clusters"] = config.clusters;
    j["kmeans_restarts"] = config.kmeans_restarts;
    j["elbow_max_k"] = config.elbow_max_k;
    j["synth"] = {{"n_actors", config.synth.n_actors},
                  {"n_weeks", config.synth.n_weeks},
                  {"n_periods", config.synth.n_periods},
                  {"team_size", config.synth.team_size},
                  {"networker_share", config.synth.networker_share},
                  {"influencer_share", config.synth.influencer_share},
                  {"positivist_share", config.synth.positivist_share},
                  {"base_rate", config.synth.base_rate},
                  {"reply_probability", config.synth.reply_probability},
                  {"effect_size", config.synth.effect_size},
                  {"random_label_rate", config.synth.random_label_rate},
                  {"seed", config.synth.seed},
                  {"t0", config.synth.t0}};
    return j.dump();
}

std::string config_hash(const RunConfig& config) { return sha256_hex(config_to_json(config)); }

// --- stages -----------------------------------------------------------------

void run_synth(const RunConfig& config) {
    SynthSpec spec = config.synth;
    spec.seed = config.seed;
    const SynthResult result = generate(spec);

    const fs::path dir = config.out / "synth";
    fs::create_directories(dir);
    write_events_jsonl(dir / "events.jsonl", result.events);
    write_attributes_csv(dir / "attributes.csv", result.attributes);

    CsvTable truth;
    truth.header = {"actor", "archetype", "label"};
    for (const auto& [actor, arche] : result.archetype) {
        truth.rows.push_back({actor, arche, arche == "baseline" ? "0" : "1"});
    }
    write_csv(dir / "truth.csv", truth);
    write_periods_json(dir / "periods.json", result.periods);

    std::size_t planted = 0;
    for (const auto& [actor, arche] : result.archetype) {
        if (arche != "baseline") ++planted;
    }
    const json metrics = {{"events", result.events.size()},
                          {"actors", result.attributes.size()},
                          {"planted", planted},
                          {"periods", result.periods.size()}};
    write_stage_manifest(config, "synth", {dir / "events.jsonl", dir / "attributes.csv",
                                           dir / "truth.csv", dir / "periods.json"},
                         metrics);
}

void run_ingest(const RunConfig& config) {
    fs::path events_src = config.events_path;
    const bool from_synth = events_src.empty();
    if (from_synth) {
        events_src = config.out / "synth" / "events.jsonl";
        if (!fs::exists(events_src)) {
            throw MissingArtifactError(
                "synth", "no input events: set events_path or run the synth stage first");
        }
    } else if (!fs::exists(events_src)) {
        throw DataError("events file not found: " + events_src.string());
    }

    IngestResult ingest;
    if (config.input_format == "mbox") {
        IngestOptions options;
        options.anonymize = config.anonymize;
        options.salt = config.salt;
        options.stopwords = load_stopwords(config.stopwords_path);
        ingest = parse_mbox(events_src, options);
    } else {
        ingest = parse_jsonl(events_src);
    }
    if (ingest.events.empty()) throw DataError("no valid events survived ingest");

    std::map<ActorId, ActorAttributes> attributes;
    fs::path attr_src = config.attributes_path;
    if (attr_src.empty() && from_synth) {
        const fs::path synth_attr = config.out / "synth" / "attributes.csv";
        if (fs::exists(synth_attr)) attr_src = synth_attr;
    }
    if (!attr_src.empty()) {
        attributes = load_attributes(attr_src);
        if (config.input_format == "mbox" && config.anonymize) {
            std::map<ActorId, ActorAttributes> hashed;
            for (const auto& [actor, row] : attributes) {
                ActorAttributes copy = row;
                copy.actor = salted_id(config.salt, actor);
                hashed.emplace(copy.actor, std::move(copy));
            }
            attributes = std::move(hashed);
        }
    }

    std::vector<Period> periods = config.periods;
    if (periods.empty() && from_synth) {
        const fs::path synth_periods = config.out / "synth" / "periods.json";
        if (fs::exists(synth_periods)) periods = read_periods_json(synth_periods);
    }
    if (periods.empty()) {
        // Split the observed range evenly.
        const std::size_t n = std::max<std::size_t>(config.synth.n_periods, 1);
        const std::int64_t lo = ingest.events.front().timestamp;
        const std::int64_t hi = ingest.events.back().timestamp + 1;
        for (std::size_t t = 0; t < n; ++t) {
            const std::int64_t a = lo + (hi - lo) * static_cast<std::int64_t>(t) /
                                            static_cast<std::int64_t>(n);
            const std::int64_t b = lo + (hi - lo) * static_cast<std::int64_t>(t + 1) /
                                            static_cast<std::int64_t>(n);
            periods.push_back(Period{a, b});
        }
    }

    const fs::path dir = config.out / "ingest";
    fs::create_directories(dir);
    write_events_jsonl(dir / "events.jsonl", ingest.events);
    write_rejects_csv(dir / "rejects.csv", ingest.rejects);
    write_attributes_csv(dir / "attributes.csv", attributes);
    write_periods_json(dir / "periods.json", periods);

    const json metrics = {{"events", ingest.events.size()},
                          {"rejects", ingest.rejects.size()},
                          {"actors_with_attributes", attributes.size()},
                          {"periods", periods.size()}};
    write_stage_manifest(config, "ingest", {dir / "events.jsonl", dir / "rejects.csv",
                                            dir / "attributes.csv", dir / "periods.json"},
                         metrics);
}

void run_indicators(const RunConfig& config) {
    const fs::path in_dir = config.out / "ingest";
    if (!fs::exists(in_dir / "events.jsonl") || !fs::exists(in_dir / "periods.json")) {
        throw MissingArtifactError("ingest", "ingest outputs not found: run the ingest stage first");
    }
    const IngestResult loaded = parse_jsonl(in_dir / "events.jsonl");
    if (!loaded.rejects.empty()) throw DataError("ingest output re-read produced rejects");
    const std::vector<EmailEvent>& events = loaded.events;
    const std::vector<Period> periods = read_periods_json(in_dir / "periods.json");
    std::map<ActorId, ActorAttributes> attributes;
    if (fs::exists(in_dir / "attributes.csv")) {
        attributes = load_attributes(in_dir / "attributes.csv");
    }

    const Lexicon lexicon = load_lexicon(config.lexicon_path);
    const ReplyResolution replies = resolve_replies(events, config.reply_horizon);

    struct PeriodBlock {
        std::map<ActorId, double> bet, clo;
        std::map<ActorId, int> deg;
        std::map<ActorId, ContributionRow> contrib;
        std::map<ActorId, DynamicsRow> dyn;
        std::map<ActorId, ContentRow> content;
    };
    std::vector<PeriodBlock> blocks;
    std::set<ActorId> universe;
    for (const Period& period : periods) {
        PeriodBlock block;
        const CommGraph graph(events, period);
        block.bet = betweenness(graph);
        block.clo = closeness(graph);
        block.deg = degree(graph);
        block.contrib = contribution(events, period);
        block.dyn = dynamics_rows(events, replies, period, config.weekly_window);
        block.content = content_indicators(events, period, lexicon, config.influence_window);
        for (const auto& node : graph.nodes()) universe.insert(node);
        blocks.push_back(std::move(block));
    }
    for (const auto& [actor, row] : attributes) universe.insert(actor);

    const std::vector<ActorDocument> documents =
        actor_documents(events, periods, config.top_words_k);
    const TopicModel topic_model = fit_lda(documents, config.lda_topics, config.lda_alpha,
                                           config.lda_beta, config.lda_iterations, config.seed);
    const auto topics = topic_features(topic_model, documents);

    const fs::path dir = config.out / "indicators";
    fs::create_directories(dir);

    CsvTable centrality;
    centrality.header = {"actor",         "period",        "betweenness",
                         "closeness",     "degree",        "messages_sent",
                         "messages_received", "contribution_index"};
    CsvTable dynamics;
    dynamics.header = {"actor",       "period",      "bet_osc",       "ego_nudges",
                       "alter_nudges", "ego_art_hours", "alter_art_hours"};
    CsvTable content;
    content.header = {"actor", "period", "sentiment", "emotionality", "complexity", "influence"};

    CsvTable panel;
    panel.header = {"actor",          "period",        "betweenness",        "closeness",
                    "degree",         "bet_osc",       "messages_sent",      "messages_received",
                    "contribution_index", "ego_nudges", "alter_nudges",      "ego_art_hours",
                    "alter_art_hours", "sentiment",    "emotionality",       "complexity",
                    "influence"};
    for (std::size_t topic = 1; topic <= topic_model.k; ++topic) {
        panel.header.push_back("topic_" + std::to_string(topic));
    }
    panel.header.insert(panel.header.end(),
                        {"topics_missing", "age", "band", "tenure", "tslp", "label"});

    for (const ActorId& actor : universe) {
        for (std::size_t t = 0; t < periods.size(); ++t) {
            const PeriodBlock& block = blocks[t];
            const std::string period_label = std::to_string(t + 1);
            const auto bet = block.bet.find(actor);
            const bool in_graph = bet != block.bet.end();

            std::vector<std::string> prow{actor, period_label};
            if (in_graph) {
                const auto& contrib = block.contrib.at(actor);
                centrality.rows.push_back({actor, period_label, format_double(bet->second),
                                           format_double(block.clo.at(actor)),
                                           std::to_string(block.deg.at(actor)),
                                           std::to_string(contrib.messages_sent),
                                           std::to_string(contrib.messages_received),
                                           cell(contrib.contribution_index)});
                prow.push_back(format_double(bet->second));
                prow.push_back(format_double(block.clo.at(actor)));
                prow.push_back(std::to_string(block.deg.at(actor)));
            } else {
                prow.insert(prow.end(), {"", "", ""});
            }

            const auto dyn = block.dyn.find(actor);
            if (dyn != block.dyn.end()) {
                const DynamicsRow& d = dyn->second;
                const auto hours = [](const std::optional<double>& seconds) {
                    return seconds ? std::optional<double>(*seconds / 3600.0) : std::nullopt;
                };
                dynamics.rows.push_back({actor, period_label, cell_int(d.bet_osc),
                                         cell(d.ego_nudges), cell(d.alter_nudges),
                                         cell(hours(d.ego_art)), cell(hours(d.alter_art))});
                prow.push_back(cell_int(d.bet_osc));
            } else {
                prow.push_back("");
            }

            if (in_graph) {
                const auto& contrib = block.contrib.at(actor);
                prow.push_back(std::to_string(contrib.messages_sent));
                prow.push_back(std::to_string(contrib.messages_received));
                prow.push_back(cell(contrib.contribution_index));
            } else {
                prow.insert(prow.end(), {"", "", ""});
            }
            if (dyn != block.dyn.end()) {
                const DynamicsRow& d = dyn->second;
                prow.push_back(cell(d.ego_nudges));
                prow.push_back(cell(d.alter_nudges));
                prow.push_back(cell(d.ego_art ? std::optional<double>(*d.ego_art / 3600.0)
                                              : std::nullopt));
                prow.push_back(cell(d.alter_art ? std::optional<double>(*d.alter_art / 3600.0)
                                                : std::nullopt));
            } else {
                prow.insert(prow.end(), {"", "", "", ""});
            }

            const auto con = block.content.find(actor);
            if (con != block.content.end()) {
                const ContentRow& c = con->second;
                content.rows.push_back({actor, period_label, cell(c.sentiment),
                                        cell(c.emotionality), cell(c.complexity),
                                        cell(c.influence)});
                prow.push_back(cell(c.sentiment));
                prow.push_back(cell(c.emotionality));
                prow.push_back(cell(c.complexity));
                prow.push_back(cell(c.influence));
            } else {
                prow.insert(prow.end(), {"", "", "", ""});
            }

            const auto topic = topics.find({actor, t});
            if (topic != topics.end()) {
                for (double share : topic->second) prow.push_back(format_double(share));
                prow.push_back("0");
            } else {
                for (std::size_t i = 0; i < topic_model.k; ++i) {
                    prow.push_back(format_double(1.0 / static_cast<double>(topic_model.k)));
                }
                prow.push_back("1");
            }

            const auto attr = attributes.find(actor);
            if (attr != attributes.end()) {
                const ActorAttributes& a = attr->second;
                prow.push_back(format_double(a.age));
                prow.push_back(std::to_string(a.band));
                prow.push_back(format_double(a.tenure));
                prow.push_back(format_double(a.tslp));
                const bool has_label = t < a.labels.size() && a.labels[t].has_value();
                prow.push_back(has_label ? std::to_string(*a.labels[t]) : "");
            } else {
                prow.insert(prow.end(), {"", "", "", "", ""});
            }
            panel.rows.push_back(std::move(prow));
        }
    }

    write_csv(dir / "centrality.csv", centrality);
    write_csv(dir / "dynamics.csv", dynamics);
    write_csv(dir / "content.csv", content);
    write_topic_model(dir / "topics.json", topic_model, documents);
    write_csv(dir / "indicators.csv", panel);

    const json metrics = {{"actors", universe.size()},
                          {"periods", periods.size()},
                          {"events", events.size()},
                          {"panel_rows", panel.rows.size()},
                          {"topic_documents", documents.size()}};
    write_stage_manifest(config, "indicators",
                         {dir / "centrality.csv", dir / "dynamics.csv", dir / "content.csv",
                          dir / "topics.json", dir / "indicators.csv"},
                         metrics);
}

void run_train(const RunConfig& config) {
    const fs::path panel_path = config.out / "indicators" / "indicators.csv";
    if (!fs::exists(panel_path)) {
        throw MissingArtifactError("indicators",
                                   "indicator panel not found: run the indicators stage first");
    }
    const Panel panel = load_panel(panel_path);
    const DesignMatrix design = assemble(panel.rows, panel.feature_order);
    if (design.x.empty()) throw DataError("no labeled rows to train on");
    const ModelSpec spec = spec_from_config(config);
    const FittedModel model = fit_model(design, spec);

    const fs::path dir = config.out / "train";
    fs::create_directories(dir);
    write_text(dir / "model.json", model_to_json(model, design).dump(2) + "\n");

    json metrics = {{"rows", design.x.size()},
                    {"features", design.feature_names.size()},
                    {"dropped", design.dropped.size()}};
    if (spec.kind == "adaboost") {
        metrics["rounds_used"] = model.boost.learners.size();
    } else {
        metrics["pseudo_r2"] = model.pls.pseudo_r2;
        metrics["aic"] = model.pls.aic;
    }
    write_stage_manifest(config, "train", {dir / "model.json"}, metrics);
}

void run_evaluate(const RunConfig& config) {
    const fs::path model_path = config.out / "train" / "model.json";
    if (!fs::exists(model_path)) {
        throw MissingArtifactError("train", "model not found: run the train stage first");
    }
    const fs::path panel_path = config.out / "indicators" / "indicators.csv";
    if (!fs::exists(panel_path)) {
        throw MissingArtifactError("indicators",
                                   "indicator panel not found: run the indicators stage first");
    }
    const ModelSpec spec = spec_from_model_json(read_json_file(model_path));
    const Panel panel = load_panel(panel_path);
    const DesignMatrix design = assemble(panel.rows, panel.feature_order);
    const EvalReport report = evaluate_loocv(design, spec);

    const fs::path dir = config.out / "evaluate";
    fs::create_directories(dir);

    json ej = {{"rows", design.x.size()},
               {"accuracy", report.accuracy},
               {"kappa", report.kappa},
               {"sensitivity", report.sensitivity},
               {"specificity", report.specificity},
               {"auc", report.auc},
               {"skipped_folds", report.skipped_folds},
               {"threshold", spec.threshold}};
    write_text(dir / "eval.json", ej.dump(2) + "\n");

    CsvTable roc;
    roc.header = {"threshold", "fpr", "tpr"};
    for (const RocPoint& point : report.roc) {
        roc.rows.push_back(
            {format_double(point.threshold), format_double(point.fpr), format_double(point.tpr)});
    }
    write_csv(dir / "roc.csv", roc);

    std::set<std::size_t> distinct(design.period.begin(), design.period.end());
    json lr;
    if (distinct.size() >= 2) {
        const PeriodTest test = likelihood_ratio_period_test(design, spec.components);
        lr = {{"statistic", test.statistic},
              {"p_value", test.converged ? json(test.p_value) : json()},
              {"converged", test.converged}};
    } else {
        lr = {{"skipped", "only one period present"}};
    }
    write_text(dir / "lr_test.json", lr.dump(2) + "\n");

    json metrics = ej;
    write_stage_manifest(config, "evaluate", {dir / "eval.json", dir / "roc.csv",
                                              dir / "lr_test.json"},
                         metrics);
}

void run_cluster(const RunConfig& config) {
    const fs::path panel_path = config.out / "indicators" / "indicators.csv";
    if (!fs::exists(panel_path)) {
        throw MissingArtifactError("indicators",
                                   "indicator panel not found: run the indicators stage first");
    }
    const CsvTable table = read_csv(panel_path);
    const std::vector<std::string> email_features = {
        "betweenness",   "closeness",    "degree",        "bet_osc",
        "messages_sent", "messages_received", "contribution_index", "ego_nudges",
        "alter_nudges",  "ego_art_hours", "alter_art_hours", "sentiment",
        "emotionality",  "complexity",   "influence"};
    const std::size_t actor_col = table.column("actor");
    const std::size_t period_col = table.column("period");
    const std::size_t label_col = table.column("label");

    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i][label_col] == "1") selected.push_back(i);
    }
    if (selected.size() < 2) throw DataError("need at least two rows labeled 1 to cluster");

    std::vector<std::string> kept;
    std::vector<std::string> dropped;
    Matrix x(selected.size());
    for (const auto& name : email_features) {
        const std::size_t col = table.column(name);
        std::vector<std::optional<double>> raw(selected.size());
        std::vector<double> non_missing;
        for (std::size_t i = 0; i < selected.size(); ++i) {
            const std::string& text = table.rows[selected[i]][col];
            if (!text.empty()) {
                raw[i] = parse_number(text, "column " + name);
                non_missing.push_back(*raw[i]);
            }
        }
        if (non_missing.empty() || sample_sd(non_missing) < 1e-12) {
            dropped.push_back(name);
            continue;
        }
        const double med = median(non_missing);
        kept.push_back(name);
        for (std::size_t i = 0; i < selected.size(); ++i) {
            x[i].push_back(raw[i] ? *raw[i] : med);
        }
    }
    if (kept.empty()) throw DataError("no usable indicator columns to cluster on");
    standardize_columns(x);

    const std::size_t k_max = std::min<std::size_t>(config.elbow_max_k, x.size());
    const ElbowResult elbow = elbow_sweep(x, 1, k_max, config.kmeans_restarts, config.seed);
    const std::size_t chosen = config.clusters > 0 ? config.clusters : elbow.suggested_k;
    if (chosen > x.size()) throw ConfigError("more clusters requested than rows available");

    const ClusterResult km = kmeans(x, chosen, config.kmeans_restarts, config.seed);
    const GmmResult gmm = gmm_em(x, chosen, config.seed);
    const std::vector<std::size_t> gmm_hard = gmm.hard_assignments();
    const double agreement = clustering_kappa(km.assignments, gmm_hard);
    const std::size_t dims = std::min<std::size_t>(2, kept.size());
    const PcaProjection pca = pca_project(x, dims);

    const fs::path dir = config.out / "cluster";
    fs::create_directories(dir);

    CsvTable elbow_csv;
    elbow_csv.header = {"k", "inertia"};
    for (std::size_t i = 0; i < elbow.ks.size(); ++i) {
        elbow_csv.rows.push_back(
            {std::to_string(elbow.ks[i]), format_double(elbow.inertias[i])});
    }
    write_csv(dir / "elbow.csv", elbow_csv);

    CsvTable assignments;
    assignments.header = {"actor", "period", "cluster_kmeans", "cluster_gmm"};
    for (std::size_t i = 0; i < selected.size(); ++i) {
        assignments.rows.push_back({table.rows[selected[i]][actor_col],
                                    table.rows[selected[i]][period_col],
                                    std::to_string(km.assignments[i]),
                                    std::to_string(gmm_hard[i])});
    }
    write_csv(dir / "assignments.csv", assignments);

    write_csv(dir / "centers_sd.csv", profile_report(km, kept));

    CsvTable pca_csv;
    pca_csv.header = {"actor", "period"};
    for (std::size_t d = 0; d < dims; ++d) pca_csv.header.push_back("pc" + std::to_string(d + 1));
    pca_csv.header.push_back("cluster");
    for (std::size_t i = 0; i < selected.size(); ++i) {
        std::vector<std::string> row{table.rows[selected[i]][actor_col],
                                     table.rows[selected[i]][period_col]};
        for (std::size_t d = 0; d < dims; ++d) row.push_back(format_double(pca.coords[i][d]));
        row.push_back(std::to_string(km.assignments[i]));
        pca_csv.rows.push_back(std::move(row));
    }
    write_csv(dir / "pca.csv", pca_csv);

    const json summary = {{"rows", selected.size()},
                          {"k", chosen},
                          {"suggested_k", elbow.suggested_k},
                          {"low_confidence", elbow.low_confidence},
                          {"kmeans_inertia", km.inertia},
                          {"kmeans_vs_gmm_kappa", agreement},
                          {"explained_variance_ratio", pca.explained_variance_ratio},
                          {"covariance_floored", gmm.covariance_floored},
                          {"features", kept},
                          {"dropped", dropped}};
    write_text(dir / "cluster_summary.json", summary.dump(2) + "\n");

    write_stage_manifest(config, "cluster",
                         {dir / "elbow.csv", dir / "assignments.csv", dir / "centers_sd.csv",
                          dir / "pca.csv", dir / "cluster_summary.json"},
                         summary);
}

void run_report(const RunConfig& config) {
    const fs::path mdir = config.out / "manifest.d";
    std::vector<fs::path> stage_files;
    if (fs::exists(mdir)) {
        for (const auto& entry : fs::directory_iterator(mdir)) {
            if (entry.path().extension() == ".json") stage_files.push_back(entry.path());
        }
    }
    std::sort(stage_files.begin(), stage_files.end());
    if (stage_files.empty()) {
        const std::string first = config.events_path.empty() ? "synth" : "ingest";
        throw MissingArtifactError(first, "no stage has produced outputs yet");
    }

    json stages = json::array();
    json headline;
    for (const auto& file : stage_files) {
        const json stage = read_json_file(file);
        stages.push_back(stage);
        if (!stage.contains("stage") || !stage.contains("metrics")) continue;
        const std::string name = stage["stage"].get<std::string>();
        const json& metrics = stage["metrics"];
        if (name == "ingest") {
            if (metrics.contains("events")) headline["events"] = metrics["events"];
            if (metrics.contains("rejects")) headline["rejects"] = metrics["rejects"];
        } else if (name == "indicators") {
            if (metrics.contains("panel_rows")) headline["panel_rows"] = metrics["panel_rows"];
        } else if (name == "evaluate") {
            if (metrics.contains("accuracy")) headline["accuracy"] = metrics["accuracy"];
            if (metrics.contains("auc")) headline["auc"] = metrics["auc"];
        } else if (name == "cluster") {
            if (metrics.contains("k")) headline["clusters"] = metrics["k"];
            if (metrics.contains("kmeans_vs_gmm_kappa"))
                headline["kmeans_vs_gmm_kappa"] = metrics["kmeans_vs_gmm_kappa"];
        }
    }

    json manifest = {{"version", kVersion},
                     {"config_hash", config_hash(config)},
                     {"stages", stages},
                     {"headline", headline}};
    write_text(config.out / "manifest.json", manifest.dump(2) + "\n");
}

void run_all(const RunConfig& config) {
    if (config.events_path.empty()) run_synth(config);
    run_ingest(config);
    run_indicators(config);
    run_train(config);
    run_evaluate(config);
    run_cluster(config);
    run_report(config);
}

}  // namespace mailsig
