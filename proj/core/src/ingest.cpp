#include "mailsig/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mailsig/content.hpp"
#include "mailsig/csv.hpp"
#include "mailsig/errors.hpp"
#include "mailsig/hash.hpp"
#include "mailsig/stats.hpp"

namespace mailsig {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// --- RFC 2822 dates -------------------------------------------------------

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// days_from_civil).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::optional<int> month_number(const std::string& name) {
    static const char* names[12] = {"jan", "feb", "mar", "apr", "may", "jun",
                                    "jul", "aug", "sep", "oct", "nov", "dec"};
    const std::string key = lower(name).substr(0, 3);
    for (int i = 0; i < 12; ++i)
        if (key == names[i]) return i + 1;
    return std::nullopt;
}

std::optional<int> zone_offset_minutes(const std::string& zone) {
    if (zone.empty()) return std::nullopt;
    if ((zone[0] == '+' || zone[0] == '-') && zone.size() == 5) {
        for (std::size_t i = 1; i < 5; ++i)
            if (!std::isdigit(static_cast<unsigned char>(zone[i]))) return std::nullopt;
        const int hours = (zone[1] - '0') * 10 + (zone[2] - '0');
        const int minutes = (zone[3] - '0') * 10 + (zone[4] - '0');
        const int total = hours * 60 + minutes;
        return zone[0] == '-' ? -total : total;
    }
    static const std::map<std::string, int> named = {
        {"ut", 0},    {"gmt", 0},   {"utc", 0},  {"z", 0},    {"est", -300}, {"edt", -240},
        {"cst", -360}, {"cdt", -300}, {"mst", -420}, {"mdt", -360}, {"pst", -480}, {"pdt", -420}};
    auto it = named.find(lower(zone));
    if (it == named.end()) return std::nullopt;
    return it->second;
}

std::optional<std::int64_t> parse_rfc2822_date(const std::string& raw) {
    std::string s = trim(raw);
    // Optional leading day-of-week ("Mon, ").
    if (auto comma = s.find(','); comma != std::string::npos && comma <= 10) {
        s = trim(s.substr(comma + 1));
    }
    std::istringstream in(s);
    int day = 0, year = 0;
    std::string month_name, clock, zone;
    if (!(in >> day >> month_name >> year >> clock)) return std::nullopt;
    in >> zone;  // may be absent
    auto month = month_number(month_name);
    if (!month || day < 1 || day > 31) return std::nullopt;
    if (year < 100) year += year < 50 ? 2000 : 1900;

    int hh = 0, mm = 0, ss = 0;
    char c1 = 0, c2 = 0;
    std::istringstream clk(clock);
    if (!(clk >> hh >> c1 >> mm) || c1 != ':') return std::nullopt;
    if (clk >> c2 >> ss) {
        if (c2 != ':') return std::nullopt;
    } else {
        ss = 0;
    }
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60) return std::nullopt;

    int offset_minutes = 0;
    if (!zone.empty()) {
        auto offset = zone_offset_minutes(zone);
        if (!offset) return std::nullopt;
        offset_minutes = *offset;
    }
    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(*month),
                                              static_cast<unsigned>(day));
    return days * 86400 + hh * 3600 + mm * 60 + ss - std::int64_t(offset_minutes) * 60;
}

// --- address fields ---------------------------------------------------------

std::optional<std::string> extract_address(const std::string& field) {
    const auto lt = field.find('<');
    if (lt != std::string::npos) {
        const auto gt = field.find('>', lt);
        if (gt == std::string::npos) return std::nullopt;
        std::string addr = lower(trim(field.substr(lt + 1, gt - lt - 1)));
        return addr.empty() ? std::nullopt : std::optional(addr);
    }
    // Bare address, possibly with a trailing "(Name)" comment.
    std::string cleaned = field;
    if (auto paren = cleaned.find('('); paren != std::string::npos) cleaned = cleaned.substr(0, paren);
    cleaned = trim(cleaned);
    if (cleaned.find('@') == std::string::npos) return std::nullopt;
    return lower(cleaned);
}

// Split an address list on commas outside quotes/angle brackets.
std::vector<std::string> extract_addresses(const std::string& field) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    int angle = 0;
    auto flush = [&] {
        if (auto addr = extract_address(cur)) out.push_back(*addr);
        cur.clear();
    };
    for (char c : field) {
        if (c == '"') quoted = !quoted;
        if (!quoted) {
            if (c == '<') ++angle;
            if (c == '>') angle = std::max(0, angle - 1);
            if (c == ',' && angle == 0) {
                flush();
                continue;
            }
        }
        cur.push_back(c);
    }
    flush();
    return out;
}

std::optional<std::string> extract_message_id(const std::string& field) {
    const auto lt = field.find('<');
    if (lt == std::string::npos) {
        std::string id = trim(field);
        return id.empty() ? std::nullopt : std::optional(id);
    }
    const auto gt = field.find('>', lt);
    if (gt == std::string::npos) return std::nullopt;
    std::string id = trim(field.substr(lt + 1, gt - lt - 1));
    return id.empty() ? std::nullopt : std::optional(id);
}

struct RawMessage {
    std::size_t line = 0;  // line of the From_ separator
    std::map<std::string, std::string> headers;  // lowercase name -> unfolded value
    std::string body;
    std::string raw;  // full text, for synthetic ids
};

std::vector<RawMessage> split_mbox(std::istream& in) {
    std::vector<RawMessage> messages;
    RawMessage current;
    bool in_message = false, in_headers = false;
    std::string line, last_header;
    std::size_t line_no = 0;

    auto commit = [&] {
        if (in_message) messages.push_back(std::move(current));
        current = RawMessage{};
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("From ", 0) == 0) {
            commit();
            in_message = true;
            in_headers = true;
            last_header.clear();
            current.line = line_no;
            current.raw = line + '\n';
            continue;
        }
        if (!in_message) continue;  // junk before the first From_
        current.raw += line;
        current.raw += '\n';
        if (in_headers) {
            if (line.empty()) {
                in_headers = false;
                continue;
            }
            if ((line[0] == ' ' || line[0] == '\t') && !last_header.empty()) {
                current.headers[last_header] += ' ' + trim(line);
                continue;
            }
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;  // tolerate stray header junk
            last_header = lower(line.substr(0, colon));
            const std::string value = trim(line.substr(colon + 1));
            if (current.headers.contains(last_header)) {
                current.headers[last_header] += ", " + value;
            } else {
                current.headers[last_header] = value;
            }
        } else {
            // Reverse mboxrd quoting.
            std::string body_line = line;
            if (std::size_t i = body_line.find_first_not_of('>');
                i != std::string::npos && i > 0 && body_line.compare(i, 5, "From ") == 0) {
                body_line.erase(0, 1);
            }
            current.body += body_line;
            current.body += '\n';
        }
    }
    commit();
    return messages;
}

void finalize(IngestResult& result) {
    std::sort(result.events.begin(), result.events.end(), event_order);
}

}  // namespace

IngestResult parse_mbox(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open mbox " + path.string());

    IngestResult result;
    std::set<std::string> seen_ids;
    for (auto& message : split_mbox(in)) {
        auto reject = [&](const std::string& reason) {
            result.rejects.push_back({message.line, reason});
        };

        auto from_it = message.headers.find("from");
        auto date_it = message.headers.find("date");
        if (from_it == message.headers.end()) {
            reject("missing From header");
            continue;
        }
        auto sender = extract_address(from_it->second);
        if (!sender) {
            reject("unparseable From address");
            continue;
        }
        if (date_it == message.headers.end()) {
            reject("missing Date header");
            continue;
        }
        auto timestamp = parse_rfc2822_date(date_it->second);
        if (!timestamp) {
            reject("unparseable Date");
            continue;
        }
        if (*timestamp < 0) {
            reject("negative timestamp");
            continue;
        }

        std::vector<std::string> recipients;
        for (const char* name : {"to", "cc"}) {
            if (auto it = message.headers.find(name); it != message.headers.end()) {
                for (auto& addr : extract_addresses(it->second)) recipients.push_back(addr);
            }
        }
        if (recipients.empty()) {
            reject("no recipients");
            continue;
        }
        const bool sole_self = recipients.size() == 1 && recipients.front() == *sender;
        if (sole_self) {
            reject("self-loop");
            continue;
        }
        std::vector<std::string> deduped;
        for (auto& addr : recipients) {
            if (addr == *sender) continue;
            if (std::find(deduped.begin(), deduped.end(), addr) == deduped.end())
                deduped.push_back(addr);
        }
        if (deduped.empty()) {
            reject("no recipients");
            continue;
        }

        std::string message_id;
        if (auto it = message.headers.find("message-id"); it != message.headers.end()) {
            if (auto id = extract_message_id(it->second)) message_id = *id;
        }
        if (message_id.empty()) {
            message_id = "synthetic-" + sha256_hex(message.raw).substr(0, 16);
        }
        if (!seen_ids.insert(message_id).second) {
            reject("duplicate message id");
            continue;
        }

        std::optional<std::string> in_reply_to;
        if (auto it = message.headers.find("in-reply-to"); it != message.headers.end()) {
            in_reply_to = extract_message_id(it->second);
        }
        if (!in_reply_to) {
            if (auto it = message.headers.find("references"); it != message.headers.end()) {
                in_reply_to = extract_message_id(it->second);  // first referenced id
            }
        }

        EmailEvent event;
        event.message_id = std::move(message_id);
        event.timestamp = *timestamp;
        event.in_reply_to = std::move(in_reply_to);
        event.tokens = tokenize(message.body, options.stopwords);
        if (options.anonymize) {
            event.sender = salted_id(options.salt, *sender);
            for (auto& addr : deduped)
                event.recipients.push_back(salted_id(options.salt, addr));
        } else {
            event.sender = *sender;
            event.recipients = std::move(deduped);
        }
        result.events.push_back(std::move(event));
    }
    finalize(result);
    return result;
}

IngestResult parse_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());

    IngestResult result;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto reject = [&](const std::string& reason) {
            result.rejects.push_back({line_no, reason});
        };

        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            reject("invalid json");
            continue;
        }
        auto missing = [&](const char* field) { reject(std::string("missing field: ") + field); };

        if (!record.contains("message_id") || !record["message_id"].is_string()) {
            missing("message_id");
            continue;
        }
        if (!record.contains("sender") || !record["sender"].is_string() ||
            record["sender"].get<std::string>().empty()) {
            missing("sender");
            continue;
        }
        if (!record.contains("recipients") || !record["recipients"].is_array()) {
            missing("recipients");
            continue;
        }
        if (!record.contains("timestamp") || !record["timestamp"].is_number()) {
            missing("timestamp");
            continue;
        }

        EmailEvent event;
        event.message_id = record["message_id"].get<std::string>();
        event.sender = record["sender"].get<std::string>();
        const double ts = record["timestamp"].get<double>();
        if (!std::isfinite(ts) || ts < 0) {
            reject("invalid timestamp");
            continue;
        }
        event.timestamp = record["timestamp"].is_number_integer()
                              ? record["timestamp"].get<std::int64_t>()
                              : static_cast<std::int64_t>(std::llround(ts));

        bool bad_recipient = false;
        for (const auto& r : record["recipients"]) {
            if (!r.is_string() || r.get<std::string>().empty()) {
                bad_recipient = true;
                break;
            }
            const auto addr = r.get<std::string>();
            if (addr == event.sender) continue;
            if (std::find(event.recipients.begin(), event.recipients.end(), addr) ==
                event.recipients.end())
                event.recipients.push_back(addr);
        }
        if (bad_recipient) {
            reject("invalid recipient entry");
            continue;
        }
        if (event.recipients.empty()) {
            const auto& raw = record["recipients"];
            reject(raw.empty() ? "no recipients" : "self-loop");
            continue;
        }
        if (record.contains("in_reply_to") && record["in_reply_to"].is_string()) {
            event.in_reply_to = record["in_reply_to"].get<std::string>();
        }
        if (record.contains("tokens")) {
            if (!record["tokens"].is_array()) {
                reject("invalid tokens");
                continue;
            }
            bool bad_token = false;
            for (const auto& t : record["tokens"]) {
                if (!t.is_string()) {
                    bad_token = true;
                    break;
                }
                event.tokens.push_back(t.get<std::string>());
            }
            if (bad_token) {
                reject("invalid tokens");
                continue;
            }
        }
        if (event.message_id.empty()) {
            missing("message_id");
            continue;
        }
        if (!seen_ids.insert(event.message_id).second) {
            reject("duplicate message id");
            continue;
        }
        result.events.push_back(std::move(event));
    }
    finalize(result);
    return result;
}

ReplyResolution resolve_replies(std::span<const EmailEvent> events, std::int64_t horizon_seconds) {
    ReplyResolution resolution;
    std::map<std::string, const EmailEvent*> by_id;
    for (const auto& event : events) by_id[event.message_id] = &event;

    auto link = [&](const std::string& prompt, const std::string& reply) {
        resolution.replies_of[prompt].push_back(reply);
        resolution.prompts_of[reply].push_back(prompt);
    };

    // Unanswered prompts per ordered (sender, recipient) pair, oldest first.
    struct Pending {
        std::int64_t timestamp;
        std::string id;
    };
    std::map<std::pair<ActorId, ActorId>, std::deque<Pending>> pending;

    for (const auto& event : events) {
        if (event.in_reply_to) {
            auto it = by_id.find(*event.in_reply_to);
            if (it != by_id.end() && event.timestamp > it->second->timestamp) {
                link(it->second->message_id, event.message_id);
                // The answered prompt stops waiting for a fallback match.
                auto queue = pending.find({it->second->sender, event.sender});
                if (queue != pending.end()) {
                    auto& q = queue->second;
                    for (auto qit = q.begin(); qit != q.end(); ++qit) {
                        if (qit->id == it->second->message_id) {
                            q.erase(qit);
                            break;
                        }
                    }
                }
            }
        } else {
            // Fallback: this message answers the earliest unanswered prompt of
            // every counter-directional pair within the horizon.
            for (const auto& recipient : event.recipients) {
                auto queue = pending.find({recipient, event.sender});
                if (queue == pending.end()) continue;
                auto& q = queue->second;
                while (!q.empty() && event.timestamp - q.front().timestamp > horizon_seconds)
                    q.pop_front();
                if (!q.empty() && q.front().timestamp < event.timestamp) {
                    link(q.front().id, event.message_id);
                    q.pop_front();
                }
            }
        }
        for (const auto& recipient : event.recipients) {
            pending[{event.sender, recipient}].push_back({event.timestamp, event.message_id});
        }
    }
    return resolution;
}

std::map<ActorId, ActorAttributes> load_attributes(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    const std::vector<std::string> fixed = {"actor", "age", "band", "tenure", "tslp"};
    if (table.header.size() < fixed.size()) {
        throw DataError(path.string() + ": header must start with actor,age,band,tenure,tslp");
    }
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        if (table.header[i] != fixed[i]) {
            throw DataError(path.string() + ": header must start with actor,age,band,tenure,tslp");
        }
    }
    for (std::size_t i = fixed.size(); i < table.header.size(); ++i) {
        if (table.header[i].rfind("label", 0) != 0) {
            throw DataError(path.string() + ": unexpected column " + table.header[i]);
        }
    }
    const std::size_t label_count = table.header.size() - fixed.size();

    std::map<ActorId, ActorAttributes> attributes;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string row_tag = path.string() + ": row " + std::to_string(r + 2);
        ActorAttributes attr;
        attr.actor = row[0];
        if (attr.actor.empty()) throw DataError(row_tag + ": empty actor id");
        auto number = [&](std::size_t col) {
            try {
                std::size_t used = 0;
                const double v = std::stod(row[col], &used);
                if (used != row[col].size()) throw std::invalid_argument("trailing junk");
                return v;
            } catch (const std::exception&) {
                throw DataError(row_tag + ": non-numeric " + table.header[col]);
            }
        };
        attr.age = number(1);
        const double band = number(2);
        if (band != 0 && band != 1) throw DataError(row_tag + ": band must be 0 or 1");
        attr.band = static_cast<int>(band);
        attr.tenure = number(3);
        attr.tslp = number(4);
        if (attr.age <= 0 || attr.tenure < 0 || attr.tslp < 0) {
            throw DataError(row_tag + ": attribute out of range");
        }
        for (std::size_t l = 0; l < label_count; ++l) {
            const std::string& cell = row[fixed.size() + l];
            if (cell.empty()) {
                attr.labels.emplace_back(std::nullopt);
            } else if (cell == "0" || cell == "1") {
                attr.labels.emplace_back(cell == "1" ? 1 : 0);
            } else {
                throw DataError(row_tag + ": label must be 0, 1 or empty");
            }
        }
        if (!attributes.emplace(attr.actor, attr).second) {
            throw DataError(row_tag + ": duplicate actor " + attr.actor);
        }
    }
    return attributes;
}

void write_events_jsonl(const std::filesystem::path& path, std::span<const EmailEvent> events) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& event : events) {
        nlohmann::ordered_json record;
        record["message_id"] = event.message_id;
        record["sender"] = event.sender;
        record["recipients"] = event.recipients;
        record["timestamp"] = event.timestamp;
        if (event.in_reply_to) {
            record["in_reply_to"] = *event.in_reply_to;
        } else {
            record["in_reply_to"] = nullptr;
        }
        record["tokens"] = event.tokens;
        out << record.dump() << '\n';
    }
}

void write_rejects_csv(const std::filesystem::path& path,
                       const std::vector<RejectedMessage>& rejects) {
    CsvTable table;
    table.header = {"line", "reason"};
    for (const auto& reject : rejects) {
        table.rows.push_back({std::to_string(reject.line), reject.reason});
    }
    write_csv(path, table);
}

void write_attributes_csv(const std::filesystem::path& path,
                          const std::map<ActorId, ActorAttributes>& attributes) {
    std::size_t label_count = 0;
    for (const auto& [actor, attr] : attributes)
        label_count = std::max(label_count, attr.labels.size());
    CsvTable table;
    table.header = {"actor", "age", "band", "tenure", "tslp"};
    for (std::size_t l = 0; l < label_count; ++l)
        table.header.push_back("label_p" + std::to_string(l + 1));
    for (const auto& [actor, attr] : attributes) {
        std::vector<std::string> row = {actor, format_double(attr.age), std::to_string(attr.band),
                                        format_double(attr.tenure), format_double(attr.tslp)};
        for (std::size_t l = 0; l < label_count; ++l) {
            if (l < attr.labels.size() && attr.labels[l]) {
                row.push_back(std::to_string(*attr.labels[l]));
            } else {
                row.emplace_back();
            }
        }
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

}  // namespace mailsig
