#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mailsig/types.hpp"

namespace mailsig {

struct RejectedMessage {
    std::size_t line = 0;  // 1-based line where the offending record starts
    std::string reason;
};

struct IngestResult {
    std::vector<EmailEvent> events;  // sorted by event_order
    std::vector<RejectedMessage> rejects;
};

struct IngestOptions {
    bool anonymize = true;
    std::string salt = "mailsig";
    std::set<std::string> stopwords;  // applied when tokenizing mbox bodies
};

/// RFC-4155 mbox reader. Malformed messages are skipped and recorded in
/// `rejects`; unreadable files throw DataError.
IngestResult parse_mbox(const std::filesystem::path& path, const IngestOptions& options = {});

/// Newline-delimited JSON event reader (message_id, sender, recipients,
/// timestamp, in_reply_to?, tokens?). Invalid records are rejected with
/// their line number.
IngestResult parse_jsonl(const std::filesystem::path& path);

/// Reply links between messages. A reply answers exactly one prompt per
/// ordered sender pair; one multi-recipient message may answer prompts of
/// several pairs.
struct ReplyResolution {
    std::map<std::string, std::vector<std::string>> replies_of;  // prompt id -> reply ids
    std::map<std::string, std::vector<std::string>> prompts_of;  // reply id -> prompt ids
};

/// Header matching (in_reply_to) first; messages without a header fall back
/// to time-window matching: the earliest unanswered counter-directional
/// message within `horizon_seconds`.
ReplyResolution resolve_replies(std::span<const EmailEvent> events,
                                std::int64_t horizon_seconds = 4 * 86400);

/// CSV with header actor,age,band,tenure,tslp,label_p1,...  Duplicate actor
/// ids and non-numeric fields are fatal. An empty label cell means missing.
std::map<ActorId, ActorAttributes> load_attributes(const std::filesystem::path& path);

void write_events_jsonl(const std::filesystem::path& path, std::span<const EmailEvent> events);
void write_rejects_csv(const std::filesystem::path& path,
                       const std::vector<RejectedMessage>& rejects);
void write_attributes_csv(const std::filesystem::path& path,
                          const std::map<ActorId, ActorAttributes>& attributes);

}  // namespace mailsig
