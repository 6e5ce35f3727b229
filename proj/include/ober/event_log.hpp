#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ober/errors.hpp"

namespace ober {

enum class EventKind { impression, click, attempt };

const char* to_string(EventKind kind);
EventKind event_kind_from(const std::string& label);

// One learner-item interaction. `result` is present exactly for attempts and
// lives in [0,1]; pass/fail sources encode as 1/0 before logging.
struct InteractionEvent {
  std::string learner_id;
  // Absent only for batch-style impression markers; click and attempt events
  // always name their item.
  std::optional<std::string> item_id;
  EventKind kind = EventKind::impression;
  std::optional<double> result;
  // Label of the recommendation method that produced the surrounding context.
  std::string recommender;
  std::int64_t timestamp_ms = 0;
};

// Throws validation_failed when the event breaks the schema rules above.
void validate_event(const InteractionEvent& event);

nlohmann::json event_to_json(const InteractionEvent& event);
InteractionEvent event_from_json(const nlohmann::json& j);

// A maximal run of one learner's events with no internal gap above the
// configured inactivity threshold.
struct Session {
  std::string learner_id;
  int index = 1;  // 1-based
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::vector<InteractionEvent> events;
};

// Greedy split at inactivity gaps strictly greater than `gap`. Input must be
// one learner's events in timestamp order.
std::vector<Session> sessionize(std::span<const InteractionEvent> events,
                                std::chrono::milliseconds gap);

// A consistent prefix of the append order. Queries against a snapshot ignore
// everything appended after it was taken.
struct LogSnapshot {
  std::uint64_t count = 0;
};

// Distinct items a learner has attempted, each with the best result so far.
struct AttemptProfile {
  std::map<std::string, double> best_by_item;
};

struct PeerOverlap {
  std::size_t shared_items = 0;    // distinct items both learners attempted
  std::size_t distinct_items = 0;  // distinct items the peer attempted
};

// Append-only interaction store. Events persist as one JSON object per line;
// all in-memory indexes are rebuilt from the file on startup, so replaying a
// log yields exactly the state incremental appends produced. Appends are
// serialized through a single writer; reads see consistent prefixes.
class EventLog {
 public:
  // In-memory only; nothing is persisted.
  EventLog();
  // File-backed. Replays `path` when it exists, then appends to it; the file
  // itself is only created by the first append, never by reads.
  explicit EventLog(std::filesystem::path path);

  // Returns the sequence number assigned to the event.
  std::uint64_t append(const InteractionEvent& event);
  // Validates and appends all events as one atomic batch.
  void append_batch(std::span<const InteractionEvent> events);

  LogSnapshot snapshot() const;
  std::uint64_t size() const;
  const std::filesystem::path& path() const { return path_; }

  std::vector<InteractionEvent> events_for(const std::string& learner_id) const;
  std::vector<InteractionEvent> events_for(const std::string& learner_id,
                                           LogSnapshot snap) const;
  std::vector<InteractionEvent> all_events(LogSnapshot snap) const;
  // Sorted ids of learners with at least one event in the snapshot.
  std::vector<std::string> learners(LogSnapshot snap) const;
  // Timestamp of the learner's latest event, or nullopt when none exists.
  std::optional<std::int64_t> last_timestamp(const std::string& learner_id) const;

  // Attempt-derived views used by the recommenders.
  AttemptProfile attempt_profile(const std::string& learner_id, LogSnapshot snap) const;
  std::size_t distinct_attempted(const std::string& learner_id, LogSnapshot snap) const;
  // Peers sharing at least one attempted item with the given item set,
  // excluding `exclude_learner`.
  std::unordered_map<std::string, PeerOverlap> co_attempters(
      const std::vector<std::string>& items, const std::string& exclude_learner,
      LogSnapshot snap) const;
  // item id -> number of learners whose best attempt reaches `threshold`.
  std::map<std::string, std::size_t> completion_counts(double threshold,
                                                       LogSnapshot snap) const;

 private:
  struct AttemptEntry {
    std::uint64_t seq;
    std::uint32_t item;
    double result;
  };
  struct ItemAttempter {
    std::uint64_t seq;
    std::uint32_t learner;
  };
  struct LearnerState {
    std::vector<std::uint64_t> event_seqs;
    std::vector<AttemptEntry> attempts;            // every attempt, seq ascending
    std::vector<std::uint64_t> first_attempt_seqs; // one per distinct item
    std::unordered_set<std::uint32_t> attempted_items;
    std::int64_t last_ts = 0;
    bool has_events = false;
  };

  void replay_file();
  void apply_event(const InteractionEvent& event);  // caller holds the write lock
  void check_order(const InteractionEvent& event) const;
  void ensure_writable();  // opens the file on the first write
  void write_line(const std::string& line);
  std::uint32_t intern_learner(const std::string& id);
  std::uint32_t intern_item(const std::string& id);

  mutable std::shared_mutex mutex_;
  std::filesystem::path path_;
  std::ofstream out_;

  std::vector<InteractionEvent> events_;  // position == sequence number
  std::unordered_map<std::string, std::uint32_t> learner_index_;
  std::vector<std::string> learner_ids_;
  std::vector<LearnerState> learner_states_;
  std::unordered_map<std::string, std::uint32_t> item_index_;
  std::vector<std::string> item_ids_;
  std::vector<std::vector<ItemAttempter>> item_attempters_;  // first attempts only
};

}  // namespace ober
