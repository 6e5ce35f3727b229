#include "ober/event_log.hpp"

#include <algorithm>
#include <mutex>

namespace ober {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::impression: return "impression";
    case EventKind::click: return "click";
    case EventKind::attempt: return "attempt";
  }
  return "impression";
}

EventKind event_kind_from(const std::string& label) {
  if (label == "impression") return EventKind::impression;
  if (label == "click") return EventKind::click;
  if (label == "attempt") return EventKind::attempt;
  fail(Errc::validation_failed, "unknown event_kind '" + label + "'");
}

void validate_event(const InteractionEvent& event) {
  if (event.learner_id.empty()) {
    fail(Errc::validation_failed, "event: empty learner_id");
  }
  if (event.recommender.empty()) {
    fail(Errc::validation_failed, "event: empty recommender label");
  }
  if (event.item_id && event.item_id->empty()) {
    fail(Errc::validation_failed, "event: empty item_id");
  }
  if (event.kind == EventKind::attempt) {
    if (!event.result) {
      fail(Errc::validation_failed, "attempt event requires a result");
    }
    if (*event.result < 0.0 || *event.result > 1.0) {
      fail(Errc::validation_failed, "attempt result must lie in [0,1]");
    }
  } else if (event.result) {
    fail(Errc::validation_failed,
         std::string(to_string(event.kind)) + " event must not carry a result");
  }
  if (event.kind != EventKind::impression && !event.item_id) {
    fail(Errc::validation_failed,
         std::string(to_string(event.kind)) + " event requires an item_id");
  }
  if (event.timestamp_ms < 0) {
    fail(Errc::validation_failed, "negative timestamp_ms");
  }
}

nlohmann::json event_to_json(const InteractionEvent& event) {
  nlohmann::json j;
  j["learner_id"] = event.learner_id;
  if (event.item_id) {
    j["item_id"] = *event.item_id;
  }
  j["event_kind"] = to_string(event.kind);
  if (event.result) {
    j["result"] = *event.result;
  }
  j["recommender"] = event.recommender;
  j["timestamp_ms"] = event.timestamp_ms;
  return j;
}

InteractionEvent event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    fail(Errc::validation_failed, "event: expected a JSON object");
  }
  static const std::unordered_set<std::string> kFields = {
      "learner_id", "item_id", "event_kind", "result", "recommender", "timestamp_ms"};
  for (const auto& [key, value] : j.items()) {
    if (!kFields.count(key)) {
      fail(Errc::validation_failed, "event: unexpected field '" + key + "'");
    }
  }
  InteractionEvent event;
  if (!j.contains("learner_id") || !j["learner_id"].is_string()) {
    fail(Errc::validation_failed, "event: missing learner_id");
  }
  event.learner_id = j["learner_id"].get<std::string>();
  if (j.contains("item_id") && !j["item_id"].is_null()) {
    if (!j["item_id"].is_string()) {
      fail(Errc::validation_failed, "event: item_id must be a string");
    }
    event.item_id = j["item_id"].get<std::string>();
  }
  if (!j.contains("event_kind") || !j["event_kind"].is_string()) {
    fail(Errc::validation_failed, "event: missing event_kind");
  }
  event.kind = event_kind_from(j["event_kind"].get<std::string>());
  if (j.contains("result") && !j["result"].is_null()) {
    if (!j["result"].is_number()) {
      fail(Errc::validation_failed, "event: result must be a number");
    }
    event.result = j["result"].get<double>();
  }
  if (!j.contains("recommender") || !j["recommender"].is_string()) {
    fail(Errc::validation_failed, "event: missing recommender");
  }
  event.recommender = j["recommender"].get<std::string>();
  if (!j.contains("timestamp_ms") || !j["timestamp_ms"].is_number_integer()) {
    fail(Errc::validation_failed, "event: missing integer timestamp_ms");
  }
  event.timestamp_ms = j["timestamp_ms"].get<std::int64_t>();
  validate_event(event);
  return event;
}

std::vector<Session> sessionize(std::span<const InteractionEvent> events,
                                std::chrono::milliseconds gap) {
  std::vector<Session> sessions;
  const std::int64_t gap_ms = gap.count();
  for (const InteractionEvent& event : events) {
    if (!sessions.empty() && event.timestamp_ms < sessions.back().end_ms) {
      fail(Errc::validation_failed, "sessionize: events not in timestamp order");
    }
    if (sessions.empty() || event.timestamp_ms - sessions.back().end_ms > gap_ms) {
      Session next;
      next.learner_id = event.learner_id;
      next.index = static_cast<int>(sessions.size()) + 1;
      next.start_ms = event.timestamp_ms;
      sessions.push_back(std::move(next));
    }
    sessions.back().end_ms = event.timestamp_ms;
    sessions.back().events.push_back(event);
  }
  return sessions;
}

EventLog::EventLog() = default;

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) { replay_file(); }

void EventLog::replay_file() {
  std::ifstream in(path_);
  if (!in) {
    return;  // fresh log
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      InteractionEvent event = event_from_json(nlohmann::json::parse(line));
      check_order(event);
      apply_event(event);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::storage_failure,
           path_.string() + ":" + std::to_string(line_no) + ": bad event line: " + e.what());
    } catch (const Error& e) {
      fail(Errc::storage_failure,
           path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void EventLog::check_order(const InteractionEvent& event) const {
  auto it = learner_index_.find(event.learner_id);
  if (it == learner_index_.end()) {
    return;
  }
  const LearnerState& state = learner_states_[it->second];
  if (state.has_events && event.timestamp_ms < state.last_ts) {
    fail(Errc::validation_failed,
         "event for '" + event.learner_id + "' moves backwards in time");
  }
}

std::uint32_t EventLog::intern_learner(const std::string& id) {
  auto [it, inserted] = learner_index_.try_emplace(id, learner_ids_.size());
  if (inserted) {
    learner_ids_.push_back(id);
    learner_states_.emplace_back();
  }
  return it->second;
}

std::uint32_t EventLog::intern_item(const std::string& id) {
  auto [it, inserted] = item_index_.try_emplace(id, item_ids_.size());
  if (inserted) {
    item_ids_.push_back(id);
    item_attempters_.emplace_back();
  }
  return it->second;
}

void EventLog::apply_event(const InteractionEvent& event) {
  const std::uint64_t seq = events_.size();
  const std::uint32_t learner = intern_learner(event.learner_id);
  LearnerState& state = learner_states_[learner];
  state.event_seqs.push_back(seq);
  state.last_ts = event.timestamp_ms;
  state.has_events = true;
  if (event.kind == EventKind::attempt) {
    const std::uint32_t item = intern_item(*event.item_id);
    state.attempts.push_back({seq, item, *event.result});
    if (state.attempted_items.insert(item).second) {
      state.first_attempt_seqs.push_back(seq);
      item_attempters_[item].push_back({seq, learner});
    }
  }
  events_.push_back(event);
}

// Opened on first write so that read-only use never creates the file.
void EventLog::ensure_writable() {
  if (out_.is_open()) {
    return;
  }
  out_.open(path_, std::ios::app);
  if (!out_) {
    fail(Errc::storage_failure, "cannot open event log '" + path_.string() + "' for append");
  }
}

void EventLog::write_line(const std::string& line) {
  if (path_.empty()) {
    return;
  }
  ensure_writable();
  out_ << line << '\n';
  out_.flush();
  if (!out_) {
    fail(Errc::storage_failure, "write to event log '" + path_.string() + "' failed");
  }
}

std::uint64_t EventLog::append(const InteractionEvent& event) {
  validate_event(event);
  std::unique_lock lock(mutex_);
  check_order(event);
  write_line(event_to_json(event).dump());
  const std::uint64_t seq = events_.size();
  apply_event(event);
  return seq;
}

void EventLog::append_batch(std::span<const InteractionEvent> events) {
  for (const InteractionEvent& event : events) {
    validate_event(event);
  }
  std::unique_lock lock(mutex_);
  // Validate order for the whole batch before any of it is applied.
  std::unordered_map<std::string, std::int64_t> pending_ts;
  for (const InteractionEvent& event : events) {
    auto pending = pending_ts.find(event.learner_id);
    if (pending != pending_ts.end()) {
      if (event.timestamp_ms < pending->second) {
        fail(Errc::validation_failed,
             "event for '" + event.learner_id + "' moves backwards in time");
      }
    } else {
      check_order(event);
    }
    pending_ts[event.learner_id] = event.timestamp_ms;
  }
  std::string lines;
  for (const InteractionEvent& event : events) {
    lines += event_to_json(event).dump();
    lines += '\n';
  }
  if (!path_.empty()) {
    ensure_writable();
    out_ << lines;
    out_.flush();
    if (!out_) {
      fail(Errc::storage_failure, "write to event log '" + path_.string() + "' failed");
    }
  }
  for (const InteractionEvent& event : events) {
    apply_event(event);
  }
}

LogSnapshot EventLog::snapshot() const {
  std::shared_lock lock(mutex_);
  return LogSnapshot{events_.size()};
}

std::uint64_t EventLog::size() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

std::vector<InteractionEvent> EventLog::events_for(const std::string& learner_id) const {
  return events_for(learner_id, LogSnapshot{UINT64_MAX});
}

std::vector<InteractionEvent> EventLog::events_for(const std::string& learner_id,
                                                   LogSnapshot snap) const {
  std::shared_lock lock(mutex_);
  std::vector<InteractionEvent> result;
  auto it = learner_index_.find(learner_id);
  if (it == learner_index_.end()) {
    return result;
  }
  for (std::uint64_t seq : learner_states_[it->second].event_seqs) {
    if (seq >= snap.count) {
      break;
    }
    result.push_back(events_[seq]);
  }
  return result;
}

std::vector<InteractionEvent> EventLog::all_events(LogSnapshot snap) const {
  std::shared_lock lock(mutex_);
  const std::size_t count = std::min<std::uint64_t>(snap.count, events_.size());
  return {events_.begin(), events_.begin() + count};
}

std::vector<std::string> EventLog::learners(LogSnapshot snap) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < learner_states_.size(); ++i) {
    const auto& seqs = learner_states_[i].event_seqs;
    if (!seqs.empty() && seqs.front() < snap.count) {
      ids.push_back(learner_ids_[i]);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<std::int64_t> EventLog::last_timestamp(const std::string& learner_id) const {
  std::shared_lock lock(mutex_);
  auto it = learner_index_.find(learner_id);
  if (it == learner_index_.end() || !learner_states_[it->second].has_events) {
    return std::nullopt;
  }
  return learner_states_[it->second].last_ts;
}

AttemptProfile EventLog::attempt_profile(const std::string& learner_id,
                                         LogSnapshot snap) const {
  std::shared_lock lock(mutex_);
  AttemptProfile profile;
  auto it = learner_index_.find(learner_id);
  if (it == learner_index_.end()) {
    return profile;
  }
  for (const AttemptEntry& attempt : learner_states_[it->second].attempts) {
    if (attempt.seq >= snap.count) {
      break;
    }
    auto [entry, inserted] =
        profile.best_by_item.try_emplace(item_ids_[attempt.item], attempt.result);
    if (!inserted && attempt.result > entry->second) {
      entry->second = attempt.result;
    }
  }
  return profile;
}

std::size_t EventLog::distinct_attempted(const std::string& learner_id,
                                         LogSnapshot snap) const {
  std::shared_lock lock(mutex_);
  auto it = learner_index_.find(learner_id);
  if (it == learner_index_.end()) {
    return 0;
  }
  const auto& seqs = learner_states_[it->second].first_attempt_seqs;
  return static_cast<std::size_t>(
      std::lower_bound(seqs.begin(), seqs.end(), snap.count) - seqs.begin());
}

std::unordered_map<std::string, PeerOverlap> EventLog::co_attempters(
    const std::vector<std::string>& items, const std::string& exclude_learner,
    LogSnapshot snap) const {
  std::shared_lock lock(mutex_);
  std::unordered_map<std::uint32_t, std::size_t> shared;
  for (const std::string& item_id : items) {
    auto it = item_index_.find(item_id);
    if (it == item_index_.end()) {
      continue;
    }
    for (const ItemAttempter& attempter : item_attempters_[it->second]) {
      if (attempter.seq >= snap.count) {
        break;
      }
      ++shared[attempter.learner];
    }
  }
  std::unordered_map<std::string, PeerOverlap> result;
  result.reserve(shared.size());
  for (const auto& [learner, count] : shared) {
    if (learner_ids_[learner] == exclude_learner) {
      continue;
    }
    const auto& seqs = learner_states_[learner].first_attempt_seqs;
    PeerOverlap overlap;
    overlap.shared_items = count;
    overlap.distinct_items = static_cast<std::size_t>(
        std::lower_bound(seqs.begin(), seqs.end(), snap.count) - seqs.begin());
    result.emplace(learner_ids_[learner], overlap);
  }
  return result;
}

std::map<std::string, std::size_t> EventLog::completion_counts(double threshold,
                                                               LogSnapshot snap) const {
  std::shared_lock lock(mutex_);
  std::map<std::string, std::size_t> counts;
  std::unordered_map<std::uint32_t, double> best;
  for (const LearnerState& state : learner_states_) {
    best.clear();
    for (const AttemptEntry& attempt : state.attempts) {
      if (attempt.seq >= snap.count) {
        break;
      }
      auto [entry, inserted] = best.try_emplace(attempt.item, attempt.result);
      if (!inserted && attempt.result > entry->second) {
        entry->second = attempt.result;
      }
    }
    for (const auto& [item, result] : best) {
      if (result >= threshold) {
        ++counts[item_ids_[item]];
      }
    }
  }
  return counts;
}

}  // namespace ober
