#include "ober/recommender.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <unordered_set>
#include <utility>

#include "ober/errors.hpp"
#include "ober/mastery.hpp"

namespace ober {

namespace {

void validate_request(const RecommendationRequest& request) {
  if (request.learner_id.empty())
    fail(Errc::validation_failed, "recommendation request needs a learner_id");
  if (request.count < 1)
    fail(Errc::validation_failed, "recommendation count must be at least 1");
}

}  // namespace

RecommendationEngine::RecommendationEngine(const OutcomeForest& forest,
                                           const ItemCatalog& catalog,
                                           const AlignmentSet& alignments, const EventLog& log,
                                           RecommenderConfig config)
    : forest_(forest), catalog_(catalog), alignments_(alignments), log_(log),
      config_(std::move(config)) {
  if (config_.cf_neighbor_count == 0)
    fail(Errc::bad_config, "cf neighbor count must be at least 1");
  if (!(config_.completion_threshold >= 0.0 && config_.completion_threshold <= 1.0))
    fail(Errc::bad_config, "completion threshold must lie in [0,1]");
  if (!(config_.mastery_threshold > 0.0))
    fail(Errc::bad_config, "mastery threshold must be positive");
  std::unordered_set<std::string> seen;
  for (const std::string& item_id : config_.fixed_sequence) {
    if (!catalog_.contains(item_id))
      fail(Errc::bad_config, "fixed sequence references unknown item '" + item_id + "'");
    if (!seen.insert(item_id).second)
      fail(Errc::bad_config, "fixed sequence repeats item '" + item_id + "'");
  }
}

RecommendationList RecommendationEngine::recommend(const RecommendationRequest& request) const {
  if (request.method == "fixed") return recommend_fixed(request);
  if (request.method == "cf") return recommend_cf(request);
  if (request.method == "kb") return recommend_kb(request);
  fail(Errc::unknown_method, "unknown recommendation method '" + request.method + "'");
}

std::vector<std::string> RecommendationEngine::completed_items(const std::string& learner_id,
                                                               LogSnapshot snapshot) const {
  std::vector<std::string> completed;
  for (const auto& [item_id, best] : log_.attempt_profile(learner_id, snapshot).best_by_item) {
    if (best >= config_.completion_threshold) completed.push_back(item_id);
  }
  return completed;  // map iteration keeps these sorted for binary_search
}

RecommendationList RecommendationEngine::recommend_fixed(
    const RecommendationRequest& request) const {
  validate_request(request);
  if (config_.fixed_sequence.empty())
    fail(Errc::empty_sequence, "fixed recommender has an empty sequence");

  const std::vector<std::string> completed =
      completed_items(request.learner_id, request.snapshot);
  RecommendationList list{{}, request.method, now_ms()};
  for (const std::string& item_id : config_.fixed_sequence) {
    if (list.items.size() >= request.count) break;
    if (std::binary_search(completed.begin(), completed.end(), item_id)) continue;
    list.items.push_back(item_id);
  }
  return list;
}

RecommendationList RecommendationEngine::recommend_cf(
    const RecommendationRequest& request) const {
  validate_request(request);

  const AttemptProfile profile = log_.attempt_profile(request.learner_id, request.snapshot);
  if (profile.best_by_item.empty()) return popularity_fallback(request);

  std::vector<std::string> attempted;
  attempted.reserve(profile.best_by_item.size());
  for (const auto& [item_id, best] : profile.best_by_item) attempted.push_back(item_id);

  // Peers sharing at least one attempted item are the only ones with nonzero
  // cosine similarity, so the overlap index is the full candidate pool.
  std::vector<std::pair<double, std::string>> neighbors;
  for (const auto& [peer_id, overlap] :
       log_.co_attempters(attempted, request.learner_id, request.snapshot)) {
    if (overlap.shared_items == 0 || overlap.distinct_items == 0) continue;
    const double sim =
        static_cast<double>(overlap.shared_items) /
        std::sqrt(static_cast<double>(attempted.size()) *
                  static_cast<double>(overlap.distinct_items));
    if (sim > 0.0) neighbors.emplace_back(sim, peer_id);
  }
  if (neighbors.empty()) return popularity_fallback(request);

  std::sort(neighbors.begin(), neighbors.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (neighbors.size() > config_.cf_neighbor_count)
    neighbors.resize(config_.cf_neighbor_count);

  const std::vector<std::string> completed =
      completed_items(request.learner_id, request.snapshot);
  std::map<std::string, double> scores;
  for (const auto& [sim, peer_id] : neighbors) {
    for (const auto& [item_id, best] :
         log_.attempt_profile(peer_id, request.snapshot).best_by_item) {
      if (std::binary_search(completed.begin(), completed.end(), item_id)) continue;
      scores[item_id] += sim * best;
    }
  }

  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(scores.size());
  for (const auto& [item_id, score] : scores) ranked.emplace_back(score, item_id);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  RecommendationList list{{}, request.method, now_ms()};
  for (const auto& [score, item_id] : ranked) {
    if (list.items.size() >= request.count) break;
    list.items.push_back(item_id);
  }
  return list;
}

RecommendationList RecommendationEngine::recommend_kb(
    const RecommendationRequest& request) const {
  validate_request(request);

  const std::vector<InteractionEvent> events =
      log_.events_for(request.learner_id, request.snapshot);
  const std::map<std::string, double> mastery = outcome_mastery(events, alignments_, forest_);

  // (score, DFS position, outcome id): weakest outcome first, document order
  // breaking ties.
  std::vector<std::tuple<double, std::size_t, std::string>> gaps;
  for (const auto& [outcome_id, score] : mastery) {
    if (score < config_.mastery_threshold)
      gaps.emplace_back(score, forest_.dfs_position(outcome_id), outcome_id);
  }
  std::sort(gaps.begin(), gaps.end());

  const std::vector<std::string> completed =
      completed_items(request.learner_id, request.snapshot);
  std::unordered_set<std::string> emitted;
  RecommendationList list{{}, request.method, now_ms()};
  for (const auto& [score, dfs_pos, outcome_id] : gaps) {
    if (list.items.size() >= request.count) break;
    std::vector<std::string> promoting =
        alignments_.items_for(outcome_id, AlignmentType::promotes);
    std::sort(promoting.begin(), promoting.end(), [this](const auto& a, const auto& b) {
      return catalog_.position(a) < catalog_.position(b);
    });
    for (const std::string& item_id : promoting) {
      if (list.items.size() >= request.count) break;
      if (std::binary_search(completed.begin(), completed.end(), item_id)) continue;
      if (!emitted.insert(item_id).second) continue;
      list.items.push_back(item_id);
    }
  }
  if (!list.items.empty()) return list;

  RecommendationList fallback = recommend_fixed(request);
  fallback.method = request.method;
  return fallback;
}

RecommendationList RecommendationEngine::popularity_fallback(
    const RecommendationRequest& request) const {
  const std::map<std::string, std::size_t> counts =
      log_.completion_counts(config_.completion_threshold, request.snapshot);
  const std::vector<std::string> completed =
      completed_items(request.learner_id, request.snapshot);

  // Rank the whole catalog so cold serving always has material; unseen items
  // carry count 0 and sort behind by ascending id.
  std::vector<std::pair<std::size_t, std::string>> ranked;
  ranked.reserve(catalog_.items().size());
  for (const Item& item : catalog_.items()) {
    if (std::binary_search(completed.begin(), completed.end(), item.id)) continue;
    auto it = counts.find(item.id);
    ranked.emplace_back(it == counts.end() ? 0 : it->second, item.id);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  RecommendationList list{{}, request.method, now_ms()};
  for (const auto& [count, item_id] : ranked) {
    if (list.items.size() >= request.count) break;
    list.items.push_back(item_id);
  }
  return list;
}

double RecommendationEngine::interaction_similarity(const std::string& learner_a,
                                                    const std::string& learner_b,
                                                    LogSnapshot snapshot) const {
  const AttemptProfile profile_a = log_.attempt_profile(learner_a, snapshot);
  const AttemptProfile profile_b = log_.attempt_profile(learner_b, snapshot);
  if (profile_a.best_by_item.empty() || profile_b.best_by_item.empty()) return 0.0;

  std::size_t shared = 0;
  for (const auto& [item_id, best] : profile_a.best_by_item) {
    if (profile_b.best_by_item.count(item_id) != 0) ++shared;
  }
  return static_cast<double>(shared) /
         std::sqrt(static_cast<double>(profile_a.best_by_item.size()) *
                   static_cast<double>(profile_b.best_by_item.size()));
}

std::int64_t RecommendationEngine::now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace ober
