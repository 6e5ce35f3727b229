#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ober/event_log.hpp"
#include "ober/outcome_model.hpp"

namespace ober {

struct RecommenderConfig {
  std::vector<std::string> fixed_sequence;
  std::size_t cf_neighbor_count = 20;
  double completion_threshold = 0.5;  // attempt result at or above this completes an item
  double mastery_threshold = 1.0;     // outcome score at or above this counts as mastered
};

struct RecommendationRequest {
  std::string learner_id;
  std::size_t count = 1;
  LogSnapshot snapshot;
  std::string method;  // "fixed" | "cf" | "kb"
};

struct RecommendationList {
  std::vector<std::string> items;  // ordered, no duplicates, <= requested count
  std::string method;
  std::int64_t generated_at_ms = 0;
};

// Serves ranked item lists for a learner from a consistent event-log snapshot.
// Stateless apart from the shared model and log references, so concurrent
// calls against the same snapshot are safe.
class RecommendationEngine {
 public:
  RecommendationEngine(const OutcomeForest& forest, const ItemCatalog& catalog,
                       const AlignmentSet& alignments, const EventLog& log,
                       RecommenderConfig config);

  // Dispatches on request.method; unknown labels raise Errc::unknown_method.
  RecommendationList recommend(const RecommendationRequest& request) const;

  // The next not-yet-completed items of the configured sequence, in order.
  RecommendationList recommend_fixed(const RecommendationRequest& request) const;
  // User-based k-nearest-neighbor scoring over attempt histories; falls back
  // to completion-count popularity for cold learners or all-negative peers.
  RecommendationList recommend_cf(const RecommendationRequest& request) const;
  // Items promoting the learner's weakest unmastered outcomes; falls back to
  // the fixed sequence when no promoted item qualifies.
  RecommendationList recommend_kb(const RecommendationRequest& request) const;

  // Cosine similarity between two learners' binary attempt vectors (symmetric).
  double interaction_similarity(const std::string& learner_a, const std::string& learner_b,
                                LogSnapshot snapshot) const;

  const RecommenderConfig& config() const { return config_; }

 private:
  // Items whose best attempt meets the completion threshold.
  std::vector<std::string> completed_items(const std::string& learner_id,
                                           LogSnapshot snapshot) const;
  RecommendationList popularity_fallback(const RecommendationRequest& request) const;
  static std::int64_t now_ms();

  const OutcomeForest& forest_;
  const ItemCatalog& catalog_;
  const AlignmentSet& alignments_;
  const EventLog& log_;
  RecommenderConfig config_;
};

}  // namespace ober
