#pragma once

#include <map>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "ober/event_log.hpp"
#include "ober/outcome_model.hpp"

namespace ober {

// How the per-item best results of an outcome's verifying items combine into
// the outcome score. `best` keeps the generous maximum; `mean` averages over
// all verifying items, counting never-attempted ones as 0.
enum class OutcomeAggregation { best, mean };

struct MasteryOptions {
  OutcomeAggregation aggregation = OutcomeAggregation::best;
};

// Per-outcome mastery for one learner's events. Every outcome in the forest
// gets an entry; outcomes with no attempted verifying item score 0. Repeat
// attempts on one item collapse to their maximum before aggregation, so
// appending events can never lower a score.
std::map<std::string, double> outcome_mastery(std::span<const InteractionEvent> events,
                                              const AlignmentSet& alignments,
                                              const OutcomeForest& forest,
                                              const MasteryOptions& options = {});

// Plain sum over all outcomes.
double total_mastery(const std::map<std::string, double>& scores);
// Alternative total restricted to leaf outcomes.
double total_mastery_leaves_only(const std::map<std::string, double>& scores,
                                 const OutcomeForest& forest);

struct RollupWeights {
  std::map<std::string, double> by_outcome;  // child outcome id -> weight >= 0
};

// Fills scores of outcomes that have no direct verifying items but do have
// children, using the mean of the children's (already rolled-up) scores.
// Outcomes with direct verifying items keep their scores. Applying the
// roll-up twice equals applying it once.
std::map<std::string, double> rollup_mastery(std::map<std::string, double> scores,
                                             const OutcomeForest& forest,
                                             const AlignmentSet& alignments);

// Weighted variant; every child of a rolled-up parent must have a weight and
// each parent's weight sum must be positive.
std::map<std::string, double> rollup_mastery(std::map<std::string, double> scores,
                                             const OutcomeForest& forest,
                                             const AlignmentSet& alignments,
                                             const RollupWeights& weights);

struct MasteryReport {
  std::string learner_id;
  std::map<std::string, double> scores;
  double total = 0.0;
};

MasteryReport compute_mastery(const std::string& learner_id,
                              std::span<const InteractionEvent> events,
                              const AlignmentSet& alignments, const OutcomeForest& forest,
                              const MasteryOptions& options = {});

// total / |outcomes|, in [0,1]; 0 for an empty forest.
double normalized_total(double total, const OutcomeForest& forest);

nlohmann::json to_json(const MasteryReport& report);

}  // namespace ober
