#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ober/event_log.hpp"
#include "ober/outcome_model.hpp"

namespace ober {

struct GroupSpec {
  std::string label;
  std::string method;  // "fixed" | "cf" | "kb"
  double weight = 1.0;
};

// How the growth series treats learners with fewer sessions than the index:
// `survivor` averages only learners still active at that index; `full` keeps
// every learner, carrying their last known mastery forward.
enum class GrowthCohort { survivor, full };

struct ExperimentConfig {
  std::string id;
  std::string salt;
  std::vector<GroupSpec> groups;
  std::int64_t session_gap_ms = 30 * 60 * 1000;
  std::size_t growth_sessions = 10;
  GrowthCohort growth_cohort = GrowthCohort::survivor;
};

// Structural checks: >= 2 groups, unique labels, non-negative weights with a
// positive sum. Throws on violation.
void validate(const ExperimentConfig& config);

// Deterministic bucketing: a stable hash of (salt, learner_id) mapped onto
// the unit interval, split proportionally to group weights. Pure function —
// no state, identical across restarts and machines.
const GroupSpec& assign_group(const std::string& learner_id, const ExperimentConfig& config);

// Mean number of sessions per learner (events pre-partitioned per learner in
// timestamp order, as EventLog yields them).
double retention(std::span<const InteractionEvent> events, std::int64_t session_gap_ms);

// Macro-averaged click-through rate: per-learner clicks/impressions, averaged
// over learners with at least one impression. Learners with zero impressions
// are excluded; a group consisting only of such learners has no defined CTR.
double relevance(std::span<const InteractionEvent> events);

// Mean over learners of total mastery normalized by the number of outcomes,
// so the value lands in [0,1].
double mastery_metric(std::span<const InteractionEvent> events, const AlignmentSet& alignments,
                      const OutcomeForest& forest);

struct MasteryGrowthSeries {
  std::string label;
  std::vector<double> mean_mastery;  // index k-1 holds session index k (1-based)
};

// Mean cumulative normalized mastery after sessions 1..k, for k = 1..S.
MasteryGrowthSeries mastery_growth(const std::string& label,
                                   std::span<const InteractionEvent> events,
                                   const AlignmentSet& alignments, const OutcomeForest& forest,
                                   std::int64_t session_gap_ms, std::size_t max_sessions,
                                   GrowthCohort cohort);

struct GroupMetrics {
  std::string label;
  std::string method;
  std::size_t learner_count = 0;
  double retention = 0.0;
  double relevance = 0.0;
  double mastery = 0.0;
};

struct ExperimentReport {
  std::string experiment_id;
  std::vector<GroupMetrics> rows;            // config group order
  std::vector<MasteryGrowthSeries> growth;   // same order
};

// Partitions the snapshot's learners via assign_group and computes every
// group's metrics. Each group must end up with at least one learner.
ExperimentReport build_report(const ExperimentConfig& config, const EventLog& log,
                              LogSnapshot snapshot, const AlignmentSet& alignments,
                              const OutcomeForest& forest);

// Table-shaped CSV: header method,learners,retention,relevance,mastery.
std::string report_csv(const ExperimentReport& report);
// Long-format CSV: header group,session_index,mean_mastery.
std::string growth_csv(const ExperimentReport& report);
nlohmann::json to_json(const ExperimentReport& report);

}  // namespace ober
