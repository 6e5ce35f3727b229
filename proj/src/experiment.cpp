#include "ober/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "ober/errors.hpp"
#include "ober/mastery.hpp"
#include "ober/stable_hash.hpp"

namespace ober {

void validate(const ExperimentConfig& config) {
  if (config.id.empty()) fail(Errc::bad_config, "experiment id must not be empty");
  if (config.groups.size() < 2)
    fail(Errc::bad_config, "experiment needs at least 2 groups");
  if (config.session_gap_ms <= 0)
    fail(Errc::bad_config, "session gap must be positive");
  if (config.growth_sessions < 1)
    fail(Errc::bad_config, "growth series needs at least 1 session index");

  std::unordered_set<std::string> labels;
  double weight_sum = 0.0;
  for (const GroupSpec& group : config.groups) {
    if (group.label.empty()) fail(Errc::bad_config, "group label must not be empty");
    if (!labels.insert(group.label).second)
      fail(Errc::duplicate_id, "duplicate group label '" + group.label + "'");
    if (group.method.empty())
      fail(Errc::bad_config, "group '" + group.label + "' has no method label");
    if (group.weight < 0.0)
      fail(Errc::bad_config, "group '" + group.label + "' has a negative weight");
    weight_sum += group.weight;
  }
  if (weight_sum <= 0.0) fail(Errc::zero_weight_sum, "group weights sum to zero");
}

const GroupSpec& assign_group(const std::string& learner_id, const ExperimentConfig& config) {
  validate(config);

  double weight_sum = 0.0;
  for (const GroupSpec& group : config.groups) weight_sum += group.weight;

  const std::uint64_t hash = mix64(fnv1a64(config.salt + '\x1f' + learner_id));
  const double point = unit_double(hash) * weight_sum;

  double cumulative = 0.0;
  const GroupSpec* last_weighted = nullptr;
  for (const GroupSpec& group : config.groups) {
    if (group.weight <= 0.0) continue;
    cumulative += group.weight;
    last_weighted = &group;
    if (point < cumulative) return group;
  }
  return *last_weighted;  // point == weight_sum can only arise from rounding
}

namespace {

// Keeps each learner's events in arrival order, which EventLog guarantees to
// be timestamp order per learner.
std::map<std::string, std::vector<InteractionEvent>> partition_by_learner(
    std::span<const InteractionEvent> events) {
  std::map<std::string, std::vector<InteractionEvent>> by_learner;
  for (const InteractionEvent& event : events) by_learner[event.learner_id].push_back(event);
  return by_learner;
}

std::string format_fixed(double value, int precision) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
  return buffer;
}

}  // namespace

double retention(std::span<const InteractionEvent> events, std::int64_t session_gap_ms) {
  const auto by_learner = partition_by_learner(events);
  if (by_learner.empty()) fail(Errc::empty_group, "retention of an empty group is undefined");

  const auto gap = std::chrono::milliseconds(session_gap_ms);
  std::size_t session_count = 0;
  for (const auto& [learner_id, learner_events] : by_learner)
    session_count += sessionize(learner_events, gap).size();
  return static_cast<double>(session_count) / static_cast<double>(by_learner.size());
}

double relevance(std::span<const InteractionEvent> events) {
  const auto by_learner = partition_by_learner(events);
  if (by_learner.empty()) fail(Errc::empty_group, "relevance of an empty group is undefined");

  double ctr_sum = 0.0;
  std::size_t exposed_learners = 0;
  for (const auto& [learner_id, learner_events] : by_learner) {
    std::size_t impressions = 0;
    std::size_t clicks = 0;
    for (const InteractionEvent& event : learner_events) {
      if (event.kind == EventKind::impression) ++impressions;
      if (event.kind == EventKind::click) ++clicks;
    }
    if (impressions == 0) continue;  // CTR undefined without exposure
    ctr_sum += static_cast<double>(clicks) / static_cast<double>(impressions);
    ++exposed_learners;
  }
  if (exposed_learners == 0)
    fail(Errc::no_impressions, "no learner in the group has an impression");
  return ctr_sum / static_cast<double>(exposed_learners);
}

double mastery_metric(std::span<const InteractionEvent> events, const AlignmentSet& alignments,
                      const OutcomeForest& forest) {
  const auto by_learner = partition_by_learner(events);
  if (by_learner.empty()) fail(Errc::empty_group, "mastery of an empty group is undefined");

  double sum = 0.0;
  for (const auto& [learner_id, learner_events] : by_learner) {
    const auto scores = outcome_mastery(learner_events, alignments, forest);
    sum += normalized_total(total_mastery(scores), forest);
  }
  return sum / static_cast<double>(by_learner.size());
}

MasteryGrowthSeries mastery_growth(const std::string& label,
                                   std::span<const InteractionEvent> events,
                                   const AlignmentSet& alignments, const OutcomeForest& forest,
                                   std::int64_t session_gap_ms, std::size_t max_sessions,
                                   GrowthCohort cohort) {
  const auto by_learner = partition_by_learner(events);
  if (by_learner.empty())
    fail(Errc::empty_group, "mastery growth of an empty group is undefined");

  // Per learner: normalized mastery after sessions 1..k for each k they have.
  const auto gap = std::chrono::milliseconds(session_gap_ms);
  std::vector<std::vector<double>> prefix_mastery;
  prefix_mastery.reserve(by_learner.size());
  for (const auto& [learner_id, learner_events] : by_learner) {
    const std::vector<Session> sessions = sessionize(learner_events, gap);
    std::vector<double> prefix;
    prefix.reserve(std::min(sessions.size(), max_sessions));
    std::vector<InteractionEvent> seen;
    for (std::size_t k = 0; k < sessions.size() && k < max_sessions; ++k) {
      seen.insert(seen.end(), sessions[k].events.begin(), sessions[k].events.end());
      const auto scores = outcome_mastery(seen, alignments, forest);
      prefix.push_back(normalized_total(total_mastery(scores), forest));
    }
    prefix_mastery.push_back(std::move(prefix));
  }

  MasteryGrowthSeries series{label, {}};
  for (std::size_t k = 0; k < max_sessions; ++k) {
    double sum = 0.0;
    std::size_t contributors = 0;
    for (const std::vector<double>& prefix : prefix_mastery) {
      if (k < prefix.size()) {
        sum += prefix[k];
        ++contributors;
      } else if (cohort == GrowthCohort::full && !prefix.empty()) {
        sum += prefix.back();  // carry the learner's last value forward
        ++contributors;
      }
    }
    if (contributors == 0) break;  // survivor cohort ran out of learners
    series.mean_mastery.push_back(sum / static_cast<double>(contributors));
  }
  return series;
}

ExperimentReport build_report(const ExperimentConfig& config, const EventLog& log,
                              LogSnapshot snapshot, const AlignmentSet& alignments,
                              const OutcomeForest& forest) {
  validate(config);

  std::map<std::string, std::vector<InteractionEvent>> group_events;
  std::map<std::string, std::size_t> group_learners;
  for (const GroupSpec& group : config.groups) {
    group_events[group.label];
    group_learners[group.label] = 0;
  }
  for (const std::string& learner_id : log.learners(snapshot)) {
    const GroupSpec& group = assign_group(learner_id, config);
    std::vector<InteractionEvent> events = log.events_for(learner_id, snapshot);
    auto& sink = group_events[group.label];
    sink.insert(sink.end(), std::make_move_iterator(events.begin()),
                std::make_move_iterator(events.end()));
    ++group_learners[group.label];
  }

  ExperimentReport report;
  report.experiment_id = config.id;
  for (const GroupSpec& group : config.groups) {
    const std::vector<InteractionEvent>& events = group_events[group.label];
    if (events.empty())
      fail(Errc::empty_group, "group '" + group.label + "' has no learners");

    GroupMetrics row;
    row.label = group.label;
    row.method = group.method;
    row.learner_count = group_learners[group.label];
    row.retention = retention(events, config.session_gap_ms);
    row.relevance = relevance(events);
    row.mastery = mastery_metric(events, alignments, forest);
    report.rows.push_back(std::move(row));
    report.growth.push_back(mastery_growth(group.label, events, alignments, forest,
                                           config.session_gap_ms, config.growth_sessions,
                                           config.growth_cohort));
  }
  return report;
}

std::string report_csv(const ExperimentReport& report) {
  std::string csv = "method,learners,retention,relevance,mastery\n";
  for (const GroupMetrics& row : report.rows) {
    csv += row.method;
    csv += ',';
    csv += std::to_string(row.learner_count);
    csv += ',';
    csv += format_fixed(row.retention, 4);
    csv += ',';
    csv += format_fixed(row.relevance, 4);
    csv += ',';
    csv += format_fixed(row.mastery, 4);
    csv += '\n';
  }
  return csv;
}

std::string growth_csv(const ExperimentReport& report) {
  std::string csv = "group,session_index,mean_mastery\n";
  for (const MasteryGrowthSeries& series : report.growth) {
    for (std::size_t k = 0; k < series.mean_mastery.size(); ++k) {
      csv += series.label;
      csv += ',';
      csv += std::to_string(k + 1);
      csv += ',';
      csv += format_fixed(series.mean_mastery[k], 6);
      csv += '\n';
    }
  }
  return csv;
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json groups = nlohmann::json::array();
  for (const GroupMetrics& row : report.rows) {
    groups.push_back({{"group", row.label},
                      {"method", row.method},
                      {"learners", row.learner_count},
                      {"retention", row.retention},
                      {"relevance", row.relevance},
                      {"mastery", row.mastery}});
  }
  nlohmann::json growth = nlohmann::json::object();
  for (const MasteryGrowthSeries& series : report.growth)
    growth[series.label] = series.mean_mastery;
  return nlohmann::json{
      {"experiment_id", report.experiment_id}, {"groups", groups}, {"growth", growth}};
}

}  // namespace ober
