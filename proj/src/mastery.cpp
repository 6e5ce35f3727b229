#include "ober/mastery.hpp"

#include <algorithm>
#include <unordered_map>

#include "ober/errors.hpp"

namespace ober {

namespace {

// Highest attempt result per item in one pass over the events.
std::unordered_map<std::string, double> best_result_by_item(
    std::span<const InteractionEvent> events) {
  std::unordered_map<std::string, double> best;
  for (const InteractionEvent& event : events) {
    if (event.kind != EventKind::attempt || !event.item_id || !event.result) continue;
    auto [it, inserted] = best.emplace(*event.item_id, *event.result);
    if (!inserted) it->second = std::max(it->second, *event.result);
  }
  return best;
}

}  // namespace

std::map<std::string, double> outcome_mastery(std::span<const InteractionEvent> events,
                                              const AlignmentSet& alignments,
                                              const OutcomeForest& forest,
                                              const MasteryOptions& options) {
  const std::unordered_map<std::string, double> best = best_result_by_item(events);

  std::map<std::string, double> scores;
  for (const std::string& outcome_id : forest.dfs_order()) {
    const std::vector<std::string>& items =
        alignments.items_for(outcome_id, AlignmentType::verifies);
    double score = 0.0;
    if (!items.empty()) {
      if (options.aggregation == OutcomeAggregation::best) {
        for (const std::string& item_id : items) {
          auto it = best.find(item_id);
          if (it != best.end()) score = std::max(score, it->second);
        }
      } else {
        double sum = 0.0;
        for (const std::string& item_id : items) {
          auto it = best.find(item_id);
          if (it != best.end()) sum += it->second;
        }
        score = sum / static_cast<double>(items.size());
      }
    }
    scores.emplace(outcome_id, score);
  }
  return scores;
}

double total_mastery(const std::map<std::string, double>& scores) {
  double total = 0.0;
  for (const auto& [outcome_id, score] : scores) total += score;
  return total;
}

double total_mastery_leaves_only(const std::map<std::string, double>& scores,
                                 const OutcomeForest& forest) {
  double total = 0.0;
  for (const auto& [outcome_id, score] : scores) {
    if (forest.children(outcome_id).empty()) total += score;
  }
  return total;
}

namespace {

// Shared roll-up walk; `weights == nullptr` selects the unweighted mean.
std::map<std::string, double> rollup_impl(std::map<std::string, double> scores,
                                          const OutcomeForest& forest,
                                          const AlignmentSet& alignments,
                                          const RollupWeights* weights) {
  const std::vector<std::string>& order = forest.dfs_order();
  // Reversed preorder visits every child before its parent.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::string& outcome_id = *it;
    const std::vector<std::string>& children = forest.children(outcome_id);
    if (children.empty()) continue;
    if (!alignments.items_for(outcome_id, AlignmentType::verifies).empty()) continue;

    double sum = 0.0;
    double weight_sum = 0.0;
    for (const std::string& child : children) {
      double weight = 1.0;
      if (weights != nullptr) {
        auto wit = weights->by_outcome.find(child);
        if (wit == weights->by_outcome.end())
          fail(Errc::weight_undefined, "no roll-up weight for outcome '" + child + "'");
        if (wit->second < 0.0)
          fail(Errc::validation_failed, "negative roll-up weight for outcome '" + child + "'");
        weight = wit->second;
      }
      sum += weight * scores.at(child);
      weight_sum += weight;
    }
    if (weight_sum <= 0.0)
      fail(Errc::zero_weight_sum, "roll-up weights for children of '" + outcome_id +
                                      "' sum to zero");
    scores.at(outcome_id) = sum / weight_sum;
  }
  return scores;
}

}  // namespace

std::map<std::string, double> rollup_mastery(std::map<std::string, double> scores,
                                             const OutcomeForest& forest,
                                             const AlignmentSet& alignments) {
  return rollup_impl(std::move(scores), forest, alignments, nullptr);
}

std::map<std::string, double> rollup_mastery(std::map<std::string, double> scores,
                                             const OutcomeForest& forest,
                                             const AlignmentSet& alignments,
                                             const RollupWeights& weights) {
  return rollup_impl(std::move(scores), forest, alignments, &weights);
}

MasteryReport compute_mastery(const std::string& learner_id,
                              std::span<const InteractionEvent> events,
                              const AlignmentSet& alignments, const OutcomeForest& forest,
                              const MasteryOptions& options) {
  MasteryReport report;
  report.learner_id = learner_id;
  report.scores = outcome_mastery(events, alignments, forest, options);
  report.total = total_mastery(report.scores);
  return report;
}

double normalized_total(double total, const OutcomeForest& forest) {
  if (forest.empty()) return 0.0;
  return total / static_cast<double>(forest.size());
}

nlohmann::json to_json(const MasteryReport& report) {
  nlohmann::json scores = nlohmann::json::object();
  for (const auto& [outcome_id, score] : report.scores) scores[outcome_id] = score;
  return nlohmann::json{
      {"learner_id", report.learner_id}, {"scores", scores}, {"total", report.total}};
}

}  // namespace ober
