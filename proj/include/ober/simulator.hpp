#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ober/event_log.hpp"
#include "ober/experiment.hpp"
#include "ober/recommender.hpp"

namespace ober {

struct LearnerProfile {
  std::string learner_id;
  double ability = 0.5;           // drives attempt results
  double engagement = 0.5;        // per-session return probability
  double click_propensity = 0.5;  // per-recommended-item click probability
};

struct SimulationConfig {
  std::size_t learner_count = 6000;
  std::size_t max_sessions = 10;
  std::size_t items_per_recommendation = 3;
  std::uint64_t seed = 42;
  double default_difficulty = 0.5;
  std::map<std::string, double> difficulty;  // item_id -> [0,1]
};

void validate(const SimulationConfig& config);

// Simulated clock origin: 2026-01-01T00:00:00Z. Sessions advance a full day,
// events within a session one minute, so any session gap below 24h works.
inline constexpr std::int64_t kSimBaseMs = 1'767'225'600'000;
inline constexpr std::int64_t kSimSessionStepMs = 24 * 60 * 60 * 1000;
inline constexpr std::int64_t kSimEventStepMs = 60 * 1000;

// Profiles drawn from per-learner seeded generators, so the population is a
// pure function of (seed, learner_count) regardless of ordering or host.
std::vector<LearnerProfile> generate_population(const SimulationConfig& config);

struct SimulationSummary {
  std::size_t learners = 0;
  std::size_t sessions = 0;
  std::size_t impressions = 0;
  std::size_t clicks = 0;
  std::size_t attempts = 0;
};

// Plays the whole population against the engine, round-robin one session at
// a time. Each learner runs session 1 unconditionally (so every learner is
// observable in the log), then returns for the next session with probability
// `engagement` until the coin fails or max_sessions is reached. Per session:
// the learner's experiment group picks the method, the returned items are
// logged as impressions, each item is clicked with click_propensity, and a
// click is followed by an attempt with
//   result = clamp(ability - difficulty(item) + uniform(-0.1, 0.1), 0, 1).
// Every random draw comes from a per-learner stream derived from (seed,
// learner_id), making the event file byte-identical across runs and hosts.
SimulationSummary simulate(const SimulationConfig& config,
                           const ExperimentConfig& experiment,
                           const RecommendationEngine& engine, EventLog& log);

// Same, but with a caller-supplied population (tests craft extreme profiles).
SimulationSummary simulate(const SimulationConfig& config,
                           const ExperimentConfig& experiment,
                           const RecommendationEngine& engine, EventLog& log,
                           std::span<const LearnerProfile> population);

}  // namespace ober
