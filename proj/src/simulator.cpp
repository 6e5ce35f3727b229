#include "ober/simulator.hpp"

#include <algorithm>
#include <cstdio>

#include "ober/errors.hpp"
#include "ober/rng.hpp"
#include "ober/stable_hash.hpp"

namespace ober {

void validate(const SimulationConfig& config) {
  if (config.max_sessions < 1)
    fail(Errc::bad_config, "simulation needs at least 1 session");
  if (config.items_per_recommendation < 1)
    fail(Errc::bad_config, "simulation needs at least 1 item per recommendation");
  if (!(config.default_difficulty >= 0.0 && config.default_difficulty <= 1.0))
    fail(Errc::bad_config, "default difficulty must lie in [0,1]");
  for (const auto& [item_id, difficulty] : config.difficulty) {
    if (!(difficulty >= 0.0 && difficulty <= 1.0))
      fail(Errc::bad_config, "difficulty of item '" + item_id + "' must lie in [0,1]");
  }
}

namespace {

std::string learner_name(std::size_t index) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "l%06zu", index + 1);
  return buffer;
}

double difficulty_of(const SimulationConfig& config, const std::string& item_id) {
  auto it = config.difficulty.find(item_id);
  return it == config.difficulty.end() ? config.default_difficulty : it->second;
}

}  // namespace

std::vector<LearnerProfile> generate_population(const SimulationConfig& config) {
  validate(config);
  std::vector<LearnerProfile> population;
  population.reserve(config.learner_count);
  for (std::size_t i = 0; i < config.learner_count; ++i) {
    LearnerProfile profile;
    profile.learner_id = learner_name(i);
    Rng rng(derive_seed(config.seed, "population", profile.learner_id));
    profile.ability = rng.unit();
    profile.engagement = rng.unit();
    profile.click_propensity = rng.unit();
    population.push_back(std::move(profile));
  }
  return population;
}

SimulationSummary simulate(const SimulationConfig& config, const ExperimentConfig& experiment,
                           const RecommendationEngine& engine, EventLog& log) {
  const std::vector<LearnerProfile> population = generate_population(config);
  return simulate(config, experiment, engine, log, population);
}

SimulationSummary simulate(const SimulationConfig& config, const ExperimentConfig& experiment,
                           const RecommendationEngine& engine, EventLog& log,
                           std::span<const LearnerProfile> population) {
  validate(config);
  validate(experiment);

  SimulationSummary summary;
  summary.learners = population.size();

  std::vector<Rng> streams;
  streams.reserve(population.size());
  for (const LearnerProfile& profile : population)
    streams.emplace_back(derive_seed(config.seed, "behavior", profile.learner_id));
  std::vector<char> active(population.size(), 1);

  // Round-robin: everyone plays session s before anyone starts s+1, keeping
  // the file in simulated-clock order while each learner's draws stay on
  // their own stream.
  for (std::size_t session = 1; session <= config.max_sessions; ++session) {
    const std::int64_t session_start =
        kSimBaseMs + static_cast<std::int64_t>(session - 1) * kSimSessionStepMs;
    for (std::size_t li = 0; li < population.size(); ++li) {
      if (!active[li]) continue;
      const LearnerProfile& profile = population[li];
      Rng& rng = streams[li];
      if (session > 1 && !rng.chance(profile.engagement)) {
        active[li] = 0;
        continue;
      }
      ++summary.sessions;

      const GroupSpec& group = assign_group(profile.learner_id, experiment);
      RecommendationRequest request{profile.learner_id, config.items_per_recommendation,
                                    log.snapshot(), group.method};
      const RecommendationList recommended = engine.recommend(request);
      if (recommended.items.empty()) continue;

      std::int64_t clock = session_start;
      std::vector<InteractionEvent> impressions;
      impressions.reserve(recommended.items.size());
      for (const std::string& item_id : recommended.items) {
        impressions.push_back(InteractionEvent{profile.learner_id, item_id,
                                               EventKind::impression, std::nullopt,
                                               group.method, clock});
        clock += kSimEventStepMs;
      }
      log.append_batch(impressions);
      summary.impressions += impressions.size();

      for (const std::string& item_id : recommended.items) {
        if (!rng.chance(profile.click_propensity)) continue;
        log.append(InteractionEvent{profile.learner_id, item_id, EventKind::click,
                                    std::nullopt, group.method, clock});
        clock += kSimEventStepMs;
        ++summary.clicks;

        const double noise = rng.uniform(-0.1, 0.1);
        const double result = std::clamp(
            profile.ability - difficulty_of(config, item_id) + noise, 0.0, 1.0);
        log.append(InteractionEvent{profile.learner_id, item_id, EventKind::attempt, result,
                                    group.method, clock});
        clock += kSimEventStepMs;
        ++summary.attempts;
      }
    }
  }
  return summary;
}

}  // namespace ober
