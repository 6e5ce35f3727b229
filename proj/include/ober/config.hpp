#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ober/experiment.hpp"
#include "ober/outcome_model.hpp"
#include "ober/recommender.hpp"
#include "ober/simulator.hpp"

namespace ober {

struct ModelPaths {
  std::string outcomes;
  std::string items;
  std::string alignments;
  bool strict_item_kinds = false;  // reject unknown item kind strings
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// One file configures the whole application: model data, event log location,
// per-method recommender parameters, experiment layout, simulation knobs and
// the HTTP server. Relative paths are resolved against the config file's
// directory.
struct AppConfig {
  ModelPaths model;
  std::string event_log_path;  // empty -> in-memory log
  bool strict_items = false;   // reject interactions referencing unknown items
  RecommenderConfig recommender;
  ExperimentConfig experiment;
  SimulationConfig simulation;
  ServerConfig server;
  std::size_t recommendation_count = 3;  // default n for serving
};

AppConfig app_config_from_json(const nlohmann::json& doc,
                               const std::filesystem::path& base_dir);
AppConfig load_app_config(const std::string& path);

struct ModelBundle {
  OutcomeForest forest;
  ItemCatalog catalog;
  AlignmentSet alignments;
};

ModelBundle load_model(const AppConfig& config);

}  // namespace ober
