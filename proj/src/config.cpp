#include "ober/config.hpp"

#include <fstream>

#include "ober/errors.hpp"

namespace ober {

namespace {

void expect(bool condition, const std::string& message) {
  if (!condition) fail(Errc::bad_config, message);
}

const nlohmann::json* find(const nlohmann::json& doc, const char* key) {
  auto it = doc.find(key);
  return it == doc.end() || it->is_null() ? nullptr : &*it;
}

std::string get_string(const nlohmann::json& value, const std::string& where) {
  expect(value.is_string(), where + " must be a string");
  return value.get<std::string>();
}

double get_number(const nlohmann::json& value, const std::string& where) {
  expect(value.is_number(), where + " must be a number");
  return value.get<double>();
}

std::size_t get_count(const nlohmann::json& value, const std::string& where) {
  expect(value.is_number_integer() && value.get<std::int64_t>() >= 0,
         where + " must be a non-negative integer");
  return static_cast<std::size_t>(value.get<std::int64_t>());
}

bool get_bool(const nlohmann::json& value, const std::string& where) {
  expect(value.is_boolean(), where + " must be a boolean");
  return value.get<bool>();
}

std::string resolve(const std::filesystem::path& base_dir, const std::string& raw) {
  if (raw.empty()) return raw;
  std::filesystem::path p(raw);
  if (p.is_relative()) p = base_dir / p;
  return p.lexically_normal().string();
}

ExperimentConfig default_experiment() {
  ExperimentConfig experiment;
  experiment.id = "default";
  experiment.salt = "ober";
  experiment.groups = {{"A", "fixed", 1.0}, {"B", "cf", 1.0}, {"C", "kb", 1.0}};
  return experiment;
}

}  // namespace

AppConfig app_config_from_json(const nlohmann::json& doc,
                               const std::filesystem::path& base_dir) {
  expect(doc.is_object(), "config root must be an object");
  AppConfig config;
  config.experiment = default_experiment();

  const nlohmann::json* model = find(doc, "model");
  expect(model != nullptr && model->is_object(),
         "config needs a 'model' object with outcomes/items/alignments paths");
  for (const char* key : {"outcomes", "items", "alignments"}) {
    const nlohmann::json* value = find(*model, key);
    expect(value != nullptr, std::string("model.") + key + " path is required");
    const std::string path = resolve(base_dir, get_string(*value, std::string("model.") + key));
    if (key == std::string("outcomes")) config.model.outcomes = path;
    if (key == std::string("items")) config.model.items = path;
    if (key == std::string("alignments")) config.model.alignments = path;
  }
  if (const nlohmann::json* strict = find(*model, "strict_item_kinds"))
    config.model.strict_item_kinds = get_bool(*strict, "model.strict_item_kinds");

  if (const nlohmann::json* value = find(doc, "event_log"))
    config.event_log_path = resolve(base_dir, get_string(*value, "event_log"));
  if (const nlohmann::json* value = find(doc, "strict_items"))
    config.strict_items = get_bool(*value, "strict_items");
  if (const nlohmann::json* value = find(doc, "recommendation_count")) {
    config.recommendation_count = get_count(*value, "recommendation_count");
    expect(config.recommendation_count >= 1, "recommendation_count must be at least 1");
  }

  if (const nlohmann::json* rec = find(doc, "recommender")) {
    expect(rec->is_object(), "recommender must be an object");
    if (const nlohmann::json* fixed = find(*rec, "fixed")) {
      expect(fixed->is_object(), "recommender.fixed must be an object");
      if (const nlohmann::json* seq = find(*fixed, "sequence")) {
        expect(seq->is_array(), "recommender.fixed.sequence must be an array");
        for (const nlohmann::json& entry : *seq)
          config.recommender.fixed_sequence.push_back(
              get_string(entry, "recommender.fixed.sequence entry"));
      }
    }
    if (const nlohmann::json* cf = find(*rec, "cf")) {
      expect(cf->is_object(), "recommender.cf must be an object");
      if (const nlohmann::json* k = find(*cf, "k")) {
        config.recommender.cf_neighbor_count = get_count(*k, "recommender.cf.k");
        expect(config.recommender.cf_neighbor_count >= 1,
               "recommender.cf.k must be at least 1");
      }
    }
    if (const nlohmann::json* thresholds = find(*rec, "thresholds")) {
      expect(thresholds->is_object(), "recommender.thresholds must be an object");
      if (const nlohmann::json* completion = find(*thresholds, "completion"))
        config.recommender.completion_threshold =
            get_number(*completion, "recommender.thresholds.completion");
      if (const nlohmann::json* mastery = find(*thresholds, "mastery"))
        config.recommender.mastery_threshold =
            get_number(*mastery, "recommender.thresholds.mastery");
    }
  }

  if (const nlohmann::json* experiment = find(doc, "experiment")) {
    expect(experiment->is_object(), "experiment must be an object");
    if (const nlohmann::json* id = find(*experiment, "id"))
      config.experiment.id = get_string(*id, "experiment.id");
    if (const nlohmann::json* salt = find(*experiment, "salt"))
      config.experiment.salt = get_string(*salt, "experiment.salt");
    if (const nlohmann::json* groups = find(*experiment, "groups")) {
      expect(groups->is_array(), "experiment.groups must be an array");
      config.experiment.groups.clear();
      for (const nlohmann::json& entry : *groups) {
        expect(entry.is_object(), "experiment.groups entries must be objects");
        GroupSpec group;
        const nlohmann::json* label = find(entry, "label");
        expect(label != nullptr, "experiment group needs a label");
        group.label = get_string(*label, "experiment group label");
        const nlohmann::json* method = find(entry, "method");
        expect(method != nullptr, "experiment group needs a method");
        group.method = get_string(*method, "experiment group method");
        if (const nlohmann::json* weight = find(entry, "weight"))
          group.weight = get_number(*weight, "experiment group weight");
        config.experiment.groups.push_back(std::move(group));
      }
    }
    if (const nlohmann::json* gap = find(*experiment, "session_gap_minutes")) {
      const double minutes = get_number(*gap, "experiment.session_gap_minutes");
      expect(minutes > 0, "experiment.session_gap_minutes must be positive");
      config.experiment.session_gap_ms = static_cast<std::int64_t>(minutes * 60.0 * 1000.0);
    }
    if (const nlohmann::json* sessions = find(*experiment, "growth_sessions")) {
      config.experiment.growth_sessions = get_count(*sessions, "experiment.growth_sessions");
      expect(config.experiment.growth_sessions >= 1,
             "experiment.growth_sessions must be at least 1");
    }
    if (const nlohmann::json* cohort = find(*experiment, "growth_cohort")) {
      const std::string name = get_string(*cohort, "experiment.growth_cohort");
      if (name == "survivor") config.experiment.growth_cohort = GrowthCohort::survivor;
      else if (name == "full") config.experiment.growth_cohort = GrowthCohort::full;
      else fail(Errc::bad_config, "experiment.growth_cohort must be 'survivor' or 'full'");
    }
    validate(config.experiment);
  }

  if (const nlohmann::json* simulation = find(doc, "simulation")) {
    expect(simulation->is_object(), "simulation must be an object");
    if (const nlohmann::json* learners = find(*simulation, "learners"))
      config.simulation.learner_count = get_count(*learners, "simulation.learners");
    if (const nlohmann::json* sessions = find(*simulation, "max_sessions")) {
      config.simulation.max_sessions = get_count(*sessions, "simulation.max_sessions");
      expect(config.simulation.max_sessions >= 1,
             "simulation.max_sessions must be at least 1");
    }
    if (const nlohmann::json* n = find(*simulation, "items_per_recommendation")) {
      config.simulation.items_per_recommendation =
          get_count(*n, "simulation.items_per_recommendation");
      expect(config.simulation.items_per_recommendation >= 1,
             "simulation.items_per_recommendation must be at least 1");
    }
    if (const nlohmann::json* seed = find(*simulation, "seed")) {
      expect(seed->is_number_integer(), "simulation.seed must be an integer");
      config.simulation.seed = seed->get<std::uint64_t>();
    }
    if (const nlohmann::json* difficulty = find(*simulation, "default_difficulty"))
      config.simulation.default_difficulty =
          get_number(*difficulty, "simulation.default_difficulty");
    if (const nlohmann::json* table = find(*simulation, "difficulty")) {
      expect(table->is_object(), "simulation.difficulty must be an object");
      for (const auto& [item_id, value] : table->items())
        config.simulation.difficulty[item_id] =
            get_number(value, "simulation.difficulty['" + item_id + "']");
    }
    validate(config.simulation);
  }

  if (const nlohmann::json* server = find(doc, "server")) {
    expect(server->is_object(), "server must be an object");
    if (const nlohmann::json* host = find(*server, "host"))
      config.server.host = get_string(*host, "server.host");
    if (const nlohmann::json* port = find(*server, "port")) {
      expect(port->is_number_integer(), "server.port must be an integer");
      const std::int64_t value = port->get<std::int64_t>();
      expect(value >= 0 && value <= 65535, "server.port must lie in [0,65535]");
      config.server.port = static_cast<int>(value);
    }
  }

  return config;
}

AppConfig load_app_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::storage_failure, "cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& error) {
    fail(Errc::bad_config, "config file '" + path + "' is not valid JSON: " + error.what());
  }
  return app_config_from_json(doc, std::filesystem::path(path).parent_path());
}

ModelBundle load_model(const AppConfig& config) {
  ModelBundle bundle;
  bundle.forest = load_outcomes_file(config.model.outcomes);
  bundle.catalog = load_items_file(config.model.items, ItemKindAliases::defaults(),
                                   config.model.strict_item_kinds);
  bundle.alignments = load_alignments_file(config.model.alignments, bundle.forest,
                                           bundle.catalog);
  return bundle;
}

}  // namespace ober
