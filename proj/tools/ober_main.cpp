#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ober/config.hpp"
#include "ober/errors.hpp"
#include "ober/event_log.hpp"
#include "ober/experiment.hpp"
#include "ober/mastery.hpp"
#include "ober/recommender.hpp"
#include "ober/service.hpp"
#include "ober/simulator.hpp"

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ober::fail(ober::Errc::storage_failure, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) ober::fail(ober::Errc::storage_failure, "cannot write '" + path + "'");
}

int run_serve(const ober::AppConfig& config, const std::string& host_override,
              int port_override) {
  ober::AppConfig effective = config;
  if (!host_override.empty()) effective.server.host = host_override;
  if (port_override >= 0) effective.server.port = port_override;

  ober::Service service(effective);
  if (!service.model_loaded())
    std::cerr << "warning: model failed to load; serving degraded (503 on model endpoints)\n";
  std::cout << "listening on http://" << effective.server.host << ':'
            << effective.server.port << "\n";
  if (!service.run(effective.server.host, effective.server.port)) {
    std::cerr << "error[storage_failure]: cannot listen on " << effective.server.host << ':'
              << effective.server.port << "\n";
    return 1;
  }
  return 0;
}

int run_simulate(const ober::AppConfig& config, const std::string& out_override) {
  const std::string path =
      out_override.empty() ? config.event_log_path : out_override;
  if (path.empty())
    ober::fail(ober::Errc::bad_config,
               "simulate needs an event log path (config 'event_log' or --out)");

  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  {
    std::ofstream truncate(path, std::ios::binary | std::ios::trunc);
    if (!truncate)
      ober::fail(ober::Errc::storage_failure, "cannot open '" + path + "' for writing");
  }

  const ober::ModelBundle model = ober::load_model(config);
  ober::EventLog log(path);
  const ober::RecommendationEngine engine(model.forest, model.catalog, model.alignments, log,
                                          config.recommender);
  const ober::SimulationSummary summary =
      ober::simulate(config.simulation, config.experiment, engine, log);
  std::cout << "simulated learners=" << summary.learners << " sessions=" << summary.sessions
            << " impressions=" << summary.impressions << " clicks=" << summary.clicks
            << " attempts=" << summary.attempts << " events=" << log.size() << " -> " << path
            << "\n";
  return 0;
}

int run_report(const ober::AppConfig& config, const std::string& log_override,
               const std::string& csv_path, const std::string& json_path,
               const std::string& growth_path) {
  const std::string path = log_override.empty() ? config.event_log_path : log_override;
  if (path.empty())
    ober::fail(ober::Errc::bad_config,
               "report needs an event log path (config 'event_log' or --log)");

  const ober::ModelBundle model = ober::load_model(config);
  const ober::EventLog log(path);
  const ober::ExperimentReport report = ober::build_report(
      config.experiment, log, log.snapshot(), model.alignments, model.forest);

  const std::string csv = ober::report_csv(report);
  std::cout << csv;
  if (!csv_path.empty()) write_text_file(csv_path, csv);
  if (!json_path.empty()) write_text_file(json_path, ober::to_json(report).dump(2) + "\n");
  if (!growth_path.empty()) write_text_file(growth_path, ober::growth_csv(report));
  return 0;
}

int run_audit(const ober::AppConfig& config) {
  const ober::ModelBundle model = ober::load_model(config);
  const ober::CoverageReport coverage = ober::audit_coverage(model.forest, model.alignments);
  for (const std::string& outcome_id : coverage.unverified_outcomes)
    std::cout << outcome_id << "\n";
  return 0;
}

int run_mastery(const ober::AppConfig& config, const std::string& learner_id) {
  const ober::ModelBundle model = ober::load_model(config);
  if (config.event_log_path.empty())
    ober::fail(ober::Errc::bad_config, "mastery needs a config with an 'event_log' path");
  const ober::EventLog log(config.event_log_path);
  const std::vector<ober::InteractionEvent> events =
      log.events_for(learner_id, log.snapshot());
  const ober::MasteryReport report =
      ober::compute_mastery(learner_id, events, model.alignments, model.forest);
  std::cout << ober::to_json(report).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"outcome-based educational recommender engine"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "path to the JSON config file")
      ->envname("OBER_CONFIG")
      ->required();

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string host_override;
  int port_override = -1;
  serve->add_option("--host", host_override, "bind address (overrides config)");
  serve->add_option("--port", port_override, "port (overrides config)");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic event log");
  std::uint64_t seed_override = 0;
  std::string out_override;
  auto* seed_option =
      simulate->add_option("--seed", seed_override, "simulation seed (overrides config)");
  simulate->add_option("--out", out_override, "event log to write (overrides config)");

  auto* report = app.add_subcommand("report", "compute per-group experiment metrics");
  std::string log_override, csv_path, json_path, growth_path;
  report->add_option("--log", log_override, "event log to read (overrides config)");
  report->add_option("--csv", csv_path, "also write the metrics table to this CSV file");
  report->add_option("--json", json_path, "also write the full report to this JSON file");
  report->add_option("--growth", growth_path, "also write the mastery growth series CSV");

  auto* audit = app.add_subcommand("audit", "list outcomes without verifying items");

  auto* mastery = app.add_subcommand("mastery", "print a learner's mastery report");
  std::string learner_id;
  mastery->add_option("learner", learner_id, "learner id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    ober::AppConfig config = ober::load_app_config(config_path);
    if (seed_option->count() > 0) config.simulation.seed = seed_override;

    if (serve->parsed()) return run_serve(config, host_override, port_override);
    if (simulate->parsed()) return run_simulate(config, out_override);
    if (report->parsed())
      return run_report(config, log_override, csv_path, json_path, growth_path);
    if (audit->parsed()) return run_audit(config);
    if (mastery->parsed()) return run_mastery(config, learner_id);
  } catch (const ober::Error& error) {
    std::cerr << "error[" << ober::to_string(error.code()) << "]: " << error.what() << "\n";
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
