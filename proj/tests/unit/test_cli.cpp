#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <doctest.h>

#include "helpers.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the installed binary through the shell, capturing both streams.
CommandResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out_path = scratch / "stdout.txt";
  const fs::path err_path = scratch / "stderr.txt";
  const std::string command = std::string("\"") + OBER_BIN + "\" " + args + " > \"" +
                              out_path.string() + "\" 2> \"" + err_path.string() + "\"";
  const int raw = std::system(command.c_str());
  CommandResult result;
  result.exit_code = (raw != -1 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
  result.out = helpers::read_file(out_path);
  result.err = helpers::read_file(err_path);
  return result;
}

json model_section(const fs::path& model_dir) {
  return {{"outcomes", (model_dir / "outcomes.json").string()},
          {"items", (model_dir / "items.json").string()},
          {"alignments", (model_dir / "alignments.json").string()}};
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path path = dir / "config.json";
  helpers::write_file(path, doc.dump(2) + "\n");
  return path;
}

// A config that simulates quickly: the full demo model with a short fixed
// sequence and a small cohort.
json small_sim_config(const fs::path& dir) {
  return {{"model", model_section(helpers::data_dir() / "demo")},
          {"event_log", (dir / "sim.jsonl").string()},
          {"recommender",
           {{"fixed",
             {{"sequence",
               {"lesson_ablution_steps", "ablution_practice", "ablution_obligatory",
                "lesson_nullifiers", "what_nullifies_ablution", "quiz_prayer_times"}}}}}},
          {"simulation",
           {{"learners", 48}, {"max_sessions", 3}, {"items_per_recommendation", 3},
            {"seed", 42}}}};
}

}  // namespace

TEST_CASE("audit prints outcomes without verifying items, one per line") {
  const fs::path dir = helpers::fresh_dir("cli_audit");
  const fs::path config =
      write_config(dir, {{"model", model_section(helpers::data_dir() / "listings")}});

  const CommandResult result = run_cli("-c \"" + config.string() + "\" audit", dir);
  CHECK(result.exit_code == 0);
  CHECK(result.out == "pray_correctly\npreconditions\nablution\n");
  CHECK(result.err.empty());
}

TEST_CASE("simulate is reproducible for a fixed seed") {
  const fs::path dir = helpers::fresh_dir("cli_sim");
  const fs::path config = write_config(dir, small_sim_config(dir));
  const std::string base = "-c \"" + config.string() + "\" simulate";

  const fs::path first = dir / "a.jsonl";
  const fs::path second = dir / "b.jsonl";
  const fs::path other = dir / "c.jsonl";

  const CommandResult run_a =
      run_cli(base + " --seed 42 --out \"" + first.string() + "\"", dir);
  CHECK(run_a.exit_code == 0);
  CHECK(run_a.out.find("simulated learners=48") == 0);

  const CommandResult run_b =
      run_cli(base + " --seed 42 --out \"" + second.string() + "\"", dir);
  CHECK(run_b.exit_code == 0);

  const std::string bytes_a = helpers::read_file(first);
  CHECK_FALSE(bytes_a.empty());
  CHECK(bytes_a == helpers::read_file(second));

  const CommandResult run_c =
      run_cli(base + " --seed 7 --out \"" + other.string() + "\"", dir);
  CHECK(run_c.exit_code == 0);
  CHECK(bytes_a != helpers::read_file(other));
}

TEST_CASE("report renders the metrics table and optional files") {
  const fs::path dir = helpers::fresh_dir("cli_report");
  const fs::path config = write_config(dir, small_sim_config(dir));

  CHECK(run_cli("-c \"" + config.string() + "\" simulate", dir).exit_code == 0);

  const fs::path csv = dir / "report.csv";
  const fs::path growth = dir / "growth.csv";
  const fs::path as_json = dir / "report.json";
  const CommandResult result = run_cli(
      "-c \"" + config.string() + "\" report --csv \"" + csv.string() + "\" --growth \"" +
          growth.string() + "\" --json \"" + as_json.string() + "\"",
      dir);
  CHECK(result.exit_code == 0);
  CHECK(result.out.rfind("method,learners,retention,relevance,mastery\n", 0) == 0);
  CHECK(std::count(result.out.begin(), result.out.end(), '\n') == 4);
  CHECK(helpers::read_file(csv) == result.out);
  CHECK(helpers::read_file(growth).rfind("group,session_index,mean_mastery\n", 0) == 0);

  const json report = json::parse(helpers::read_file(as_json));
  CHECK(report.at("experiment_id") == "default");
  CHECK(report.at("groups").size() == 3);
}

TEST_CASE("report refuses an event log with no learners") {
  const fs::path dir = helpers::fresh_dir("cli_empty");
  const fs::path config = write_config(dir, small_sim_config(dir));
  const fs::path empty = dir / "empty.jsonl";
  helpers::write_file(empty, "");

  const CommandResult result =
      run_cli("-c \"" + config.string() + "\" report --log \"" + empty.string() + "\"", dir);
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("error[empty_group]") != std::string::npos);
}

TEST_CASE("mastery prints a learner's full score map as JSON") {
  const fs::path dir = helpers::fresh_dir("cli_mastery");
  const fs::path config = write_config(dir, small_sim_config(dir));
  CHECK(run_cli("-c \"" + config.string() + "\" simulate", dir).exit_code == 0);

  const CommandResult result =
      run_cli("-c \"" + config.string() + "\" mastery l000001", dir);
  CHECK(result.exit_code == 0);
  const json body = json::parse(result.out);
  CHECK(body.at("learner_id") == "l000001");
  CHECK(body.at("scores").size() == 10);
  CHECK(body.at("total").is_number());
}

TEST_CASE("configuration problems exit nonzero with a coded message") {
  const fs::path dir = helpers::fresh_dir("cli_errors");

  const CommandResult missing = run_cli("-c /nonexistent/config.json audit", dir);
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.find("error[storage_failure]") != std::string::npos);

  const fs::path config = write_config(dir, small_sim_config(dir));
  const CommandResult no_subcommand = run_cli("-c \"" + config.string() + "\"", dir);
  CHECK(no_subcommand.exit_code != 0);
}
