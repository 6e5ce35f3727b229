#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ober/config.hpp"
#include "ober/event_log.hpp"
#include "ober/outcome_model.hpp"

namespace helpers {

inline std::filesystem::path data_dir() { return std::filesystem::path(OBER_DATA_DIR); }

// True when `fn` throws an Error carrying exactly `expected`.
inline bool fails_with(ober::Errc expected, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ober::Error& error) {
    return error.code() == expected;
  }
  return false;
}

// A unique scratch directory per call — and per process, so re-running the
// test binary never sees files a previous run left behind.
inline std::filesystem::path fresh_dir(const std::string& tag) {
  static std::atomic<std::uint64_t> counter{0};
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("ober_tests_" + tag + "_" + std::to_string(static_cast<long>(::getpid())) + "_" +
       std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline ober::InteractionEvent ev(std::string learner, std::optional<std::string> item,
                                 ober::EventKind kind, std::optional<double> result,
                                 std::int64_t ts, std::string recommender = "fixed") {
  return ober::InteractionEvent{std::move(learner), std::move(item), kind, result,
                                std::move(recommender), ts};
}

inline ober::ModelBundle load_bundle(const std::filesystem::path& dir) {
  ober::ModelBundle bundle;
  bundle.forest = ober::load_outcomes_file(dir / "outcomes.json");
  bundle.catalog = ober::load_items_file(dir / "items.json");
  bundle.alignments =
      ober::load_alignments_file(dir / "alignments.json", bundle.forest, bundle.catalog);
  return bundle;
}

inline ober::ModelBundle listing_model() { return load_bundle(data_dir() / "listings"); }
inline ober::ModelBundle demo_model() { return load_bundle(data_dir() / "demo"); }

// Five outcomes, six items, verifies + promotes mappings: the ablution branch
// most mastery/recommender tests exercise.
inline ober::ModelBundle ablution_model() {
  ober::ModelBundle bundle;
  bundle.forest = ober::load_outcomes(nlohmann::json::parse(R"([
    {"id": "pray_correctly", "title": "Pray correctly", "parent_id": null},
    {"id": "preconditions", "title": "Preconditions", "parent_id": "pray_correctly"},
    {"id": "ablution", "title": "Ablution", "parent_id": "preconditions"},
    {"id": "performing_ablution", "title": "Performing ablution", "parent_id": "ablution"},
    {"id": "ablution_nullifiers", "title": "Ablution nullifiers", "parent_id": "ablution"}
  ])"));
  bundle.catalog = ober::load_items(nlohmann::json::parse(R"([
    {"id": "lesson_ablution_steps", "title": "Lesson: ablution steps", "type": "lesson"},
    {"id": "ablution_practice", "title": "Practice ablution", "type": "exercise"},
    {"id": "ablution_obligatory", "title": "Obligatory actions", "type": "multiple_choice_quiz"},
    {"id": "lesson_nullifiers", "title": "Lesson: nullifiers", "type": "lesson"},
    {"id": "what_nullifies_ablution", "title": "What nullifies?", "type": "multiple_choice_quiz"},
    {"id": "review_ablution", "title": "Review both topics", "type": "lesson"}
  ])"));
  bundle.alignments = ober::load_alignments(nlohmann::json::parse(R"([
    {"outcome_id": "performing_ablution", "alignment_type": "verifies",
     "learning_item_ids": ["ablution_practice", "ablution_obligatory"]},
    {"outcome_id": "ablution_nullifiers", "alignment_type": "verifies",
     "learning_item_ids": ["what_nullifies_ablution"]},
    {"outcome_id": "performing_ablution", "alignment_type": "promotes",
     "learning_item_ids": ["lesson_ablution_steps", "review_ablution"]},
    {"outcome_id": "ablution_nullifiers", "alignment_type": "promotes",
     "learning_item_ids": ["lesson_nullifiers", "review_ablution"]}
  ])"), bundle.forest, bundle.catalog);
  return bundle;
}

}  // namespace helpers
