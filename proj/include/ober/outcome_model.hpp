#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ober/errors.hpp"

namespace ober {

// A learning outcome; `parent_id` encodes the recursive refinement relation,
// so the full set of outcomes forms a forest.
struct Outcome {
  std::string id;
  std::string title;
  std::optional<std::string> description;
  std::optional<std::string> parent_id;
};

enum class ItemKind { exercise, multiple_choice_quiz, lesson, other };

const char* to_string(ItemKind kind);

struct Item {
  std::string id;
  std::string title;
  ItemKind kind = ItemKind::other;
  // Original type string; kept so catalogs with nonstandard kinds round-trip.
  std::string raw_kind;
};

enum class AlignmentType { verifies, promotes };

const char* to_string(AlignmentType type);

// Links one outcome to the items that verify (assess) or promote (teach) it.
struct AlignmentMapping {
  std::string outcome_id;
  std::vector<std::string> item_ids;
  AlignmentType type = AlignmentType::verifies;
};

// Validated outcome forest. Immutable after load; traversal orders are fixed
// by insertion order so downstream consumers see deterministic sequences.
class OutcomeForest {
 public:
  OutcomeForest() = default;

  bool contains(const std::string& id) const;
  const Outcome& at(const std::string& id) const;  // throws unknown_outcome

  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  const std::vector<std::string>& roots() const { return roots_; }
  const std::vector<std::string>& children(const std::string& id) const;
  // Chain of parents, nearest first; empty for roots.
  std::vector<std::string> ancestors(const std::string& id) const;
  // Depth-first order: roots in load order, children in load order.
  const std::vector<std::string>& dfs_order() const { return dfs_; }
  std::size_t dfs_position(const std::string& id) const;

  std::size_t size() const { return outcomes_.size(); }
  bool empty() const { return outcomes_.empty(); }

  nlohmann::json to_records() const;

  friend OutcomeForest load_outcomes(const nlohmann::json& records);

 private:
  std::vector<Outcome> outcomes_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> roots_;
  std::map<std::string, std::vector<std::string>> children_;
  std::vector<std::string> dfs_;
  std::map<std::string, std::size_t> dfs_pos_;
};

// Maps raw item type strings to canonical kinds. The defaults cover the
// canonical spellings plus known data-entry variants seen in production
// catalogs ("mutlipce_choice_quiz").
struct ItemKindAliases {
  std::map<std::string, ItemKind> table;
  static ItemKindAliases defaults();
};

class ItemCatalog {
 public:
  ItemCatalog() = default;

  bool contains(const std::string& id) const;
  const Item& at(const std::string& id) const;  // throws not_found
  const std::vector<Item>& items() const { return items_; }
  // Position in catalog load order; used as a deterministic tie-break.
  std::size_t position(const std::string& id) const;

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  nlohmann::json to_records() const;

  friend ItemCatalog load_items(const nlohmann::json& records,
                                const ItemKindAliases& aliases, bool strict);

 private:
  std::vector<Item> items_;
  std::map<std::string, std::size_t> index_;
};

// Validated alignment mappings; at most one mapping per (outcome, type).
class AlignmentSet {
 public:
  AlignmentSet() = default;

  const std::vector<AlignmentMapping>& mappings() const { return mappings_; }
  // Items aligned to `outcome_id` with the given type; empty when unmapped.
  const std::vector<std::string>& items_for(const std::string& outcome_id,
                                            AlignmentType type) const;
  bool has_mapping(const std::string& outcome_id, AlignmentType type) const;

  nlohmann::json to_records() const;

  friend AlignmentSet load_alignments(const nlohmann::json& records,
                                      const OutcomeForest& forest,
                                      const ItemCatalog& catalog);

 private:
  std::vector<AlignmentMapping> mappings_;
  std::map<std::pair<std::string, AlignmentType>, std::size_t> index_;
};

struct CoverageReport {
  // Outcomes with zero verifying items, in forest DFS order.
  std::vector<std::string> unverified_outcomes;
  // Verifying-item count for every outcome in the forest.
  std::map<std::string, std::size_t> verifying_item_counts;
};

nlohmann::json to_json(const CoverageReport& report);

// Loaders validate eagerly; everything downstream assumes validated inputs.
OutcomeForest load_outcomes(const nlohmann::json& records);
ItemCatalog load_items(const nlohmann::json& records,
                       const ItemKindAliases& aliases = ItemKindAliases::defaults(),
                       bool strict = false);
AlignmentSet load_alignments(const nlohmann::json& records, const OutcomeForest& forest,
                             const ItemCatalog& catalog);

OutcomeForest load_outcomes_file(const std::filesystem::path& path);
ItemCatalog load_items_file(const std::filesystem::path& path,
                            const ItemKindAliases& aliases = ItemKindAliases::defaults(),
                            bool strict = false);
AlignmentSet load_alignments_file(const std::filesystem::path& path,
                                  const OutcomeForest& forest, const ItemCatalog& catalog);

// Flags every outcome that no item verifies.
CoverageReport audit_coverage(const OutcomeForest& forest, const AlignmentSet& alignments);

}  // namespace ober
