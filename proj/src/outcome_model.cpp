#include "ober/outcome_model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace ober {

namespace {

const std::vector<std::string> kNoChildren;

nlohmann::json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    fail(Errc::storage_failure, "cannot open " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::validation_failed, path.string() + ": " + e.what());
  }
}

std::string require_string(const nlohmann::json& record, const char* field,
                           const std::string& context) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    fail(Errc::validation_failed, context + ": missing or non-string field '" + field + "'");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& record, const char* field,
                                           const std::string& context) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) {
    return std::nullopt;
  }
  if (!it->is_string()) {
    fail(Errc::validation_failed, context + ": field '" + field + "' must be a string or null");
  }
  return it->get<std::string>();
}

void require_array(const nlohmann::json& records, const char* what) {
  if (!records.is_array()) {
    fail(Errc::validation_failed, std::string(what) + ": expected a JSON array of records");
  }
}

}  // namespace

const char* to_string(ItemKind kind) {
  switch (kind) {
    case ItemKind::exercise: return "exercise";
    case ItemKind::multiple_choice_quiz: return "multiple_choice_quiz";
    case ItemKind::lesson: return "lesson";
    case ItemKind::other: return "other";
  }
  return "other";
}

const char* to_string(AlignmentType type) {
  return type == AlignmentType::verifies ? "verifies" : "promotes";
}

bool OutcomeForest::contains(const std::string& id) const {
  return index_.count(id) != 0;
}

const Outcome& OutcomeForest::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    fail(Errc::unknown_outcome, "unknown outcome '" + id + "'");
  }
  return outcomes_[it->second];
}

const std::vector<std::string>& OutcomeForest::children(const std::string& id) const {
  if (!contains(id)) {
    fail(Errc::unknown_outcome, "unknown outcome '" + id + "'");
  }
  auto it = children_.find(id);
  return it == children_.end() ? kNoChildren : it->second;
}

std::vector<std::string> OutcomeForest::ancestors(const std::string& id) const {
  std::vector<std::string> chain;
  const Outcome* node = &at(id);
  while (node->parent_id) {
    chain.push_back(*node->parent_id);
    node = &at(*node->parent_id);
  }
  return chain;
}

std::size_t OutcomeForest::dfs_position(const std::string& id) const {
  auto it = dfs_pos_.find(id);
  if (it == dfs_pos_.end()) {
    fail(Errc::unknown_outcome, "unknown outcome '" + id + "'");
  }
  return it->second;
}

nlohmann::json OutcomeForest::to_records() const {
  nlohmann::json records = nlohmann::json::array();
  for (const Outcome& o : outcomes_) {
    nlohmann::json rec;
    rec["id"] = o.id;
    rec["title"] = o.title;
    if (o.description) {
      rec["description"] = *o.description;
    }
    rec["parent_id"] = o.parent_id ? nlohmann::json(*o.parent_id) : nlohmann::json(nullptr);
    records.push_back(std::move(rec));
  }
  return records;
}

OutcomeForest load_outcomes(const nlohmann::json& records) {
  require_array(records, "outcomes");
  OutcomeForest forest;
  for (const auto& record : records) {
    if (!record.is_object()) {
      fail(Errc::validation_failed, "outcomes: every record must be a JSON object");
    }
    Outcome o;
    o.id = require_string(record, "id", "outcome record");
    if (o.id.empty()) {
      fail(Errc::validation_failed, "outcome record: empty id");
    }
    o.title = optional_string(record, "title", "outcome '" + o.id + "'").value_or(o.id);
    o.description = optional_string(record, "description", "outcome '" + o.id + "'");
    o.parent_id = optional_string(record, "parent_id", "outcome '" + o.id + "'");
    if (forest.index_.count(o.id)) {
      fail(Errc::duplicate_id, "duplicate outcome id '" + o.id + "'");
    }
    forest.index_.emplace(o.id, forest.outcomes_.size());
    forest.outcomes_.push_back(std::move(o));
  }

  // Resolve parents and collect children in load order.
  for (const Outcome& o : forest.outcomes_) {
    if (!o.parent_id) {
      forest.roots_.push_back(o.id);
      continue;
    }
    if (!forest.index_.count(*o.parent_id)) {
      fail(Errc::missing_parent,
           "outcome '" + o.id + "' references missing parent '" + *o.parent_id + "'");
    }
    forest.children_[*o.parent_id].push_back(o.id);
  }

  // Depth-first order over the rooted part of the graph.
  forest.dfs_.reserve(forest.outcomes_.size());
  std::vector<std::string> stack(forest.roots_.rbegin(), forest.roots_.rend());
  while (!stack.empty()) {
    std::string id = std::move(stack.back());
    stack.pop_back();
    auto it = forest.children_.find(id);
    if (it != forest.children_.end()) {
      for (auto child = it->second.rbegin(); child != it->second.rend(); ++child) {
        stack.push_back(*child);
      }
    }
    forest.dfs_pos_.emplace(id, forest.dfs_.size());
    forest.dfs_.push_back(std::move(id));
  }

  // Nodes not reachable from any root sit on (or below) a parent cycle.
  if (forest.dfs_.size() != forest.outcomes_.size()) {
    for (const Outcome& o : forest.outcomes_) {
      if (forest.dfs_pos_.count(o.id)) {
        continue;
      }
      // Walk the parent chain until a node repeats, then report the loop.
      std::vector<std::string> path;
      std::map<std::string, std::size_t> seen;
      std::string cur = o.id;
      while (!seen.count(cur)) {
        seen.emplace(cur, path.size());
        path.push_back(cur);
        cur = *forest.outcomes_[forest.index_.at(cur)].parent_id;
      }
      std::ostringstream msg;
      msg << "outcome parent cycle: ";
      for (std::size_t i = seen.at(cur); i < path.size(); ++i) {
        msg << path[i] << " -> ";
      }
      msg << cur;
      fail(Errc::cycle_detected, msg.str());
    }
  }
  return forest;
}

ItemKindAliases ItemKindAliases::defaults() {
  ItemKindAliases aliases;
  aliases.table = {
      {"exercise", ItemKind::exercise},
      {"multiple_choice_quiz", ItemKind::multiple_choice_quiz},
      {"mutlipce_choice_quiz", ItemKind::multiple_choice_quiz},
      {"lesson", ItemKind::lesson},
  };
  return aliases;
}

bool ItemCatalog::contains(const std::string& id) const {
  return index_.count(id) != 0;
}

const Item& ItemCatalog::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    fail(Errc::not_found, "unknown item '" + id + "'");
  }
  return items_[it->second];
}

std::size_t ItemCatalog::position(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    fail(Errc::not_found, "unknown item '" + id + "'");
  }
  return it->second;
}

nlohmann::json ItemCatalog::to_records() const {
  nlohmann::json records = nlohmann::json::array();
  for (const Item& item : items_) {
    records.push_back({
        {"id", item.id},
        {"title", item.title},
        {"type", item.kind == ItemKind::other ? item.raw_kind : to_string(item.kind)},
    });
  }
  return records;
}

ItemCatalog load_items(const nlohmann::json& records, const ItemKindAliases& aliases,
                       bool strict) {
  require_array(records, "items");
  ItemCatalog catalog;
  for (const auto& record : records) {
    if (!record.is_object()) {
      fail(Errc::validation_failed, "items: every record must be a JSON object");
    }
    Item item;
    item.id = require_string(record, "id", "item record");
    if (item.id.empty()) {
      fail(Errc::validation_failed, "item record: empty id");
    }
    item.title = optional_string(record, "title", "item '" + item.id + "'").value_or(item.id);
    item.raw_kind = optional_string(record, "type", "item '" + item.id + "'").value_or("");
    auto alias = aliases.table.find(item.raw_kind);
    if (alias != aliases.table.end()) {
      item.kind = alias->second;
    } else if (strict) {
      fail(Errc::unknown_kind,
           "item '" + item.id + "' has unknown type '" + item.raw_kind + "'");
    } else {
      item.kind = ItemKind::other;
    }
    if (catalog.index_.count(item.id)) {
      fail(Errc::duplicate_id, "duplicate item id '" + item.id + "'");
    }
    catalog.index_.emplace(item.id, catalog.items_.size());
    catalog.items_.push_back(std::move(item));
  }
  return catalog;
}

const std::vector<std::string>& AlignmentSet::items_for(const std::string& outcome_id,
                                                        AlignmentType type) const {
  auto it = index_.find({outcome_id, type});
  return it == index_.end() ? kNoChildren : mappings_[it->second].item_ids;
}

bool AlignmentSet::has_mapping(const std::string& outcome_id, AlignmentType type) const {
  return index_.count({outcome_id, type}) != 0;
}

nlohmann::json AlignmentSet::to_records() const {
  nlohmann::json records = nlohmann::json::array();
  for (const AlignmentMapping& mapping : mappings_) {
    records.push_back({
        {"outcome_id", mapping.outcome_id},
        {"learning_item_ids", mapping.item_ids},
        {"alignment_type", to_string(mapping.type)},
    });
  }
  return records;
}

AlignmentSet load_alignments(const nlohmann::json& records, const OutcomeForest& forest,
                             const ItemCatalog& catalog) {
  require_array(records, "alignments");
  AlignmentSet set;
  for (const auto& record : records) {
    if (!record.is_object()) {
      fail(Errc::validation_failed, "alignments: every record must be a JSON object");
    }
    AlignmentMapping mapping;
    mapping.outcome_id = require_string(record, "outcome_id", "alignment record");
    const std::string context = "alignment for '" + mapping.outcome_id + "'";

    // Records without an explicit type are verification mappings.
    if (auto type = optional_string(record, "alignment_type", context)) {
      if (*type == "verifies") {
        mapping.type = AlignmentType::verifies;
      } else if (*type == "promotes") {
        mapping.type = AlignmentType::promotes;
      } else {
        fail(Errc::validation_failed, context + ": unknown alignment_type '" + *type + "'");
      }
    }

    auto ids = record.find("learning_item_ids");
    if (ids == record.end() || !ids->is_array() || ids->empty()) {
      fail(Errc::validation_failed, context + ": learning_item_ids must be a non-empty array");
    }
    std::set<std::string> seen;
    for (const auto& id : *ids) {
      if (!id.is_string()) {
        fail(Errc::validation_failed, context + ": learning_item_ids entries must be strings");
      }
      auto item_id = id.get<std::string>();
      if (!seen.insert(item_id).second) {
        fail(Errc::validation_failed, context + ": item '" + item_id + "' listed twice");
      }
      mapping.item_ids.push_back(std::move(item_id));
    }

    if (!forest.contains(mapping.outcome_id)) {
      fail(Errc::dangling_outcome,
           "alignment references unknown outcome '" + mapping.outcome_id + "'");
    }
    for (const std::string& item_id : mapping.item_ids) {
      if (!catalog.contains(item_id)) {
        fail(Errc::dangling_item, context + ": unknown item '" + item_id + "'");
      }
    }
    auto key = std::make_pair(mapping.outcome_id, mapping.type);
    if (set.index_.count(key)) {
      fail(Errc::duplicate_mapping,
           "second " + std::string(to_string(mapping.type)) + " mapping for outcome '" +
               mapping.outcome_id + "'");
    }
    set.index_.emplace(std::move(key), set.mappings_.size());
    set.mappings_.push_back(std::move(mapping));
  }
  return set;
}

OutcomeForest load_outcomes_file(const std::filesystem::path& path) {
  return load_outcomes(parse_file(path));
}

ItemCatalog load_items_file(const std::filesystem::path& path, const ItemKindAliases& aliases,
                            bool strict) {
  return load_items(parse_file(path), aliases, strict);
}

AlignmentSet load_alignments_file(const std::filesystem::path& path, const OutcomeForest& forest,
                                  const ItemCatalog& catalog) {
  return load_alignments(parse_file(path), forest, catalog);
}

CoverageReport audit_coverage(const OutcomeForest& forest, const AlignmentSet& alignments) {
  CoverageReport report;
  for (const std::string& id : forest.dfs_order()) {
    std::size_t count = alignments.items_for(id, AlignmentType::verifies).size();
    report.verifying_item_counts.emplace(id, count);
    if (count == 0) {
      report.unverified_outcomes.push_back(id);
    }
  }
  return report;
}

nlohmann::json to_json(const CoverageReport& report) {
  return {
      {"unverified_outcomes", report.unverified_outcomes},
      {"verifying_item_counts", report.verifying_item_counts},
  };
}

}  // namespace ober
