#include "ober/errors.hpp"

namespace ober {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::duplicate_id: return "duplicate_id";
    case Errc::missing_parent: return "missing_parent";
    case Errc::cycle_detected: return "cycle_detected";
    case Errc::unknown_kind: return "unknown_kind";
    case Errc::dangling_outcome: return "dangling_outcome";
    case Errc::dangling_item: return "dangling_item";
    case Errc::duplicate_mapping: return "duplicate_mapping";
    case Errc::unknown_outcome: return "unknown_outcome";
    case Errc::validation_failed: return "validation_failed";
    case Errc::storage_failure: return "storage_failure";
    case Errc::unknown_method: return "unknown_method";
    case Errc::empty_sequence: return "empty_sequence";
    case Errc::weight_undefined: return "weight_undefined";
    case Errc::zero_weight_sum: return "zero_weight_sum";
    case Errc::empty_group: return "empty_group";
    case Errc::no_impressions: return "no_impressions";
    case Errc::not_found: return "not_found";
    case Errc::bad_config: return "bad_config";
  }
  return "unknown_error";
}

}  // namespace ober
