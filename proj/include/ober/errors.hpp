#pragma once

#include <stdexcept>
#include <string>

namespace ober {

// Closed set of failure codes surfaced by the engine. The CLI prints them and
// the HTTP layer maps them onto status codes.
enum class Errc {
  duplicate_id,
  missing_parent,
  cycle_detected,
  unknown_kind,
  dangling_outcome,
  dangling_item,
  duplicate_mapping,
  unknown_outcome,
  validation_failed,
  storage_failure,
  unknown_method,
  empty_sequence,
  weight_undefined,
  zero_weight_sum,
  empty_group,
  no_impressions,
  not_found,
  bad_config,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ober
