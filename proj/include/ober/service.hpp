#pragma once

#include <memory>
#include <string>

#include "ober/config.hpp"
#include "ober/event_log.hpp"

namespace ober {

// HTTP/JSON front end over the engine. All endpoints live under /v1 and
// answer application/json; errors use {"error": {"code", "message"}} with a
// closed code set (invalid_argument, validation, not_found, conflict,
// model_not_loaded, storage, internal).
//
// Construction replays the event log (fatal when the file is corrupt) and
// tries to load the model; a model that fails to load leaves the service
// running with every model-dependent endpoint answering 503 model_not_loaded.
class Service {
 public:
  explicit Service(const AppConfig& config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Blocking listen on the given address; returns when stop() is called.
  // False when the port cannot be bound.
  bool run(const std::string& host, int port);
  // Binds an OS-assigned port and serves from a background thread; returns
  // the bound port. Pair with stop().
  int start_background(const std::string& host);
  void stop();

  bool model_loaded() const;
  EventLog& log();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ober
