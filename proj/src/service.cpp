#include "ober/service.hpp"

#include <chrono>
#include <cstdlib>
#include <optional>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ober/errors.hpp"
#include "ober/mastery.hpp"
#include "ober/recommender.hpp"

namespace ober {

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

struct HttpError {
  int status;
  const char* code;
};

HttpError http_error(Errc code) {
  switch (code) {
    case Errc::not_found:
      return {404, "not_found"};
    case Errc::unknown_method:
    case Errc::bad_config:
    case Errc::empty_sequence:
    case Errc::weight_undefined:
    case Errc::zero_weight_sum:
      return {400, "invalid_argument"};
    case Errc::empty_group:
    case Errc::no_impressions:
      return {409, "conflict"};
    case Errc::storage_failure:
      return {500, "storage"};
    default:
      return {422, "validation"};
  }
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

// Routes any thrown Error to the envelope format so handlers stay linear.
template <typename Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& error) {
      const HttpError mapped = http_error(error.code());
      send_error(res, mapped.status, mapped.code, error.what());
    } catch (const std::exception& error) {
      send_error(res, 500, "internal", error.what());
    }
  };
}

}  // namespace

struct Service::Impl {
  AppConfig config;
  std::unique_ptr<EventLog> log;
  std::optional<ModelBundle> model;
  std::string model_error;
  std::unique_ptr<RecommendationEngine> engine;
  httplib::Server server;
  std::thread worker;
};

Service::Service(const AppConfig& config) : impl_(std::make_unique<Impl>()) {
  impl_->config = config;
  impl_->log = config.event_log_path.empty()
                   ? std::make_unique<EventLog>()
                   : std::make_unique<EventLog>(config.event_log_path);
  try {
    impl_->model = load_model(config);
    impl_->engine = std::make_unique<RecommendationEngine>(
        impl_->model->forest, impl_->model->catalog, impl_->model->alignments, *impl_->log,
        config.recommender);
  } catch (const Error& error) {
    impl_->model.reset();
    impl_->engine.reset();
    impl_->model_error = error.what();
  }

  Impl* impl = impl_.get();
  auto require_model = [impl](httplib::Response& res) {
    if (impl->model) return true;
    send_error(res, 503, "model_not_loaded",
               impl->model_error.empty() ? "model is not loaded" : impl->model_error);
    return false;
  };

  impl->server.Get("/v1/health", guarded([impl](const httplib::Request&,
                                                httplib::Response& res) {
    send_json(res, 200, {{"status", impl->model ? "ok" : "degraded"},
                         {"events", impl->log->size()}});
  }));

  impl->server.Get(
      "/v1/learners/:id/recommendations",
      guarded([impl, require_model](const httplib::Request& req, httplib::Response& res) {
        if (!require_model(res)) return;
        const std::string learner_id = req.path_params.at("id");

        std::size_t count = impl->config.recommendation_count;
        if (req.has_param("n")) {
          const std::string raw = req.get_param_value("n");
          char* end = nullptr;
          const unsigned long long parsed = std::strtoull(raw.c_str(), &end, 10);
          if (raw.empty() || end == nullptr || *end != '\0' || parsed < 1 ||
              parsed > 1000000ULL) {
            send_error(res, 400, "invalid_argument", "n must be an integer in [1,1000000]");
            return;
          }
          count = static_cast<std::size_t>(parsed);
        }

        const GroupSpec& group = assign_group(learner_id, impl->config.experiment);
        const RecommendationList list = impl->engine->recommend(
            RecommendationRequest{learner_id, count, impl->log->snapshot(), group.method});

        // Impressions are appended before the response leaves the server, so
        // a delivered list always has durable exposure records. Client clock
        // skew cannot reorder a learner's history: we never stamp earlier
        // than their latest event.
        std::int64_t stamp = now_ms();
        if (const auto last = impl->log->last_timestamp(learner_id); last && *last > stamp)
          stamp = *last;
        std::vector<InteractionEvent> impressions;
        impressions.reserve(list.items.size());
        for (const std::string& item_id : list.items)
          impressions.push_back(InteractionEvent{learner_id, item_id, EventKind::impression,
                                                 std::nullopt, group.method, stamp});
        if (!impressions.empty()) impl->log->append_batch(impressions);

        send_json(res, 200, {{"learner_id", learner_id},
                             {"method", list.method},
                             {"items", list.items},
                             {"generated_at_ms", list.generated_at_ms}});
      }));

  impl->server.Post(
      "/v1/interactions",
      guarded([impl, require_model](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
          body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::parse_error&) {
          send_error(res, 422, "validation", "request body is not valid JSON");
          return;
        }
        const InteractionEvent event = event_from_json(body);
        if (impl->config.strict_items && event.item_id) {
          if (!require_model(res)) return;
          if (!impl->model->catalog.contains(*event.item_id)) {
            send_error(res, 422, "validation",
                       "unknown item '" + *event.item_id + "'");
            return;
          }
        }
        const std::uint64_t seq = impl->log->append(event);
        send_json(res, 201, {{"seq", seq}});
      }));

  impl->server.Get(
      "/v1/learners/:id/mastery",
      guarded([impl, require_model](const httplib::Request& req, httplib::Response& res) {
        if (!require_model(res)) return;
        const std::string learner_id = req.path_params.at("id");
        const std::vector<InteractionEvent> events =
            impl->log->events_for(learner_id, impl->log->snapshot());
        send_json(res, 200,
                  to_json(compute_mastery(learner_id, events, impl->model->alignments,
                                          impl->model->forest)));
      }));

  impl->server.Get(
      "/v1/experiments/:id/report",
      guarded([impl, require_model](const httplib::Request& req, httplib::Response& res) {
        if (!require_model(res)) return;
        const std::string experiment_id = req.path_params.at("id");
        if (experiment_id != impl->config.experiment.id) {
          send_error(res, 404, "not_found",
                     "unknown experiment '" + experiment_id + "'");
          return;
        }
        send_json(res, 200,
                  to_json(build_report(impl->config.experiment, *impl->log,
                                       impl->log->snapshot(), impl->model->alignments,
                                       impl->model->forest)));
      }));

  impl->server.Get("/v1/coverage",
                   guarded([impl, require_model](const httplib::Request&,
                                                 httplib::Response& res) {
                     if (!require_model(res)) return;
                     send_json(res, 200,
                               to_json(audit_coverage(impl->model->forest,
                                                      impl->model->alignments)));
                   }));
}

Service::~Service() { stop(); }

bool Service::run(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int Service::start_background(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) fail(Errc::storage_failure, "cannot bind a port on " + host);
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

bool Service::model_loaded() const { return impl_->model.has_value(); }

EventLog& Service::log() { return *impl_->log; }

}  // namespace ober
