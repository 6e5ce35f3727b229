#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "ober/recommender.hpp"

using nlohmann::json;
using namespace ober;
using helpers::ev;
using helpers::fails_with;

namespace {

// Four plain items and a one-node forest: enough for the CF scenarios, which
// never consult alignments.
struct CfWorld {
  OutcomeForest forest = load_outcomes(json::parse(R"([{"id":"o1","title":"O1"}])"));
  ItemCatalog catalog = load_items(json::parse(R"([
    {"id":"i1","title":"I1","type":"exercise"},
    {"id":"i2","title":"I2","type":"exercise"},
    {"id":"i3","title":"I3","type":"exercise"},
    {"id":"i4","title":"I4","type":"exercise"}
  ])"));
  AlignmentSet alignments;
  EventLog log;

  RecommendationEngine engine(RecommenderConfig config = {}) {
    return RecommendationEngine(forest, catalog, alignments, log, std::move(config));
  }

  void attempt(const std::string& learner, const std::string& item, double result) {
    log.append(ev(learner, item, EventKind::attempt, result,
                  static_cast<std::int64_t>(log.size()), "cf"));
  }
};

RecommendationRequest req(std::string learner, std::size_t n, const EventLog& log,
                          std::string method) {
  return RecommendationRequest{std::move(learner), n, log.snapshot(), std::move(method)};
}

}  // namespace

TEST_CASE("fixed trajectory serves the next uncompleted items in order") {
  CfWorld world;
  RecommenderConfig config;
  config.fixed_sequence = {"i1", "i2", "i3", "i4"};
  const RecommendationEngine engine = world.engine(config);

  CHECK(engine.recommend(req("fresh", 1, world.log, "fixed")).items ==
        std::vector<std::string>{"i1"});
  CHECK(engine.recommend(req("fresh", 3, world.log, "fixed")).items ==
        std::vector<std::string>{"i1", "i2", "i3"});

  world.attempt("l1", "i1", 0.9);   // completed
  world.attempt("l1", "i2", 0.3);   // attempted but failed: stays eligible
  CHECK(engine.recommend(req("l1", 2, world.log, "fixed")).items ==
        std::vector<std::string>{"i2", "i3"});

  for (const char* item : {"i1", "i2", "i3", "i4"}) world.attempt("l2", item, 1.0);
  CHECK(engine.recommend(req("l2", 2, world.log, "fixed")).items.empty());
}

TEST_CASE("fixed trajectory without a sequence is a configuration error") {
  CfWorld world;
  const RecommendationEngine engine = world.engine();
  CHECK(fails_with(Errc::empty_sequence,
                   [&] { engine.recommend(req("l1", 1, world.log, "fixed")); }));
}

TEST_CASE("dispatch rejects unknown methods and bad requests") {
  CfWorld world;
  const RecommendationEngine engine = world.engine();
  CHECK(fails_with(Errc::unknown_method,
                   [&] { engine.recommend(req("l1", 1, world.log, "ghost")); }));
  CHECK(fails_with(Errc::validation_failed,
                   [&] { engine.recommend(req("l1", 0, world.log, "cf")); }));
  CHECK(fails_with(Errc::validation_failed,
                   [&] { engine.recommend(req("", 1, world.log, "cf")); }));
}

TEST_CASE("engine construction validates its configuration") {
  CfWorld world;
  RecommenderConfig ghost;
  ghost.fixed_sequence = {"i1", "ghost"};
  CHECK(fails_with(Errc::bad_config, [&] { world.engine(ghost); }));

  RecommenderConfig repeated;
  repeated.fixed_sequence = {"i1", "i1"};
  CHECK(fails_with(Errc::bad_config, [&] { world.engine(repeated); }));

  RecommenderConfig zero_k;
  zero_k.cf_neighbor_count = 0;
  CHECK(fails_with(Errc::bad_config, [&] { world.engine(zero_k); }));

  RecommenderConfig bad_threshold;
  bad_threshold.completion_threshold = 1.5;
  CHECK(fails_with(Errc::bad_config, [&] { world.engine(bad_threshold); }));
}

TEST_CASE("collaborative filtering recommends what similar learners completed") {
  // A completed {i1,i2}; B completed {i1,i2,i3}; C completed {i4}.
  // cosine(A,B) = 2/sqrt(2*3) > 0 = cosine(A,C), so B's i3 wins.
  CfWorld world;
  for (const char* item : {"i1", "i2"}) world.attempt("A", item, 1.0);
  for (const char* item : {"i1", "i2", "i3"}) world.attempt("B", item, 1.0);
  world.attempt("C", "i4", 1.0);

  RecommenderConfig config;
  config.cf_neighbor_count = 1;
  const RecommendationEngine engine = world.engine(config);
  CHECK(engine.recommend(req("A", 1, world.log, "cf")).items ==
        std::vector<std::string>{"i3"});

  // Similarities are symmetric and match the hand values.
  const LogSnapshot snap = world.log.snapshot();
  CHECK(engine.interaction_similarity("A", "B", snap) ==
        doctest::Approx(2.0 / std::sqrt(6.0)));
  CHECK(engine.interaction_similarity("A", "C", snap) == 0.0);
}

TEST_CASE("cold learners fall back to completion-count popularity") {
  CfWorld world;
  for (int i = 0; i < 5; ++i) world.attempt("b" + std::to_string(i), "i1", 1.0);
  for (int i = 0; i < 3; ++i) world.attempt("b" + std::to_string(i), "i2", 1.0);

  const RecommendationEngine engine = world.engine();
  CHECK(engine.recommend(req("cold", 2, world.log, "cf")).items ==
        std::vector<std::string>{"i1", "i2"});
  // Zero-count items follow, ordered by id, so cold serving fills any n.
  CHECK(engine.recommend(req("cold", 4, world.log, "cf")).items ==
        std::vector<std::string>{"i1", "i2", "i3", "i4"});
}

TEST_CASE("a learner with no overlapping peers also gets the popularity ranking") {
  CfWorld world;
  world.attempt("loner", "i4", 0.2);     // attempted, not completed
  world.attempt("other1", "i1", 1.0);    // disjoint history
  world.attempt("other2", "i1", 1.0);

  const RecommendationEngine engine = world.engine();
  const auto items = engine.recommend(req("loner", 2, world.log, "cf")).items;
  CHECK(items == std::vector<std::string>{"i1", "i2"});
}

TEST_CASE("no method ever re-recommends a completed item") {
  CfWorld world;
  for (const char* item : {"i1", "i2", "i3", "i4"}) world.attempt("done", item, 1.0);
  world.attempt("peer", "i1", 1.0);
  world.attempt("peer", "i4", 1.0);

  RecommenderConfig config;
  config.fixed_sequence = {"i1", "i2", "i3", "i4"};
  const RecommendationEngine engine = world.engine(config);
  CHECK(engine.recommend(req("done", 4, world.log, "cf")).items.empty());
  CHECK(engine.recommend(req("done", 4, world.log, "fixed")).items.empty());

  std::mt19937 rng(13);
  const std::vector<std::string> items = {"i1", "i2", "i3", "i4"};
  for (int round = 0; round < 20; ++round) {
    const std::string learner = "r" + std::to_string(round);
    const std::size_t count = rng() % 5;
    for (std::size_t i = 0; i < count; ++i)
      world.attempt(learner, items[rng() % items.size()],
                    static_cast<double>(rng() % 101) / 100.0);

    const LogSnapshot snap = world.log.snapshot();
    const auto completed = world.log.attempt_profile(learner, snap).best_by_item;
    for (const char* method : {"fixed", "cf"}) {
      for (const std::string& item :
           engine.recommend(RecommendationRequest{learner, 10, snap, method}).items) {
        const auto it = completed.find(item);
        const bool is_completed = it != completed.end() && it->second >= 0.5;
        CHECK_FALSE(is_completed);
      }
    }
  }
}

TEST_CASE("similarity is symmetric on random histories") {
  CfWorld world;
  std::mt19937 rng(17);
  const std::vector<std::string> items = {"i1", "i2", "i3", "i4"};
  for (int l = 0; l < 8; ++l) {
    const std::string learner = "s" + std::to_string(l);
    const std::size_t count = rng() % 4;
    for (std::size_t i = 0; i < count; ++i)
      world.attempt(learner, items[rng() % items.size()],
                    static_cast<double>(rng() % 101) / 100.0);
  }
  const RecommendationEngine engine = world.engine();
  const LogSnapshot snap = world.log.snapshot();
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      const std::string la = "s" + std::to_string(a);
      const std::string lb = "s" + std::to_string(b);
      CHECK(engine.interaction_similarity(la, lb, snap) ==
            engine.interaction_similarity(lb, la, snap));
    }
  }
}

TEST_CASE("recommendations are deterministic for a pinned snapshot") {
  CfWorld world;
  for (const char* item : {"i1", "i2"}) world.attempt("A", item, 1.0);
  for (const char* item : {"i1", "i2", "i3"}) world.attempt("B", item, 1.0);

  RecommenderConfig config;
  config.fixed_sequence = {"i1", "i2", "i3", "i4"};
  const RecommendationEngine engine = world.engine(config);
  const LogSnapshot snap = world.log.snapshot();

  for (const char* method : {"fixed", "cf"}) {
    const auto first = engine.recommend(RecommendationRequest{"A", 3, snap, method}).items;
    world.attempt("noise", "i4", 1.0);  // later events must not leak into the snapshot
    const auto second = engine.recommend(RecommendationRequest{"A", 3, snap, method}).items;
    CHECK(first == second);
  }
}

TEST_CASE("knowledge-based filtering targets the weakest unmastered outcome") {
  const auto model = helpers::ablution_model();
  EventLog log;
  RecommenderConfig config;
  config.fixed_sequence = {"lesson_ablution_steps", "ablution_practice",
                           "ablution_obligatory",   "lesson_nullifiers",
                           "what_nullifies_ablution", "review_ablution"};
  const RecommendationEngine engine(model.forest, model.catalog, model.alignments, log,
                                    config);

  // Fresh learner: every outcome ties at 0, so DFS order decides; the first
  // outcome with promoting items is performing_ablution.
  CHECK(engine.recommend(req("fresh", 3, log, "kb")).items ==
        std::vector<std::string>{"lesson_ablution_steps", "review_ablution",
                                 "lesson_nullifiers"});

  // Mastering performing_ablution leaves ablution_nullifiers as the gap.
  log.append(ev("l1", "ablution_practice", EventKind::attempt, 1.0, 10, "kb"));
  CHECK(engine.recommend(req("l1", 1, log, "kb")).items ==
        std::vector<std::string>{"lesson_nullifiers"});
  // lesson_ablution_steps promotes only the mastered outcome: never served.
  const auto all = engine.recommend(req("l1", 6, log, "kb")).items;
  CHECK(std::find(all.begin(), all.end(), "lesson_ablution_steps") == all.end());
  CHECK(all == std::vector<std::string>{"lesson_nullifiers", "review_ablution"});
}

TEST_CASE("partial mastery ranks outcomes by ascending score") {
  const auto model = helpers::ablution_model();
  EventLog log;
  // performing_ablution at 0.9 (unmastered), ablution_nullifiers at 0.0.
  log.append(ev("l1", "ablution_practice", EventKind::attempt, 0.9, 10, "kb"));
  const RecommendationEngine engine(model.forest, model.catalog, model.alignments, log, {});

  // The 0.0 outcome wins over the 0.9 one; its first promoting item in
  // catalog order is lesson_nullifiers.
  CHECK(engine.recommend(req("l1", 1, log, "kb")).items ==
        std::vector<std::string>{"lesson_nullifiers"});
}

TEST_CASE("knowledge-based filtering falls back to the fixed sequence") {
  const auto model = helpers::ablution_model();
  EventLog log;
  RecommenderConfig config;
  config.fixed_sequence = {"lesson_ablution_steps", "ablution_practice",
                           "ablution_obligatory",   "lesson_nullifiers",
                           "what_nullifies_ablution", "review_ablution"};
  const RecommendationEngine engine(model.forest, model.catalog, model.alignments, log,
                                    config);

  // Master and complete every verified outcome; the remaining unmastered
  // outcomes have no promoting items, so KB consults the fixed sequence.
  std::int64_t ts = 0;
  for (const char* item : {"ablution_practice", "ablution_obligatory",
                           "what_nullifies_ablution"})
    log.append(ev("l1", item, EventKind::attempt, 1.0, ++ts, "kb"));

  const RecommendationList list = engine.recommend(req("l1", 3, log, "kb"));
  CHECK(list.method == "kb");
  CHECK(list.items == std::vector<std::string>{"lesson_ablution_steps", "lesson_nullifiers",
                                               "review_ablution"});
}
