#include <doctest.h>

#include <random>

#include "familiar/perception.hpp"

using namespace familiar;

namespace {
std::vector<std::string> apply(WorldState& ws, std::vector<Percept> ps, Tick t) { return ws.apply_percepts(ps, t); }

SemanticSensorDef predicate(std::string id, std::string key, CompareOp op, SensorValue c) {
  return {std::move(id), "n", "icon", {Extractor::Kind::Predicate, std::move(key), op, std::move(c)}};
}
}  // namespace

TEST_CASE("apply_percepts reports changed keys") {
  WorldState ws;
  CHECK(apply(ws, {{"person_visible", true}}, 1) == std::vector<std::string>{"person_visible"});
  CHECK(apply(ws, {{"person_visible", true}}, 2).empty());

  WorldState w2;
  apply(w2, {{"a", 1}}, 1);
  CHECK(apply(w2, {{"a", 2}, {"b", 3}}, 2) == std::vector<std::string>{"a", "b"});
  CHECK(w2.get("a") == SensorValue(2));
}

TEST_CASE("apply_percepts details") {
  WorldState ws;
  SUBCASE("a key repeated in one batch is reported once, last write wins") {
    CHECK(apply(ws, {{"a", 1}, {"a", 2}}, 1) == std::vector<std::string>{"a"});
    CHECK(ws.get("a") == SensorValue(2));
  }
  SUBCASE("writing none to an absent key is not a change") {
    CHECK(apply(ws, {{"a", SensorValue::none()}}, 1).empty());
  }
  SUBCASE("stamps ticks and keeps them monotone") {
    apply(ws, {{"a", 1}}, 5);
    CHECK(ws.entries().at("a").tick == 5);
    apply(ws, {{"a", 2}}, 3);  // stale tick is clamped
    CHECK(ws.entries().at("a").tick == 5);
    CHECK(ws.latest_tick() == 5);
  }
  SUBCASE("absent keys read none") {
    CHECK(ws.get("missing").is_none());
    CHECK_FALSE(ws.has("missing"));
  }
}

TEST_CASE("clear_keys") {
  WorldState ws;
  apply(ws, {{"a", SensorValue::label("x")}}, 1);
  const std::vector<std::string> keys{"a", "absent"};
  ws.clear_keys(keys);
  CHECK(ws.get("a").is_none());
  CHECK_FALSE(ws.has("a"));
  CHECK(ws.entries().count("absent") == 0);
  CHECK(apply(ws, {{"a", SensorValue::label("x")}}, 2) == std::vector<std::string>{"a"});
  CHECK(ws.get("a") == SensorValue::label("x"));
}

TEST_CASE("compare operators") {
  CHECK(compare(3.0, CompareOp::Le, 5.0));
  CHECK(compare(5.0, CompareOp::Le, 5.0));
  CHECK_FALSE(compare(5.1, CompareOp::Le, 5.0));
  CHECK(compare(5.0, CompareOp::Ge, 5.0));
  CHECK_FALSE(compare(SensorValue::label("a"), CompareOp::Le, 5.0));
  CHECK_FALSE(compare(SensorValue::none(), CompareOp::Ge, 5.0));
  CHECK(compare(SensorValue::label("a"), CompareOp::Ne, 5.0));
  CHECK(compare(SensorValue::label("a"), CompareOp::Eq, SensorValue::label("a")));
  CompareOp op;
  CHECK(parse_compare_op("ge", op));
  CHECK(op == CompareOp::Ge);
  CHECK_FALSE(parse_compare_op(">=", op));
}

TEST_CASE("extract_sensors examples") {
  WorldState ws;
  apply(ws, {{"distance_to_avatar", 3.2}, {"region.kitchen", true}, {"region.hall", true}, {"regionless", true}}, 1);
  const std::vector<SemanticSensorDef> defs{
      predicate("person_visible", "distance_to_avatar", CompareOp::Le, 5.0),
      {"last_intent", "n", "icon", {Extractor::Kind::Copy, "last_intent", CompareOp::Eq, {}}},
      {"known", "n", "icon", {Extractor::Kind::Count, "region.", CompareOp::Eq, {}}},
      predicate("absent_pred", "nothing_here", CompareOp::Ne, 1.0),
  };
  const auto snap = extract_sensors(ws, defs);
  CHECK(snap.values.size() == defs.size());
  CHECK(snap.get("person_visible") == SensorValue(true));
  CHECK(snap.get("last_intent").is_none());
  CHECK(snap.get("known") == SensorValue(2));
  CHECK(snap.get("absent_pred") == SensorValue(false));  // absent key: predicate is false even for ne
  CHECK(snap.get("undeclared").is_none());
}

TEST_CASE("count ignores keys cleared to none") {
  WorldState ws;
  apply(ws, {{"region.a", true}, {"region.b", true}}, 1);
  const std::vector<std::string> k{"region.a"};
  ws.clear_keys(k);
  const SemanticSensorDef def{"known", "n", "icon", {Extractor::Kind::Count, "region.", CompareOp::Eq, {}}};
  CHECK(extract_sensor(ws, def) == SensorValue(1));
}

TEST_CASE("property: predicate extractor equals direct comparison") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> value(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = value(rng);
    const double c = i % 10 == 0 ? x : value(rng);  // include the boundary
    const auto op = static_cast<CompareOp>(i % 4);
    WorldState ws;
    apply(ws, {{"v", x}}, 0);
    const bool expected = op == CompareOp::Eq ? x == c : op == CompareOp::Ne ? x != c : op == CompareOp::Le ? x <= c : x >= c;
    CHECK(extract_sensor(ws, predicate("s", "v", op, c)) == SensorValue(expected));
  }
}

TEST_CASE("property: incremental application equals building from the merged entries") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> keys{"a", "b", "region.x", "region.y", "d"};
  const std::vector<SemanticSensorDef> defs{
      {"ca", "n", "i", {Extractor::Kind::Copy, "a", CompareOp::Eq, {}}},
      {"cnt", "n", "i", {Extractor::Kind::Count, "region.", CompareOp::Eq, {}}},
      predicate("pd", "d", CompareOp::Ge, 0.0),
  };
  for (int trial = 0; trial < 200; ++trial) {
    WorldState incremental;
    std::map<std::string, SensorValue> merged;
    for (int batch = 0; batch < 5; ++batch) {
      std::vector<Percept> ps;
      for (int k = 0; k < 3; ++k) {
        const auto& key = keys[rng() % keys.size()];
        SensorValue v = rng() % 4 == 0 ? SensorValue::none() : SensorValue(static_cast<double>(rng() % 5) - 2.0);
        ps.push_back({key, v});
        merged[key] = v;
      }
      incremental.apply_percepts(ps, batch);
    }
    WorldState fresh;
    std::vector<Percept> all;
    for (const auto& [k, v] : merged) all.push_back({k, v});
    fresh.apply_percepts(all, 0);
    CHECK(extract_sensors(incremental, defs).values == extract_sensors(fresh, defs).values);
    CHECK(extract_sensors(incremental, defs) == extract_sensors(incremental, defs));
  }
}
