#pragma once

// Shared fixtures for unit and acceptance tests: independent oracles,
// exhaustive/random engine generators, config and script generators.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "familiar/config.hpp"
#include "familiar/guidance.hpp"
#include "familiar/kernels/nearest.hpp"
#include "familiar/region_learner.hpp"
#include "familiar/session.hpp"

namespace familiar::testing {

std::string source_path(const std::string& relative);
std::string read_text(const std::string& path);
Config default_config();
std::vector<ScriptEntry> golden_script();

// ---- selection oracle ------------------------------------------------------

/// Brute-force reading of the selection rule: an IP is chosen if it owns
/// executable work and "beats" every other such IP pairwise.
std::optional<Selection> oracle_select(const std::vector<InteractionProtocol>& protocols);

/// Calls `visit` for every consistent engine state in the enumeration
/// (<=3 IPs x <=3 behaviors). Returns the number of states visited.
std::size_t enumerate_engines(const std::function<void(const std::vector<InteractionProtocol>&)>& visit);

// ---- k-NN oracle -------------------------------------------------------------

kernels::NearestResult brute_nearest(const std::vector<double>& xs, const std::vector<double>& ys, double px,
                                     double py);
std::optional<std::string> brute_classify(const std::vector<RegionSample>& samples, double tau, Point p);

// ---- generators ----------------------------------------------------------------

Config random_valid_config(std::mt19937_64& rng);

/// Random client traffic against `config`: chats (catalogue examples, decoys,
/// gibberish), avatar moves, snapshots. Ticks in [0, horizon).
std::vector<ScriptEntry> random_script(std::mt19937_64& rng, const Config& config, Tick horizon);

/// Config-document defects that each produce at least one error and touch
/// disjoint document locations of the default config.
struct Defect {
  std::string name;
  std::function<void(nlohmann::json&)> apply;
};
const std::vector<Defect>& seeded_defects();

int count_executing(const GuidanceEngine& engine);

}  // namespace familiar::testing
