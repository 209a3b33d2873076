#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reisim/engine.hpp"
#include "reisim/lane.hpp"
#include "reisim/sensing.hpp"

namespace reisim {

// ---------------------------------------------------------------------------
// Calibrated configurations behind the built-in recipes.

/// Single-sign drive for the scenario grid. The vehicle starts 40 m before
/// the sign and runs until 3 s after passing it.
///
/// S1-S5 use free space at 26.5 dBm so that the larger standoffs become
/// path-loss limited at a 45 degree mount, while S1 stays dwell limited.
/// S6 uses the two-ray model (reflection -0.7) with the tag offset by
/// `tag_height_offset_m` from the antenna height.
SimConfig scenario_grid_config(ScenarioId id, double speed_mph, double mount_angle_deg,
                               double tag_height_offset_m = 0.0);
inline constexpr double kScenarioGridTxPowerDbm = 26.5;

/// Stationary S1 tag on boresight for one second, the reader SNR set through
/// the noise floor.
SimConfig encoding_config(Encoding encoding, double noise_floor_dbm);
/// Backscatter SNR of encoding_config at a -80 dBm noise floor.
double encoding_reference_snr_db();

/// Two downward-facing antennas over lane markers every 0.5 m. The vehicle
/// weaves 0.5 m around the lane centre with a 8.6 m spatial period (heading
/// swing about 20 degrees) and drives `distance_m` metres.
SimConfig lane_rig_config(double speed_mph, double distance_m = 34.4);
inline constexpr double kLaneRigTauS = 0.1;
/// Read-rate curve of lane_rig_config, calibrated by holding the vehicle at
/// fixed offsets at `speed_mph`.
ReadRateCurve lane_rig_curve(double speed_mph = 5.0, int jobs = 1);
LaneEstimatorOptions lane_rig_estimator(const SimConfig& cfg);
/// Correlation of the windowed estimate with the ground truth for one drive.
double lane_rig_correlation(const SimConfig& cfg, const ReadRateCurve& curve);

// ---------------------------------------------------------------------------
// Recipes.

struct SweepAxis {
  std::string axis;
  std::vector<nlohmann::json> values;
};

/// A grid of runs: the cartesian product of `sweeps` over `base_config`,
/// each point replicated with distinct sub-seeds.
struct ExperimentRecipe {
  std::string name;
  nlohmann::json base_config = nlohmann::json::object();
  std::vector<SweepAxis> sweeps;
  int replications = 1;
  /// Any of "summary.csv", "summary.json", "traces".
  std::vector<std::string> outputs{"summary.csv"};

  /// Throws ValidationError.
  void validate() const;
};

ExperimentRecipe recipe_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentRecipe& recipe);

std::vector<std::string> builtin_recipe_names();
bool is_builtin_recipe(const std::string& name);

struct RecipeOptions {
  /// Overrides the recipe's base seed.
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  /// Overrides the built-in replication count (seeds per grid point).
  std::optional<int> replications;
};

struct RecipeReport {
  std::filesystem::path directory;
  std::vector<std::string> files;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Runs a built-in recipe into `out_dir/<name>/`. Files are staged and only
/// moved into place once every run succeeded; on failure nothing is left
/// behind. Writes manifest.json (recipe, seed, config hash, file hashes).
RecipeReport run_builtin_recipe(const std::string& name, const std::filesystem::path& out_dir,
                                const RecipeOptions& options = {});

/// Same contract for a generic grid recipe. Every grid point is resolved
/// before the first run, so a bad axis or preset fails without output.
RecipeReport run_recipe(const ExperimentRecipe& recipe, const std::filesystem::path& out_dir,
                        const RecipeOptions& options = {});

}  // namespace reisim
