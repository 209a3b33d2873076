#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reisim/units.hpp"

namespace reisim {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator*(double s, const Vec3& v);
double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& v);

/// Wraps an angle into (-pi, pi].
double normalize_angle(double rad);

/// Vehicle reference point in the road plane. Frame: x along the road,
/// y to the left, heading counter-clockwise from +x.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  static Pose2D make(double x, double y, double heading) {
    return Pose2D{x, y, normalize_angle(heading)};
  }
  Vec3 forward() const;
  Vec3 left() const;
};

enum class Facing { side_horizontal, downward };
enum class Side { left, right };
enum class BeamPattern { flat_top, cosine_power };

struct AntennaMount {
  /// 0 means boresight perpendicular to the vehicle's longitudinal axis;
  /// positive values rotate it toward the direction of travel.
  double mount_angle_rad = 0.0;
  /// Full cone angle of the main beam.
  double beamwidth_rad = deg_to_rad(60.0);
  double height_m = 1.0;
  /// Signed lateral offset of the antenna from the vehicle reference point
  /// (positive to the left).
  double lateral_offset_m = 0.9;
  double boresight_gain_dbi = 6.0;
  Facing facing = Facing::side_horizontal;
  /// Side the boresight points to for side_horizontal mounts.
  Side side = Side::left;
  BeamPattern pattern = BeamPattern::flat_top;
  /// Exponent n of the cos^n taper used by BeamPattern::cosine_power.
  double taper_exponent = 2.0;

  /// Throws DomainError when the beam edges are not strictly inside
  /// (-pi/2, pi/2) of the side normal.
  void validate() const;
  /// Gain toward a direction `off_boresight_rad` away from boresight;
  /// kNegInf outside the cone.
  double gain_dbi(double off_boresight_rad) const;
};

enum class TagRole { lane_marker, traffic_sign, sensor_tag };

struct TagPlacement {
  Vec3 position;
  TagRole role = TagRole::traffic_sign;
  int epc_bits = 96;
  int user_memory_words = 0;
};

enum class ScenarioId { S1, S2, S3, S4, S5, S6, lane_straight, lane_custom };

std::string_view to_string(ScenarioId id);
std::optional<ScenarioId> scenario_from_string(std::string_view name);
std::string_view to_string(TagRole role);
std::optional<TagRole> tag_role_from_string(std::string_view name);

struct SpeedSegment {
  double t_start_s = 0.0;
  double speed_mps = 0.0;
};

/// Sinusoidal lateral drift of the vehicle about the lane centre,
/// expressed over travelled distance.
struct LateralProfile {
  double offset_m = 0.0;
  double amplitude_m = 0.0;
  double period_m = 0.0;
  double phase_rad = 0.0;

  double at(double s) const;
  double slope(double s) const;
};

struct RoadScenario {
  ScenarioId id = ScenarioId::S1;
  double lane_width_m = 3.6;
  double lateral_standoff_m = 3.0;
  /// Signed curvature of the road centreline; positive turns left, toward
  /// the antenna side for left-facing mounts.
  double curvature_per_m = 0.0;
  std::vector<TagPlacement> tags;
  std::vector<SpeedSegment> speed_profile{{0.0, mph_to_mps(15.0)}};
  double max_turn_angle_rad = 0.0;
  LateralProfile lateral;

  void validate() const;

  double speed_at(double t) const;
  /// Distance travelled along the centreline after `t` seconds.
  double distance_at(double t) const;
  Pose2D pose_at_distance(double s) const;
  Pose2D pose_at(double t) const;
  /// Ground-truth signed lateral offset from the lane centre at time t.
  double lateral_offset_at(double t) const;
  /// Arc-length coordinate of the centreline point closest to `p`.
  double project(const Vec3& p) const;
};

// ---------------------------------------------------------------------------
// Closed-form coverage relations.

/// Longitudinal length of the beam footprint on a line at lateral distance
/// `l` for a boresight perpendicular to travel: 2 l tan(alpha/2).
double coverage_length_boresight(double l, double alpha);

/// Same footprint for a boresight rotated forward by theta:
/// l tan(theta + alpha/2) - l tan(theta - alpha/2).
double coverage_length_tilted(double l, double alpha, double theta);

/// Extra round-trip path loss (dB) of the tilted boresight range l/cos(theta)
/// over the perpendicular range l. Independent of l.
double path_loss_delta(double l, double theta);

struct AntennaTagGeometry {
  double range_m = 0.0;
  double off_boresight_rad = 0.0;
  bool in_beam = false;
  Vec3 antenna_position;
};

Vec3 antenna_position(const Pose2D& pose, const AntennaMount& mount);
Vec3 boresight_direction(const Pose2D& pose, const AntennaMount& mount);

AntennaTagGeometry antenna_tag_geometry(const Pose2D& pose, const AntennaMount& mount,
                                        const TagPlacement& tag);

struct DwellWindow {
  double t_enter_s = 0.0;
  double t_exit_s = 0.0;
  double duration() const { return t_exit_s - t_enter_s; }
};

struct DwellOptions {
  double step_s = 1e-3;
  double tolerance_s = 1e-6;
  double horizon_s = 120.0;
};

/// First contiguous interval during which `tag` is inside the beam.
/// Throws NeverInBeam when it never enters before the horizon.
DwellWindow dwell_window(const RoadScenario& scenario, const AntennaMount& mount,
                         const TagPlacement& tag, const DwellOptions& options = {});

// ---------------------------------------------------------------------------
// Scenario presets.

struct PresetOptions {
  double speed_mps = mph_to_mps(15.0);
  /// Centreline distance travelled before the vehicle reaches the tag.
  double lead_m = 40.0;
  /// Height of sign-mounted tags above the road (S1-S5).
  double sign_height_m = 2.5;
  /// Vertical offset of the S6 tag relative to the antenna height.
  double tag_height_offset_m = 0.0;
  /// Only meaningful for S5.
  double curvature_per_m = 0.05;
  /// Overrides the preset standoff when set.
  std::optional<double> standoff_m;
};

/// Default reader-to-sign lateral distances for S1..S6 (meters).
double preset_standoff(ScenarioId id);

/// Builds a single-tag sign scenario placed relative to `mount`.
RoadScenario make_sign_scenario(ScenarioId id, const AntennaMount& mount,
                                const PresetOptions& options = {});

struct LaneMarkerLayout {
  double lane_width_m = 3.6;
  double tag_spacing_m = 0.5;
  double start_m = 0.0;
  double length_m = 200.0;
};

/// Lane-marker tags along both lane edges (z = 0).
std::vector<TagPlacement> make_lane_markers(const LaneMarkerLayout& layout);

}  // namespace reisim
