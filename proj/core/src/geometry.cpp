#include "reisim/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "reisim/error.hpp"

namespace reisim {

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

double normalize_angle(double rad) {
  double a = std::remainder(rad, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Vec3 Pose2D::forward() const { return {std::cos(heading), std::sin(heading), 0.0}; }
Vec3 Pose2D::left() const { return {-std::sin(heading), std::cos(heading), 0.0}; }

void AntennaMount::validate() const {
  if (!(beamwidth_rad > 0.0 && beamwidth_rad < kPi)) {
    throw DomainError("beamwidth must lie in (0, pi)");
  }
  if (!(mount_angle_rad >= 0.0 && mount_angle_rad < kPi / 2.0)) {
    throw DomainError("mount angle must lie in [0, pi/2)");
  }
  if (!(mount_angle_rad + beamwidth_rad / 2.0 < kPi / 2.0)) {
    throw DomainError("mount angle + beamwidth/2 must stay below pi/2");
  }
  if (!(height_m >= 0.0)) throw DomainError("antenna height must be >= 0");
  if (pattern == BeamPattern::cosine_power && !(taper_exponent >= 0.0)) {
    throw DomainError("taper exponent must be >= 0");
  }
}

double AntennaMount::gain_dbi(double off_boresight_rad) const {
  if (off_boresight_rad > beamwidth_rad / 2.0) return kNegInf;
  if (pattern == BeamPattern::flat_top) return boresight_gain_dbi;
  return boresight_gain_dbi + 10.0 * taper_exponent * std::log10(std::cos(off_boresight_rad));
}

namespace {

constexpr std::array<std::pair<ScenarioId, std::string_view>, 8> kScenarioNames{{
    {ScenarioId::S1, "S1"},
    {ScenarioId::S2, "S2"},
    {ScenarioId::S3, "S3"},
    {ScenarioId::S4, "S4"},
    {ScenarioId::S5, "S5"},
    {ScenarioId::S6, "S6"},
    {ScenarioId::lane_straight, "lane_straight"},
    {ScenarioId::lane_custom, "lane_custom"},
}};

constexpr std::array<std::pair<TagRole, std::string_view>, 3> kRoleNames{{
    {TagRole::lane_marker, "lane_marker"},
    {TagRole::traffic_sign, "traffic_sign"},
    {TagRole::sensor_tag, "sensor_tag"},
}};

}  // namespace

std::string_view to_string(ScenarioId id) {
  for (const auto& [key, name] : kScenarioNames) {
    if (key == id) return name;
  }
  return "unknown";
}

std::optional<ScenarioId> scenario_from_string(std::string_view name) {
  for (const auto& [key, text] : kScenarioNames) {
    if (text == name) return key;
  }
  return std::nullopt;
}

std::string_view to_string(TagRole role) {
  for (const auto& [key, name] : kRoleNames) {
    if (key == role) return name;
  }
  return "unknown";
}

std::optional<TagRole> tag_role_from_string(std::string_view name) {
  for (const auto& [key, text] : kRoleNames) {
    if (text == name) return key;
  }
  return std::nullopt;
}

double LateralProfile::at(double s) const {
  if (amplitude_m == 0.0 || period_m <= 0.0) return offset_m;
  return offset_m + amplitude_m * std::sin(2.0 * kPi * s / period_m + phase_rad);
}

double LateralProfile::slope(double s) const {
  if (amplitude_m == 0.0 || period_m <= 0.0) return 0.0;
  const double k = 2.0 * kPi / period_m;
  return amplitude_m * k * std::cos(k * s + phase_rad);
}

void RoadScenario::validate() const {
  if (!(lane_width_m > 0.0)) throw ValidationError("scenario.lane_width_m", "must be > 0");
  const bool sign = id == ScenarioId::S1 || id == ScenarioId::S2 || id == ScenarioId::S3 ||
                    id == ScenarioId::S4 || id == ScenarioId::S5 || id == ScenarioId::S6;
  if (sign && !(lateral_standoff_m > 0.0)) {
    throw ValidationError("scenario.lateral_standoff_m", "must be > 0 for sign scenarios");
  }
  if (!std::isfinite(curvature_per_m)) {
    throw ValidationError("scenario.curvature_per_m", "must be finite");
  }
  if (speed_profile.empty()) throw ValidationError("scenario.speed_profile", "must not be empty");
  if (speed_profile.front().t_start_s != 0.0) {
    throw ValidationError("scenario.speed_profile", "first segment must start at t = 0");
  }
  for (std::size_t i = 0; i < speed_profile.size(); ++i) {
    if (!(speed_profile[i].speed_mps >= 0.0)) {
      throw ValidationError("scenario.speed_profile[" + std::to_string(i) + "].speed_mps",
                        "must be >= 0");
    }
    if (i > 0 && !(speed_profile[i].t_start_s > speed_profile[i - 1].t_start_s)) {
      throw ValidationError("scenario.speed_profile[" + std::to_string(i) + "].t_start_s",
                        "segments must be strictly increasing in time");
    }
  }
  if (!(max_turn_angle_rad >= 0.0 && max_turn_angle_rad < kPi / 2.0)) {
    throw ValidationError("scenario.max_turn_angle_deg", "must lie in [0, 90)");
  }
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& tag = tags[i];
    const std::string key = "scenario.tags[" + std::to_string(i) + "]";
    if (!(tag.position.z >= 0.0)) throw ValidationError(key + ".z_m", "must be >= 0");
    if (tag.role == TagRole::lane_marker && std::abs(tag.position.z) > 0.05) {
      throw ValidationError(key + ".z_m", "lane markers lie on the pavement (z ~ 0)");
    }
    if (tag.epc_bits <= 0) throw ValidationError(key + ".epc_bits", "must be > 0");
    if (tag.user_memory_words < 0) throw ValidationError(key + ".user_memory_words", "must be >= 0");
  }
  if (curvature_per_m != 0.0 && lateral.amplitude_m != 0.0 &&
      std::abs(lateral.amplitude_m) >= 1.0 / std::abs(curvature_per_m)) {
    throw ValidationError("scenario.lateral.amplitude_m", "exceeds the road radius");
  }
}

double RoadScenario::speed_at(double t) const {
  double v = speed_profile.front().speed_mps;
  for (const auto& seg : speed_profile) {
    if (seg.t_start_s <= t) v = seg.speed_mps;
  }
  return v;
}

double RoadScenario::distance_at(double t) const {
  double s = 0.0;
  for (std::size_t i = 0; i < speed_profile.size(); ++i) {
    const double start = speed_profile[i].t_start_s;
    if (t <= start) break;
    const double end =
        i + 1 < speed_profile.size() ? std::min(t, speed_profile[i + 1].t_start_s) : t;
    s += speed_profile[i].speed_mps * (end - start);
  }
  return s;
}

Pose2D RoadScenario::pose_at_distance(double s) const {
  const double k = curvature_per_m;
  double cx = s;
  double cy = 0.0;
  double heading = 0.0;
  if (k != 0.0) {
    heading = k * s;
    cx = std::sin(heading) / k;
    cy = (1.0 - std::cos(heading)) / k;
  }
  const double offset = lateral.at(s);
  const double x = cx - offset * std::sin(heading);
  const double y = cy + offset * std::cos(heading);
  // The drift slope is taken against the local centreline direction.
  const double scale = k != 0.0 ? 1.0 - k * offset : 1.0;
  return Pose2D::make(x, y, heading + std::atan2(lateral.slope(s), scale));
}

Pose2D RoadScenario::pose_at(double t) const { return pose_at_distance(distance_at(t)); }

double RoadScenario::lateral_offset_at(double t) const { return lateral.at(distance_at(t)); }

double RoadScenario::project(const Vec3& p) const {
  const double k = curvature_per_m;
  if (k == 0.0) return p.x;
  return std::atan2(k * p.x, 1.0 - k * p.y) / k;
}

double coverage_length_boresight(double l, double alpha) {
  if (!(alpha / 2.0 < kPi / 2.0)) throw DomainError("alpha/2 must be below pi/2");
  return 2.0 * l * std::tan(alpha / 2.0);
}

double coverage_length_tilted(double l, double alpha, double theta) {
  const double upper = theta + alpha / 2.0;
  const double lower = theta - alpha / 2.0;
  if (!(upper < kPi / 2.0) || !(lower > -kPi / 2.0)) {
    throw DomainError("beam edge reaches pi/2; footprint is unbounded");
  }
  return l * std::tan(upper) - l * std::tan(lower);
}

double path_loss_delta(double l, double theta) {
  if (!(l > 0.0)) throw DomainError("l must be > 0");
  if (!(theta >= 0.0 && theta < kPi / 2.0)) throw DomainError("theta must lie in [0, pi/2)");
  return 40.0 * std::log10(l / std::cos(theta)) - 40.0 * std::log10(l);
}

Vec3 antenna_position(const Pose2D& pose, const AntennaMount& mount) {
  const Vec3 base{pose.x, pose.y, 0.0};
  Vec3 p = base + mount.lateral_offset_m * pose.left();
  p.z = mount.height_m;
  return p;
}

Vec3 boresight_direction(const Pose2D& pose, const AntennaMount& mount) {
  const double c = std::cos(mount.mount_angle_rad);
  const double s = std::sin(mount.mount_angle_rad);
  if (mount.facing == Facing::downward) {
    return c * Vec3{0.0, 0.0, -1.0} + s * pose.forward();
  }
  const Vec3 normal = mount.side == Side::left ? pose.left() : -1.0 * pose.left();
  return c * normal + s * pose.forward();
}

AntennaTagGeometry antenna_tag_geometry(const Pose2D& pose, const AntennaMount& mount,
                                        const TagPlacement& tag) {
  AntennaTagGeometry g;
  g.antenna_position = antenna_position(pose, mount);
  const Vec3 d = tag.position - g.antenna_position;
  g.range_m = norm(d);
  if (g.range_m == 0.0) {
    g.off_boresight_rad = 0.0;
    g.in_beam = true;
    return g;
  }
  const double c = std::clamp(dot(d, boresight_direction(pose, mount)) / g.range_m, -1.0, 1.0);
  g.off_boresight_rad = std::acos(c);
  g.in_beam = g.off_boresight_rad <= mount.beamwidth_rad / 2.0;
  return g;
}

namespace {

bool in_beam_at(const RoadScenario& sc, const AntennaMount& mount, const TagPlacement& tag,
                double t) {
  return antenna_tag_geometry(sc.pose_at(t), mount, tag).in_beam;
}

// Returns the time of the in-beam transition inside (lo, hi], where the state
// at lo is `state_lo`.
double refine_edge(const RoadScenario& sc, const AntennaMount& mount, const TagPlacement& tag,
                   double lo, double hi, bool state_lo, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (in_beam_at(sc, mount, tag, mid) == state_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

DwellWindow dwell_window(const RoadScenario& scenario, const AntennaMount& mount,
                         const TagPlacement& tag, const DwellOptions& options) {
  const double step = options.step_s;
  bool prev = in_beam_at(scenario, mount, tag, 0.0);
  if (prev) throw NeverInBeam("tag is already inside the beam at t = 0");
  std::optional<double> enter;
  const auto steps = static_cast<long>(std::ceil(options.horizon_s / step));
  for (long i = 1; i <= steps; ++i) {
    const double t = static_cast<double>(i) * step;
    const bool now = in_beam_at(scenario, mount, tag, t);
    if (now != prev) {
      const double edge = refine_edge(scenario, mount, tag, t - step, t, prev, options.tolerance_s);
      if (!enter) {
        enter = edge;
      } else {
        return DwellWindow{*enter, edge};
      }
    }
    prev = now;
  }
  if (!enter) throw NeverInBeam("tag never enters the beam before the horizon");
  throw NeverInBeam("tag does not leave the beam before the horizon");
}

double preset_standoff(ScenarioId id) {
  switch (id) {
    case ScenarioId::S1: return 3.0;
    case ScenarioId::S2: return 5.0;
    case ScenarioId::S3: return 7.0;
    case ScenarioId::S4: return 9.0;
    case ScenarioId::S5: return 5.0;
    case ScenarioId::S6: return 3.0;
    default: return 3.0;
  }
}

RoadScenario make_sign_scenario(ScenarioId id, const AntennaMount& mount,
                                const PresetOptions& options) {
  RoadScenario sc;
  sc.id = id;
  sc.lateral_standoff_m = options.standoff_m.value_or(preset_standoff(id));
  sc.speed_profile = {{0.0, options.speed_mps}};
  sc.curvature_per_m = id == ScenarioId::S5 ? options.curvature_per_m : 0.0;

  const double side = mount.side == Side::left ? 1.0 : -1.0;
  const double lateral = mount.lateral_offset_m + side * sc.lateral_standoff_m;
  const Pose2D at = sc.pose_at_distance(options.lead_m);
  const Vec3 base{at.x, at.y, 0.0};
  TagPlacement tag;
  tag.role = TagRole::traffic_sign;
  tag.position = base + lateral * at.left();
  tag.position.z = id == ScenarioId::S6 ? mount.height_m + options.tag_height_offset_m
                                        : options.sign_height_m;
  sc.tags.push_back(tag);
  return sc;
}

std::vector<TagPlacement> make_lane_markers(const LaneMarkerLayout& layout) {
  std::vector<TagPlacement> tags;
  if (!(layout.tag_spacing_m > 0.0)) return tags;
  const auto count = static_cast<std::size_t>(std::floor(layout.length_m / layout.tag_spacing_m)) + 1;
  tags.reserve(2 * count);
  for (double edge : {layout.lane_width_m / 2.0, -layout.lane_width_m / 2.0}) {
    for (std::size_t i = 0; i < count; ++i) {
      TagPlacement tag;
      tag.role = TagRole::lane_marker;
      tag.position = {layout.start_m + static_cast<double>(i) * layout.tag_spacing_m, edge, 0.0};
      tags.push_back(tag);
    }
  }
  return tags;
}

}  // namespace reisim
