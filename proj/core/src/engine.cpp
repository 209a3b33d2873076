#include "reisim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "reisim/config.hpp"
#include "reisim/error.hpp"
#include "reisim/lane.hpp"
#include "reisim/rng.hpp"

namespace reisim {

std::string_view to_string(TraceDetail d) {
  return d == TraceDetail::full_protocol ? "full_protocol" : "events_only";
}

std::optional<TraceDetail> trace_detail_from_string(std::string_view s) {
  if (s == "events_only") return TraceDetail::events_only;
  if (s == "full_protocol") return TraceDetail::full_protocol;
  return std::nullopt;
}

void SimConfig::validate() const {
  scenario.validate();
  try {
    mount.validate();
  } catch (const DomainError& e) {
    throw ValidationError("mount", e.what());
  }
  radio.validate();
  multipath.validate();
  gen2.validate();
  if (!(duration_s > 0.0)) throw ValidationError("duration_s", "must be > 0");
  if (!(ber.miller_gain_exponent >= 0.0)) {
    throw ValidationError("ber.miller_gain_exponent", "must be >= 0");
  }
  if (lane.tau_s) {
    if (!(*lane.tau_s > 0.0)) throw ValidationError("lane.tau_s", "must be > 0");
    double v_max = 0.0;
    for (const auto& seg : scenario.speed_profile) v_max = std::max(v_max, seg.speed_mps);
    if (v_max > 0.0) {
      const double bound = tau_max(scenario.lane_width_m, v_max, scenario.max_turn_angle_rad);
      if (!(*lane.tau_s < bound)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "window %.6g s violates the lane-departure bound tau < W/(2 v cos "
                      "alpha_max) = %.6g s",
                      *lane.tau_s, bound);
        throw ValidationError("lane.tau_s", buf);
      }
    }
  }
}

std::string epc_hex(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "E280%020llX", static_cast<unsigned long long>(index));
  return buf;
}

namespace {

bool in_beam(const RoadScenario& sc, const AntennaMount& mount, const TagPlacement& tag,
             double t) {
  return antenna_tag_geometry(sc.pose_at(t), mount, tag).in_beam;
}

/// Total in-beam time of `tag` over [0, horizon], edges refined by bisection.
double in_beam_time(const RoadScenario& sc, const AntennaMount& mount, const TagPlacement& tag,
                    double horizon, double step = 1e-3, double tol = 1e-6) {
  double total = 0.0;
  bool prev = in_beam(sc, mount, tag, 0.0);
  double entered = 0.0;
  const auto steps = static_cast<long>(std::ceil(horizon / step));
  for (long i = 1; i <= steps; ++i) {
    const double t0 = static_cast<double>(i - 1) * step;
    const double t1 = std::min(horizon, static_cast<double>(i) * step);
    const bool now = in_beam(sc, mount, tag, t1);
    if (now != prev) {
      double lo = t0;
      double hi = t1;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (in_beam(sc, mount, tag, mid) == prev) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      if (now) {
        entered = hi;
      } else {
        total += hi - entered;
      }
    }
    prev = now;
  }
  if (prev) total += horizon - entered;
  return total;
}

/// Restricts link evaluation to tags near the vehicle along the road.
class SpatialIndex {
 public:
  SpatialIndex(const SimConfig& cfg) : scenario_(cfg.scenario) {
    const auto& sc = cfg.scenario;
    double lateral = std::abs(cfg.mount.lateral_offset_m) + std::abs(sc.lateral.offset_m) +
                     std::abs(sc.lateral.amplitude_m);
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t i = 0; i < sc.tags.size(); ++i) {
      const Vec3& p = sc.tags[i].position;
      const double s = sc.project(p);
      const Pose2D at = sc.pose_at_distance(s);
      lateral = std::max(lateral, std::hypot(p.x - at.x, p.y - at.y) + std::abs(p.z) +
                                      cfg.mount.height_m);
      keyed.emplace_back(s, i);
    }
    const double range = max_power_range_m(cfg.mount, cfg.radio, cfg.multipath);
    const double k = std::abs(sc.curvature_per_m);
    enabled_ = std::isfinite(range) && k * (range + 2.0 * lateral) < 0.5 && sc.tags.size() > 16;
    window_ = 2.0 * (range + 2.0 * lateral + 1.0);
    std::sort(keyed.begin(), keyed.end());
    for (const auto& [s, i] : keyed) {
      s_.push_back(s);
      order_.push_back(i);
    }
  }

  bool enabled() const { return enabled_; }

  void operator()(double t, std::vector<std::size_t>& out) const {
    const double s = scenario_.distance_at(t);
    const auto lo = std::lower_bound(s_.begin(), s_.end(), s - window_);
    const auto hi = std::upper_bound(s_.begin(), s_.end(), s + window_);
    for (auto it = lo; it != hi; ++it) out.push_back(order_[static_cast<std::size_t>(it - s_.begin())]);
  }

 private:
  const RoadScenario& scenario_;
  bool enabled_ = false;
  double window_ = 0.0;
  std::vector<double> s_;
  std::vector<std::size_t> order_;
};

}  // namespace

void apply_preset(SimConfig& cfg, ScenarioId id, const ScenarioPreset& preset) {
  const RoadScenario old = cfg.scenario;
  RoadScenario sc;
  switch (id) {
    case ScenarioId::S1:
    case ScenarioId::S2:
    case ScenarioId::S3:
    case ScenarioId::S4:
    case ScenarioId::S5:
    case ScenarioId::S6:
      sc = make_sign_scenario(id, cfg.mount, preset.sign);
      break;
    case ScenarioId::lane_straight: {
      sc.id = id;
      LaneMarkerLayout layout = preset.markers;
      layout.lane_width_m = old.lane_width_m;
      sc.tags = make_lane_markers(layout);
      sc.speed_profile = {{0.0, preset.sign.speed_mps}};
      break;
    }
    case ScenarioId::lane_custom:
      sc.id = id;
      sc.speed_profile = {{0.0, preset.sign.speed_mps}};
      break;
  }
  sc.lane_width_m = old.lane_width_m;
  sc.max_turn_angle_rad = old.max_turn_angle_rad;
  sc.lateral = old.lateral;
  cfg.scenario = std::move(sc);
  cfg.preset = preset;
}

SimConfig preset_config(ScenarioId id, const ScenarioPreset& preset) {
  SimConfig cfg;
  apply_preset(cfg, id, preset);
  return cfg;
}

RunResult run(const SimConfig& cfg) {
  cfg.validate();
  const auto& sc = cfg.scenario;
  const ShadowingField shadowing(derive_seed(cfg.seed, StreamComponent::shadowing),
                                 cfg.multipath.excess_noise_sigma_db, cfg.multipath.coherence_s);
  const MultiLinkFn link = [&](std::size_t tag, double t) {
    return sample_link(t, sc, cfg.mount, sc.tags[tag], tag, cfg.radio, cfg.multipath, shadowing);
  };
  const SpatialIndex index(cfg);
  CandidateFn candidates;
  if (index.enabled()) {
    candidates = [&](double t, std::vector<std::size_t>& out) { index(t, out); };
  }
  InventoryOptions options;
  options.ber = cfg.ber;
  options.record_outcomes = cfg.trace_detail == TraceDetail::full_protocol;
  InventoryResult inv =
      run_inventory(sc.tags.size(), cfg.gen2, link, 0.0, cfg.duration_s, cfg.seed, options,
                    candidates);

  RunResult result;
  result.trace.reserve(inv.reads.size());
  RunSummary& sum = result.summary;
  sum.total_reads_per_tag.assign(sc.tags.size(), 0);
  for (const TagRead& r : inv.reads) {
    ReadEvent ev;
    ev.t = r.t;
    ev.tag_id = r.tag;
    ev.epc = epc_hex(r.tag);
    ev.round_index = r.round_index;
    ev.vehicle_pose_at_read = sc.pose_at(r.t);
    ev.snr_at_read_db = r.snr_db;
    result.trace.push_back(std::move(ev));
    ++sum.total_reads_per_tag[r.tag];
  }
  sum.total_reads = inv.reads.size();
  sum.duration_s = cfg.duration_s;
  sum.reads_per_second = static_cast<double>(sum.total_reads) / cfg.duration_s;
  sum.outcome_histogram = std::move(inv.histogram);
  sum.rounds = inv.rounds.size();
  sum.dwell_per_tag.reserve(sc.tags.size());
  for (const auto& tag : sc.tags) {
    sum.dwell_per_tag.push_back(in_beam_time(sc, cfg.mount, tag, cfg.duration_s));
  }
  result.interrogations = std::move(inv.rounds);
  result.protocol = std::move(inv.outcomes);
  return result;
}

SimConfig with_parameter(const SimConfig& base, const std::string& axis,
                         const nlohmann::json& value) {
  return config_from_json(with_parameter(to_json(base), axis, value));
}

std::vector<RunSummary> sweep(const SimConfig& base, const std::string& axis,
                              const std::vector<nlohmann::json>& values, int jobs) {
  return sweep(to_json(base), axis, values, jobs);
}

std::vector<RunSummary> sweep(const nlohmann::json& base, const std::string& axis,
                              const std::vector<nlohmann::json>& values, int jobs) {
  // Resolve every value first so a bad axis fails before any run starts.
  std::vector<SimConfig> configs;
  configs.reserve(values.size());
  const SimConfig parsed_base = config_from_json(base);
  for (std::size_t i = 0; i < values.size(); ++i) {
    SimConfig cfg = config_from_json(with_parameter(base, axis, values[i]));
    cfg.seed = derive_seed(parsed_base.seed, StreamComponent::sweep, i);
    configs.push_back(std::move(cfg));
  }
  return parallel_map<RunSummary>(configs.size(), jobs,
                                  [&](std::size_t i) { return run(configs[i]).summary; });
}

}  // namespace reisim
