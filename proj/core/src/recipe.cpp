#include "reisim/recipe.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "reisim/config.hpp"
#include "reisim/error.hpp"
#include "reisim/io.hpp"
#include "reisim/rng.hpp"

namespace reisim {

using nlohmann::json;
namespace fs = std::filesystem;

SimConfig scenario_grid_config(ScenarioId id, double speed_mph, double mount_angle_deg,
                               double tag_height_offset_m) {
  SimConfig cfg;
  cfg.mount.mount_angle_rad = deg_to_rad(mount_angle_deg);
  cfg.radio.tx_power_dbm = kScenarioGridTxPowerDbm;
  if (id == ScenarioId::S6) {
    cfg.multipath.mode = MultipathMode::two_ray;
    cfg.multipath.ground_reflection_coefficient = -0.7;
  }
  ScenarioPreset preset;
  preset.sign.speed_mps = mph_to_mps(speed_mph);
  preset.sign.tag_height_offset_m = tag_height_offset_m;
  apply_preset(cfg, id, preset);
  cfg.duration_s = preset.sign.lead_m / preset.sign.speed_mps + 3.0;
  return cfg;
}

SimConfig encoding_config(Encoding encoding, double noise_floor_dbm) {
  SimConfig cfg;
  ScenarioPreset preset;
  preset.sign.speed_mps = 0.0;
  preset.sign.lead_m = 0.0;
  apply_preset(cfg, ScenarioId::S1, preset);
  cfg.gen2.encoding = encoding;
  cfg.multipath.noise_floor_dbm = noise_floor_dbm;
  cfg.duration_s = 1.0;
  return cfg;
}

double encoding_reference_snr_db() {
  const SimConfig cfg = encoding_config(Encoding::fm0, -80.0);
  const ShadowingField none(0, 0.0, cfg.multipath.coherence_s);
  return sample_link(0.0, cfg.scenario, cfg.mount, cfg.scenario.tags.front(), 0, cfg.radio,
                     cfg.multipath, none)
      .snr_db;
}

SimConfig lane_rig_config(double speed_mph, double distance_m) {
  SimConfig cfg;
  cfg.mount.facing = Facing::downward;
  cfg.mount.height_m = 0.5;
  cfg.mount.beamwidth_rad = deg_to_rad(150.0);
  cfg.mount.pattern = BeamPattern::cosine_power;
  cfg.mount.taper_exponent = 2.0;
  cfg.mount.lateral_offset_m = 0.9;
  cfg.radio.tx_power_dbm = 12.0;
  cfg.multipath.excess_noise_sigma_db = 3.0;
  ScenarioPreset preset;
  preset.sign.speed_mps = mph_to_mps(speed_mph);
  preset.markers.tag_spacing_m = 0.5;
  preset.markers.start_m = -5.0;
  preset.markers.length_m = distance_m + 15.0;
  apply_preset(cfg, ScenarioId::lane_straight, preset);
  cfg.scenario.lateral = LateralProfile{0.0, 0.5, 8.6, 0.0};
  cfg.duration_s = distance_m / preset.sign.speed_mps;
  cfg.lane.tau_s = kLaneRigTauS;
  return cfg;
}

ReadRateCurve lane_rig_curve(double speed_mph, int jobs) {
  CurveCalibration cal;
  for (int i = -16; i <= 16; ++i) cal.offsets_m.push_back(0.1 * i);
  cal.duration_s = 1.0;
  cal.seeds = 2;
  cal.jobs = jobs;
  return calibrate_read_rate_curve(lane_rig_config(speed_mph), cal);
}

LaneEstimatorOptions lane_rig_estimator(const SimConfig& cfg) {
  LaneEstimatorOptions o;
  o.nominal_offset_m = nominal_marker_offset(cfg);
  return o;
}

double lane_rig_correlation(const SimConfig& cfg, const ReadRateCurve& curve) {
  const LaneRun lr = simulate_lane(cfg);
  const auto track =
      track_lane(cfg, lr, cfg.lane.tau_s.value_or(kLaneRigTauS), curve, lane_rig_estimator(cfg));
  std::vector<double> est;
  std::vector<double> truth;
  for (const auto& pt : track) {
    est.push_back(pt.estimate.pos);
    truth.push_back(pt.truth_m);
  }
  return cross_correlation(est, truth);
}

// ---------------------------------------------------------------------------

void ExperimentRecipe::validate() const {
  if (name.empty()) throw ValidationError("name", "must not be empty");
  const bool safe = std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
  if (!safe || name.front() == '.') {
    throw ValidationError("name", "use letters, digits, '-', '_' or '.' only");
  }
  if (replications < 1) throw ValidationError("replications", "must be >= 1");
  std::set<std::string> axes;
  for (std::size_t i = 0; i < sweeps.size(); ++i) {
    const std::string key = "sweeps[" + std::to_string(i) + "]";
    if (sweeps[i].axis.empty()) throw ValidationError(key + ".axis", "must not be empty");
    if (!axes.insert(sweeps[i].axis).second) throw ValidationError(key + ".axis", "duplicate axis");
    if (sweeps[i].values.empty()) throw ValidationError(key + ".values", "must not be empty");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const std::string key = "outputs[" + std::to_string(i) + "]";
    const std::string& o = outputs[i];
    if (o != "summary.csv" && o != "summary.json" && o != "traces") {
      throw ValidationError(key, "unknown output '" + o + "'");
    }
    if (!seen.insert(o).second) throw ValidationError(key, "duplicate output");
  }
}

ExperimentRecipe recipe_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("<root>", "recipe must be an object");
  ExperimentRecipe r;
  for (const auto& [key, value] : doc.items()) {
    if (key == "name") {
      if (!value.is_string()) throw ValidationError("name", "expected a string");
      r.name = value.get<std::string>();
    } else if (key == "base") {
      if (!value.is_object()) throw ValidationError("base", "expected a config object");
      r.base_config = value;
    } else if (key == "replications") {
      if (!value.is_number_integer()) throw ValidationError("replications", "expected an integer");
      r.replications = value.get<int>();
    } else if (key == "sweeps") {
      if (!value.is_array()) throw ValidationError("sweeps", "expected an array");
      for (std::size_t i = 0; i < value.size(); ++i) {
        const json& s = value[i];
        const std::string k = "sweeps[" + std::to_string(i) + "]";
        if (!s.is_object()) throw ValidationError(k, "expected an object");
        SweepAxis axis;
        for (const auto& [sk, sv] : s.items()) {
          if (sk == "axis" && sv.is_string()) {
            axis.axis = sv.get<std::string>();
          } else if (sk == "values" && sv.is_array()) {
            axis.values.assign(sv.begin(), sv.end());
          } else if (sk == "axis" || sk == "values") {
            throw ValidationError(k + "." + sk, sk == "axis" ? "expected a string" : "expected an array");
          } else {
            throw UnknownParameter(k + "." + sk, "unknown key");
          }
        }
        r.sweeps.push_back(std::move(axis));
      }
    } else if (key == "outputs") {
      if (!value.is_array()) throw ValidationError("outputs", "expected an array");
      r.outputs.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_string()) {
          throw ValidationError("outputs[" + std::to_string(i) + "]", "expected a string");
        }
        r.outputs.push_back(value[i].get<std::string>());
      }
    } else {
      throw UnknownParameter(key, "unknown key");
    }
  }
  r.validate();
  return r;
}

json to_json(const ExperimentRecipe& r) {
  json sweeps = json::array();
  for (const auto& s : r.sweeps) sweeps.push_back({{"axis", s.axis}, {"values", s.values}});
  return {{"name", r.name},
          {"base", r.base_config},
          {"sweeps", sweeps},
          {"replications", r.replications},
          {"outputs", r.outputs}};
}

// ---------------------------------------------------------------------------

namespace {

/// Output files collected in memory, written only once the recipe finished.
class Artifacts {
 public:
  void add(std::string name, std::string text) { files_.emplace_back(std::move(name), std::move(text)); }

  RecipeReport commit(const std::string& recipe, const fs::path& out_dir, std::uint64_t seed,
                      const std::string& config_hash) {
    json files = json::array();
    for (const auto& [name, text] : files_) {
      files.push_back({{"name", name}, {"bytes", text.size()}, {"fnv1a64", hash_hex(fnv1a64(text))}});
    }
    const json manifest{{"recipe", recipe}, {"seed", seed}, {"config_hash", config_hash},
                        {"files", files}};
    add("manifest.json", manifest.dump(2) + "\n");

    const fs::path final_dir = out_dir / recipe;
    const fs::path staging = out_dir / ("." + recipe + ".partial");
    std::error_code ec;
    fs::remove_all(staging, ec);
    try {
      for (const auto& [name, text] : files_) write_file(staging / name, text);
      fs::remove_all(final_dir, ec);
      fs::rename(staging, final_dir);
    } catch (const std::exception& e) {
      fs::remove_all(staging, ec);
      throw IoError(std::string("recipe ") + recipe + ": " + e.what());
    }
    RecipeReport report;
    report.directory = final_dir;
    for (const auto& f : files_) report.files.push_back(f.first);
    report.seed = seed;
    report.config_hash = config_hash;
    return report;
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::uint64_t replication_seed(std::uint64_t seed, int replication) {
  return derive_seed(seed, StreamComponent::trial, static_cast<std::uint64_t>(replication));
}

std::uint64_t singulation_attempts(const RunSummary& s) {
  std::uint64_t n = 0;
  for (OutcomeKind k : {OutcomeKind::success, OutcomeKind::ack_timeout, OutcomeKind::decode_failure}) {
    const auto it = s.outcome_histogram.find(k);
    if (it != s.outcome_histogram.end()) n += it->second;
  }
  return n;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

std::string hash_of(const json& definition) { return hash_hex(fnv1a64(definition.dump(2))); }

using Num = std::function<std::string(double)>;
const Num fmt = format_number;

RecipeReport fig9_encoding(const fs::path& out, std::uint64_t seed, int reps, int jobs) {
  std::vector<double> floors;
  for (int nf = -80; nf <= -34; ++nf) floors.push_back(nf);
  struct Point {
    Encoding enc;
    double floor;
  };
  std::vector<Point> points;
  for (double f : floors) {
    for (Encoding e : kAllEncodings) points.push_back({e, f});
  }
  json definition = json::array();
  for (const Point& p : points) definition.push_back(to_json(encoding_config(p.enc, p.floor)));

  const std::size_t total = points.size() * static_cast<std::size_t>(reps);
  const auto runs = parallel_map<RunSummary>(total, jobs, [&](std::size_t job) {
    const Point& p = points[job / static_cast<std::size_t>(reps)];
    SimConfig cfg = encoding_config(p.enc, p.floor);
    cfg.seed = replication_seed(seed, static_cast<int>(job % static_cast<std::size_t>(reps)));
    return run(cfg).summary;
  });

  const double snr0 = encoding_reference_snr_db();
  std::ostringstream csv;
  csv << "snr_db,noise_floor_dbm,encoding,reads_mean,reads_sd,attempts_mean,success_per_attempt\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<double> reads;
    double attempts = 0.0;
    double ok = 0.0;
    for (int r = 0; r < reps; ++r) {
      const RunSummary& s = runs[i * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
      reads.push_back(static_cast<double>(s.total_reads));
      attempts += static_cast<double>(singulation_attempts(s));
      ok += static_cast<double>(s.total_reads);
    }
    const MeanSd m = mean_sd(reads);
    csv << fmt(snr0 + (-80.0 - points[i].floor)) << ',' << fmt(points[i].floor) << ','
        << to_string(points[i].enc) << ',' << fmt(m.mean) << ',' << fmt(m.sd) << ','
        << fmt(attempts / reps) << ',' << fmt(attempts > 0 ? ok / attempts : 0.0) << '\n';
  }
  Artifacts a;
  a.add("encoding.csv", csv.str());
  return a.commit("fig9-encoding", out, seed, hash_of(definition));
}

RecipeReport fig10_correlation(const fs::path& out, std::uint64_t seed, int reps, int jobs) {
  const std::vector<double> speeds{5.0, 10.0, 20.0, 30.0, 40.0};
  const ReadRateCurve curve = lane_rig_curve(5.0, jobs);
  json definition = json::array();
  for (double v : speeds) definition.push_back(to_json(lane_rig_config(v)));

  const std::size_t total = speeds.size() * static_cast<std::size_t>(reps);
  const auto corr = parallel_map<double>(total, jobs, [&](std::size_t job) {
    SimConfig cfg = lane_rig_config(speeds[job / static_cast<std::size_t>(reps)]);
    cfg.seed = replication_seed(seed, static_cast<int>(job % static_cast<std::size_t>(reps)));
    return lane_rig_correlation(cfg, curve);
  });

  Artifacts a;
  std::ostringstream curve_csv;
  curve.write_csv(curve_csv);
  a.add("curve.csv", curve_csv.str());

  std::ostringstream runs_csv;
  runs_csv << "speed_mph,replication,correlation\n";
  std::ostringstream summary;
  summary << "speed_mph,correlation_mean,correlation_sd,replications\n";
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    std::vector<double> c;
    for (int r = 0; r < reps; ++r) {
      const double x = corr[i * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
      c.push_back(x);
      runs_csv << fmt(speeds[i]) << ',' << r << ',' << fmt(x) << '\n';
    }
    const MeanSd m = mean_sd(c);
    summary << fmt(speeds[i]) << ',' << fmt(m.mean) << ',' << fmt(m.sd) << ',' << reps << '\n';
  }
  a.add("correlation_runs.csv", runs_csv.str());
  a.add("correlation.csv", summary.str());

  for (double v : {speeds.front(), speeds.back()}) {
    SimConfig cfg = lane_rig_config(v);
    cfg.seed = replication_seed(seed, 0);
    const LaneRun lr = simulate_lane(cfg);
    const auto track = track_lane(cfg, lr, kLaneRigTauS, curve, lane_rig_estimator(cfg));
    std::ostringstream t;
    t << "t_mid_s,truth_m,estimate_m,z_left,n_left,z_right,n_right\n";
    for (const auto& pt : track) {
      t << fmt(pt.t_mid_s) << ',' << fmt(pt.truth_m) << ',' << fmt(pt.estimate.pos) << ','
        << pt.left.z << ',' << pt.left.n << ',' << pt.right.z << ',' << pt.right.n << '\n';
    }
    a.add("track_" + fmt(v) + "mph.csv", t.str());
  }
  return a.commit("fig10-correlation", out, seed, hash_of(definition));
}

RecipeReport fig11_scenarios(const fs::path& out, std::uint64_t seed, int reps, int jobs) {
  struct Point {
    ScenarioId id;
    double mph;
    double angle;
    double height_offset;
  };
  std::vector<Point> grid;
  for (ScenarioId id : {ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4,
                        ScenarioId::S5, ScenarioId::S6}) {
    for (double mph : {15.0, 30.0}) {
      for (double angle : {0.0, 45.0}) grid.push_back({id, mph, angle, 0.0});
    }
  }
  const std::size_t grid_rows = grid.size();
  for (double off : {-0.3, 0.0, 0.3}) grid.push_back({ScenarioId::S6, 15.0, 45.0, off});

  json definition = json::array();
  for (const Point& p : grid) {
    definition.push_back(to_json(scenario_grid_config(p.id, p.mph, p.angle, p.height_offset)));
  }
  const std::size_t total = grid.size() * static_cast<std::size_t>(reps);
  const auto runs = parallel_map<RunSummary>(total, jobs, [&](std::size_t job) {
    const Point& p = grid[job / static_cast<std::size_t>(reps)];
    SimConfig cfg = scenario_grid_config(p.id, p.mph, p.angle, p.height_offset);
    cfg.seed = replication_seed(seed, static_cast<int>(job % static_cast<std::size_t>(reps)));
    return run(cfg).summary;
  });

  const auto stats = [&](std::size_t i) {
    std::vector<double> reads;
    double dwell = 0.0;
    for (int r = 0; r < reps; ++r) {
      const RunSummary& s = runs[i * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
      reads.push_back(static_cast<double>(s.total_reads));
      dwell = s.dwell_per_tag.empty() ? 0.0 : s.dwell_per_tag.front();
    }
    return std::pair{mean_sd(reads), dwell};
  };

  std::ostringstream csv;
  csv << "scenario,speed_mph,mount_angle_deg,reads_mean,reads_sd,dwell_s,reads_per_dwell_s,"
         "replications\n";
  for (std::size_t i = 0; i < grid_rows; ++i) {
    const auto [m, dwell] = stats(i);
    csv << to_string(grid[i].id) << ',' << fmt(grid[i].mph) << ',' << fmt(grid[i].angle) << ','
        << fmt(m.mean) << ',' << fmt(m.sd) << ',' << fmt(dwell) << ','
        << fmt(dwell > 0.0 ? m.mean / dwell : 0.0) << ',' << reps << '\n';
  }
  std::ostringstream heights;
  heights << "tag_height_offset_m,reads_mean,reads_sd,replications\n";
  for (std::size_t i = grid_rows; i < grid.size(); ++i) {
    const auto [m, dwell] = stats(i);
    heights << fmt(grid[i].height_offset) << ',' << fmt(m.mean) << ',' << fmt(m.sd) << ','
            << reps << '\n';
  }
  Artifacts a;
  a.add("scenarios.csv", csv.str());
  a.add("tag_height.csv", heights.str());
  return a.commit("fig11-scenarios", out, seed, hash_of(definition));
}

RecipeReport fig13_sensor_time(const fs::path& out, std::uint64_t seed, int reps, int jobs) {
  const SensorFixture fixture = calibrated_sensor_fixture();
  std::vector<double> distances;
  for (int i = 0; i <= 8; ++i) distances.push_back(0.30 + 0.05 * i);
  SensorSweepOptions opts;
  opts.trials = reps;
  opts.seed = seed;
  opts.jobs = jobs;

  json definition{{"distances_m", distances},
                  {"tx_power_dbm", fixture.radio.tx_power_dbm},
                  {"sigma_db", fixture.multipath.excess_noise_sigma_db},
                  {"timing", to_json(SensorTimingModel{})}};
  Artifacts a;

  std::ostringstream comp;
  comp << "variant,power_mode,query_processing_s,activation_s,propagation_s,t_total_s\n";
  for (PowerMode mode : {PowerMode::passive, PowerMode::assisted}) {
    SensorTimingModel model;
    model.power_mode = mode;
    for (ActivationVariant v : {ActivationVariant::tag_ic, ActivationVariant::tag_ic_plus_sensor,
                                ActivationVariant::tag_ic_sensor_mcu}) {
      comp << to_string(v) << ',' << to_string(mode) << ',' << fmt(model.query_processing_s)
           << ',' << fmt(model.activation(v)) << ',' << fmt(model.propagation_s) << ','
           << fmt(t_total(model, v)) << '\n';
    }
  }
  a.add("components.csv", comp.str());

  std::ostringstream sweep_csv;
  write_sensor_sweep_csv(sweep_csv, sensor_sweep(distances, Gen2Params{}, SensorTimingModel{},
                                                 fixture, opts));
  a.add("sensor_sweep.csv", sweep_csv.str());

  std::ostringstream enc;
  enc << "encoding,distance_m,median_s,p10_s,p90_s,attempts_mean,success_fraction\n";
  for (Encoding e : kAllEncodings) {
    Gen2Params g;
    g.encoding = e;
    for (const auto& row : sensor_sweep({0.40, 0.65}, g, SensorTimingModel{}, fixture, opts)) {
      enc << to_string(e) << ',' << fmt(row.distance_m) << ',' << fmt(row.median_s) << ','
          << fmt(row.p10_s) << ',' << fmt(row.p90_s) << ',' << fmt(row.attempts_mean) << ','
          << fmt(row.success_fraction) << '\n';
    }
  }
  a.add("sensor_encodings.csv", enc.str());
  return a.commit("fig13-sensor-time", out, seed, hash_of(definition));
}

struct Builtin {
  const char* name;
  int default_reps;
  RecipeReport (*fn)(const fs::path&, std::uint64_t, int, int);
};

constexpr Builtin kBuiltins[] = {
    {"fig9-encoding", 30, &fig9_encoding},
    {"fig10-correlation", 30, &fig10_correlation},
    {"fig11-scenarios", 30, &fig11_scenarios},
    {"fig13-sensor-time", 200, &fig13_sensor_time},
};

std::string cell(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

std::vector<std::string> builtin_recipe_names() {
  std::vector<std::string> names;
  for (const auto& b : kBuiltins) names.emplace_back(b.name);
  return names;
}

bool is_builtin_recipe(const std::string& name) {
  return std::any_of(std::begin(kBuiltins), std::end(kBuiltins),
                     [&](const Builtin& b) { return name == b.name; });
}

RecipeReport run_builtin_recipe(const std::string& name, const fs::path& out_dir,
                                const RecipeOptions& options) {
  for (const auto& b : kBuiltins) {
    if (name != b.name) continue;
    const int reps = options.replications.value_or(b.default_reps);
    if (reps < 1) throw ValidationError("replications", "must be >= 1");
    return b.fn(out_dir, options.seed.value_or(1), reps, options.jobs);
  }
  throw ValidationError("recipe", "unknown recipe '" + name + "'");
}

RecipeReport run_recipe(const ExperimentRecipe& recipe, const fs::path& out_dir,
                        const RecipeOptions& options) {
  recipe.validate();
  json base = recipe.base_config;
  if (options.seed) base["seed"] = *options.seed;
  const SimConfig parsed = config_from_json(base);
  const std::uint64_t seed = parsed.seed;

  // Cartesian product, last axis varying fastest.
  std::vector<std::vector<std::size_t>> points{{}};
  for (const auto& axis : recipe.sweeps) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& p : points) {
      for (std::size_t i = 0; i < axis.values.size(); ++i) {
        auto q = p;
        q.push_back(i);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  std::vector<SimConfig> configs;
  configs.reserve(points.size());
  for (const auto& p : points) {
    json doc = base;
    for (std::size_t a = 0; a < p.size(); ++a) {
      doc = with_parameter(doc, recipe.sweeps[a].axis, recipe.sweeps[a].values[p[a]]);
    }
    configs.push_back(config_from_json(doc));
  }

  const auto reps = static_cast<std::size_t>(recipe.replications);
  const std::size_t total = configs.size() * reps;
  const bool traces =
      std::find(recipe.outputs.begin(), recipe.outputs.end(), "traces") != recipe.outputs.end();
  const auto results = parallel_map<RunResult>(total, options.jobs, [&](std::size_t job) {
    SimConfig cfg = configs[job / reps];
    cfg.seed = replication_seed(seed, static_cast<int>(job % reps));
    RunResult r = run(cfg);
    if (!traces) {
      r.trace.clear();
      r.interrogations.clear();
      r.protocol.clear();
    }
    return r;
  });

  Artifacts a;
  const auto has = [&](const char* o) {
    return std::find(recipe.outputs.begin(), recipe.outputs.end(), o) != recipe.outputs.end();
  };
  if (has("summary.csv")) {
    std::ostringstream csv;
    csv << "point";
    for (const auto& axis : recipe.sweeps) csv << ',' << axis.axis;
    csv << ",replication,seed,total_reads,reads_per_second,rounds";
    for (int k = 0; k <= static_cast<int>(OutcomeKind::decode_failure); ++k) {
      csv << ",outcome." << to_string(static_cast<OutcomeKind>(k));
    }
    csv << '\n';
    for (std::size_t job = 0; job < total; ++job) {
      const std::size_t pt = job / reps;
      const RunSummary& s = results[job].summary;
      csv << pt;
      for (std::size_t ax = 0; ax < points[pt].size(); ++ax) {
        csv << ',' << cell(recipe.sweeps[ax].values[points[pt][ax]]);
      }
      csv << ',' << job % reps << ',' << replication_seed(seed, static_cast<int>(job % reps))
          << ',' << s.total_reads << ',' << fmt(s.reads_per_second) << ',' << s.rounds;
      for (int k = 0; k <= static_cast<int>(OutcomeKind::decode_failure); ++k) {
        const auto it = s.outcome_histogram.find(static_cast<OutcomeKind>(k));
        csv << ',' << (it == s.outcome_histogram.end() ? 0 : it->second);
      }
      csv << '\n';
    }
    a.add("summary.csv", csv.str());
  }
  if (has("summary.json")) {
    json rows = json::array();
    for (std::size_t job = 0; job < total; ++job) {
      const std::size_t pt = job / reps;
      json params = json::object();
      for (std::size_t ax = 0; ax < points[pt].size(); ++ax) {
        params[recipe.sweeps[ax].axis] = recipe.sweeps[ax].values[points[pt][ax]];
      }
      rows.push_back({{"point", pt},
                      {"parameters", params},
                      {"replication", job % reps},
                      {"seed", replication_seed(seed, static_cast<int>(job % reps))},
                      {"summary", to_json(results[job].summary)}});
    }
    a.add("summary.json", rows.dump(2) + "\n");
  }
  if (traces) {
    for (std::size_t job = 0; job < total; ++job) {
      const std::string stem =
          "p" + std::to_string(job / reps) + "_r" + std::to_string(job % reps);
      std::ostringstream t;
      write_trace_csv(t, results[job].trace);
      a.add("trace_" + stem + ".csv", t.str());
      std::ostringstream q;
      write_interrogations_csv(q, results[job].interrogations);
      a.add("interrogations_" + stem + ".csv", q.str());
    }
  }
  a.add("recipe.json", to_json(recipe).dump(2) + "\n");
  return a.commit(recipe.name, out_dir, seed, hash_hex(config_hash(parsed)));
}

}  // namespace reisim
