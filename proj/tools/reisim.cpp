#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reisim/config.hpp"
#include "reisim/error.hpp"
#include "reisim/io.hpp"
#include "reisim/lane.hpp"
#include "reisim/recipe.hpp"
#include "reisim/sensing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace reisim;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  std::string format = "csv";
};

fs::path out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("REISIM_OUT_DIR"); env && *env) return env;
  return "reisim-out";
}

json config_doc(const Common& c) {
  json doc = c.config.empty() ? json{{"scenario", "S1"}} : load_document(c.config);
  if (c.seed) doc["seed"] = *c.seed;
  return doc;
}

/// "[1,2]" is read as a JSON array; otherwise a comma list whose cells are
/// JSON literals where they parse and strings where they do not.
std::vector<json> parse_values(const std::string& text) {
  if (!text.empty() && text.front() == '[') {
    const json arr = parse_document(text, "--values");
    if (!arr.is_array()) throw ParseError("--values", "expected an array");
    return {arr.begin(), arr.end()};
  }
  std::vector<json> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    json v = json::parse(cell, nullptr, false);
    out.push_back(v.is_discarded() ? json(cell) : v);
  }
  return out;
}

void emit(const fs::path& path, const std::string& text) {
  write_file(path, text);
  std::cerr << "wrote " << path.string() << '\n';
}

int cmd_run(const Common& c, const std::string& detail) {
  json doc = config_doc(c);
  if (!detail.empty()) doc["trace_detail"] = detail;
  const SimConfig cfg = config_from_json(doc);
  const RunResult r = run(cfg);
  const fs::path dir = out_dir(c);
  std::ostringstream trace;
  write_trace_csv(trace, r.trace);
  emit(dir / "trace.csv", trace.str());
  std::ostringstream rounds;
  write_interrogations_csv(rounds, r.interrogations);
  emit(dir / "interrogations.csv", rounds.str());
  if (cfg.trace_detail == TraceDetail::full_protocol) {
    std::ostringstream proto;
    write_protocol_csv(proto, r.protocol);
    emit(dir / "protocol.csv", proto.str());
  }
  emit(dir / "config.json", canonical_dump(cfg) + "\n");
  if (c.format == "json") {
    json s = to_json(r.summary);
    s["config_hash"] = hash_hex(config_hash(cfg));
    emit(dir / "summary.json", s.dump(2) + "\n");
  } else {
    std::ostringstream s;
    write_summary_text(s, r.summary);
    s << "config_hash = " << hash_hex(config_hash(cfg)) << '\n';
    emit(dir / "summary.txt", s.str());
  }
  write_summary_text(std::cout, r.summary);
  return 0;
}

int cmd_sweep(const Common& c, const std::string& axis, const std::string& values_text) {
  const json base = config_doc(c);
  const std::vector<json> values = parse_values(values_text);
  const auto rows = sweep(base, axis, values, c.jobs);
  std::ostringstream out;
  if (c.format == "json") {
    json arr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      arr.push_back({{"axis", axis}, {"value", values[i]}, {"summary", to_json(rows[i])}});
    }
    out << arr.dump(2) << '\n';
  } else {
    out << "value,total_reads,reads_per_second,rounds\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << (values[i].is_string() ? values[i].get<std::string>() : values[i].dump()) << ','
          << rows[i].total_reads << ',' << format_number(rows[i].reads_per_second) << ','
          << rows[i].rounds << '\n';
    }
  }
  emit(out_dir(c) / (c.format == "json" ? "sweep.json" : "sweep.csv"), out.str());
  std::cout << out.str();
  return 0;
}

int cmd_recipe(const Common& c, const std::string& name, std::optional<int> replications) {
  RecipeOptions opts;
  opts.seed = c.seed;
  opts.jobs = c.jobs;
  opts.replications = replications;
  RecipeReport rep;
  if (is_builtin_recipe(name)) {
    rep = run_builtin_recipe(name, out_dir(c), opts);
  } else if (fs::exists(name)) {
    ExperimentRecipe recipe = recipe_from_json(load_document(name));
    if (replications) recipe.replications = *replications;
    rep = run_recipe(recipe, out_dir(c), opts);
  } else {
    std::string known;
    for (const auto& n : builtin_recipe_names()) known += " " + n;
    throw ValidationError("recipe", "'" + name + "' is neither a built-in (" + known.substr(1) +
                                        ") nor a recipe file");
  }
  std::cout << rep.directory.string() << " seed=" << rep.seed << " hash=" << rep.config_hash
            << '\n';
  for (const auto& f : rep.files) std::cout << "  " << f << '\n';
  return 0;
}

int cmd_timing(const Common& c) {
  const SimConfig cfg = config_from_json(config_doc(c));
  if (c.format == "json") {
    std::ostringstream table;
    write_timing_table_csv(table, cfg.gen2);
    std::istringstream csv(table.str());
    json arr = json::array();
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      const auto a = line.find(',');
      const auto b = line.find(',', a + 1);
      json row{{"item", line.substr(0, a)}, {"duration_us", std::stod(line.substr(b + 1))}};
      const std::string bits = line.substr(a + 1, b - a - 1);
      row["bits"] = bits.empty() ? json(nullptr) : json(std::stoi(bits));
      arr.push_back(row);
    }
    std::cout << arr.dump(2) << '\n';
  } else {
    write_timing_table_csv(std::cout, cfg.gen2);
  }
  return 0;
}

int cmd_sensor(const Common& c, double dmin, double dmax, double step, int trials,
               const std::string& variant, const std::string& sensing_path) {
  if (!(step > 0.0) || !(dmin > 0.0) || dmax < dmin) {
    throw ValidationError("--dmin/--dmax/--step", "need 0 < dmin <= dmax and step > 0");
  }
  const auto v = activation_variant_from_string(variant);
  if (!v) throw ValidationError("--variant", "unknown variant '" + variant + "'");
  Gen2Params gen2;
  if (!c.config.empty()) gen2 = config_from_json(config_doc(c)).gen2;
  const SensorTimingModel model = sensing_path.empty()
                                      ? SensorTimingModel{}
                                      : sensor_model_from_json(load_document(sensing_path));
  std::vector<double> d;
  const auto n = static_cast<int>(std::floor((dmax - dmin) / step + 1e-9));
  for (int i = 0; i <= n; ++i) d.push_back(dmin + step * i);
  SensorSweepOptions opts;
  opts.trials = trials;
  opts.seed = c.seed.value_or(1);
  opts.jobs = c.jobs;
  opts.variant = *v;
  const auto rows = sensor_sweep(d, gen2, model, calibrated_sensor_fixture(), opts);
  std::ostringstream out;
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"distance_m", r.distance_m}, {"median_s", r.median_s}, {"p10_s", r.p10_s},
                     {"p90_s", r.p90_s}, {"attempts_mean", r.attempts_mean},
                     {"success_fraction", r.success_fraction}});
    }
    out << arr.dump(2) << '\n';
  } else {
    write_sensor_sweep_csv(out, rows);
  }
  std::cout << out.str();
  if (!c.out.empty() || std::getenv("REISIM_OUT_DIR")) {
    emit(out_dir(c) / (c.format == "json" ? "sensor_sweep.json" : "sensor_sweep.csv"), out.str());
  }
  return 0;
}

struct LaneArgs {
  std::string curve;
  std::string left_trace, left_rounds, right_trace, right_rounds;
  double tau = kLaneRigTauS;
  std::optional<double> nominal_offset;
  bool lane_rig = false;
};

int cmd_estimate_lane(const Common& c, const LaneArgs& a) {
  std::ostringstream out;
  out << "t_s,pos_m";
  if (!a.left_trace.empty()) {
    if (a.curve.empty() || a.left_rounds.empty() || a.right_trace.empty() ||
        a.right_rounds.empty()) {
      throw ValidationError("estimate-lane",
                            "trace mode needs --curve and both sides' --*-trace/--*-rounds");
    }
    const auto load_trace = [](const std::string& p) {
      std::ifstream in(p);
      if (!in) throw IoError("cannot open " + p);
      return read_trace_csv(in);
    };
    const auto load_rounds = [](const std::string& p) {
      std::ifstream in(p);
      if (!in) throw IoError("cannot open " + p);
      return read_interrogations_csv(in);
    };
    const auto lt = load_trace(a.left_trace);
    const auto rt = load_trace(a.right_trace);
    const auto lr = load_rounds(a.left_rounds);
    const auto rr = load_rounds(a.right_rounds);
    const ReadRateCurve curve = ReadRateCurve::load(a.curve);
    double last = 0.0;
    for (const auto* rounds : {&lr, &rr}) {
      if (!rounds->empty()) last = std::max(last, rounds->back().t_start);
    }
    const double t_end = (std::floor(last / a.tau) + 1.0) * a.tau;
    const auto left = window_counts(lt, lr, a.tau, t_end);
    const auto right = window_counts(rt, rr, a.tau, t_end);
    LaneEstimatorOptions opts;
    if (a.nominal_offset) opts.nominal_offset_m = *a.nominal_offset;
    out << '\n';
    double prev = 0.0;
    for (std::size_t k = 0; k < left.size() && k < right.size(); ++k) {
      const auto e = estimate_position(left[k].z, left[k].n, right[k].z, right[k].n, curve, prev,
                                       opts);
      prev = e.pos;
      out << format_number(left[k].t_start_s + 0.5 * a.tau) << ',' << format_number(e.pos)
          << '\n';
    }
  } else {
    SimConfig cfg = a.lane_rig || c.config.empty() ? lane_rig_config(5.0)
                                                   : config_from_json(config_doc(c));
    if (c.seed) cfg.seed = *c.seed;
    const double tau = cfg.lane.tau_s.value_or(a.tau);
    const ReadRateCurve curve =
        a.curve.empty() ? lane_rig_curve(5.0, c.jobs) : ReadRateCurve::load(a.curve);
    LaneEstimatorOptions opts;
    opts.nominal_offset_m = a.nominal_offset.value_or(nominal_marker_offset(cfg));
    const LaneRun lr = simulate_lane(cfg);
    const auto track = track_lane(cfg, lr, tau, curve, opts);
    out << ",truth_m\n";
    std::vector<double> est;
    std::vector<double> truth;
    for (const auto& pt : track) {
      out << format_number(pt.t_mid_s) << ',' << format_number(pt.estimate.pos) << ','
          << format_number(pt.truth_m) << '\n';
      est.push_back(pt.estimate.pos);
      truth.push_back(pt.truth_m);
    }
    const fs::path dir = out_dir(c);
    std::ostringstream t;
    write_trace_csv(t, lr.left.trace);
    emit(dir / "left_trace.csv", t.str());
    t.str("");
    write_trace_csv(t, lr.right.trace);
    emit(dir / "right_trace.csv", t.str());
    t.str("");
    write_interrogations_csv(t, lr.left.interrogations);
    emit(dir / "left_rounds.csv", t.str());
    t.str("");
    write_interrogations_csv(t, lr.right.interrogations);
    emit(dir / "right_rounds.csv", t.str());
    t.str("");
    curve.write_csv(t);
    emit(dir / "curve.csv", t.str());
    emit(dir / "lane_estimate.csv", out.str());
    try {
      std::cerr << "correlation with truth: " << cross_correlation(est, truth) << '\n';
    } catch (const DegenerateSeries&) {
    }
  }
  std::cout << out.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reisim: vehicle-mounted UHF RFID reader simulator"};
  app.require_subcommand(1);
  Common c;
  std::uint64_t seed = 0;

  const auto common = [&](CLI::App* sub, bool config = true) {
    if (config) sub->add_option("--config", c.config, "Config JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Base seed (overrides the config)");
    sub->add_option("--out", c.out, "Output directory (default $REISIM_OUT_DIR or ./reisim-out)");
    sub->add_option("--jobs", c.jobs, "Parallel runs")->check(CLI::PositiveNumber);
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* run_cmd = app.add_subcommand("run", "Run one drive and write trace + summary");
  common(run_cmd);
  std::string detail;
  run_cmd->add_option("--trace-detail", detail, "events_only or full_protocol")
      ->check(CLI::IsMember({"events_only", "full_protocol"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Vary one config field");
  common(sweep_cmd);
  std::string axis;
  std::string values;
  sweep_cmd->add_option("--axis", axis, "Dotted field path, e.g. mount.mount_angle_deg")->required();
  sweep_cmd->add_option("--values", values, "Comma list or JSON array")->required();

  auto* recipe_cmd = app.add_subcommand("recipe", "Run a built-in or file recipe");
  common(recipe_cmd, false);
  std::string recipe_name;
  std::optional<int> replications;
  recipe_cmd->add_option("name", recipe_name, "Built-in name or recipe JSON path")->required();
  recipe_cmd->add_option("--replications", replications, "Seeds per grid point");
  auto* list_cmd = app.add_subcommand("recipes", "List built-in recipes");

  auto* timing_cmd = app.add_subcommand("timing-table", "Gen2 command and reply durations");
  common(timing_cmd);

  auto* sensor_cmd = app.add_subcommand("sensor-sweep", "Sensor read time versus distance");
  common(sensor_cmd);
  double dmin = 0.30;
  double dmax = 0.70;
  double step = 0.05;
  int trials = 500;
  std::string variant = "tag_ic_plus_sensor";
  std::string sensing_path;
  sensor_cmd->add_option("--dmin", dmin, "Nearest distance (m)");
  sensor_cmd->add_option("--dmax", dmax, "Farthest distance (m)");
  sensor_cmd->add_option("--step", step, "Distance step (m)");
  sensor_cmd->add_option("--trials", trials, "Trials per distance")->check(CLI::PositiveNumber);
  sensor_cmd->add_option("--variant", variant, "tag_ic, tag_ic_plus_sensor, tag_ic_sensor_mcu");
  sensor_cmd->add_option("--sensing", sensing_path, "Sensor timing model JSON")
      ->check(CLI::ExistingFile);

  auto* lane_cmd = app.add_subcommand(
      "estimate-lane", "Windowed lane-position estimates from two side antennas");
  common(lane_cmd);
  LaneArgs lane;
  std::optional<double> nominal;
  lane_cmd->add_option("--curve", lane.curve, "Read-rate curve CSV (offset_m,probability)");
  lane_cmd->add_option("--left-trace", lane.left_trace, "Left antenna trace CSV");
  lane_cmd->add_option("--left-rounds", lane.left_rounds, "Left antenna interrogations CSV");
  lane_cmd->add_option("--right-trace", lane.right_trace, "Right antenna trace CSV");
  lane_cmd->add_option("--right-rounds", lane.right_rounds, "Right antenna interrogations CSV");
  lane_cmd->add_option("--tau", lane.tau, "Window length (s)")->check(CLI::PositiveNumber);
  lane_cmd->add_option("--nominal-offset", nominal, "Antenna-to-marker distance when centred (m)");
  lane_cmd->add_flag("--lane-rig", lane.lane_rig, "Simulate the built-in lane rig at 5 mph");

  CLI11_PARSE(app, argc, argv);
  const auto* seed_opt = app.get_subcommands().front()->get_option_no_throw("--seed");
  if (seed_opt != nullptr && seed_opt->count() > 0) c.seed = seed;
  lane.nominal_offset = nominal;

  try {
    if (*run_cmd) return cmd_run(c, detail);
    if (*sweep_cmd) return cmd_sweep(c, axis, values);
    if (*recipe_cmd) return cmd_recipe(c, recipe_name, replications);
    if (*list_cmd) {
      for (const auto& n : builtin_recipe_names()) std::cout << n << '\n';
      return 0;
    }
    if (*timing_cmd) return cmd_timing(c);
    if (*sensor_cmd) return cmd_sensor(c, dmin, dmax, step, trials, variant, sensing_path);
    if (*lane_cmd) return cmd_estimate_lane(c, lane);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
