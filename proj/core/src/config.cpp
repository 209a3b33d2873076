#include "reisim/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "reisim/error.hpp"
#include "reisim/io.hpp"
#include "reisim/rng.hpp"

namespace reisim {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

/// Reads fields of one JSON object, remembering which keys were consumed so
/// that leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  std::string key(std::string_view k) const { return join(path_, k); }

  const json* take(std::string_view k) {
    const auto it = j_.find(std::string(k));
    if (it == j_.end()) return nullptr;
    used_.insert(std::string(k));
    return &*it;
  }

  bool number(std::string_view k, double& out) {
    const json* v = take(k);
    if (!v) return false;
    if (!v->is_number()) throw ValidationError(key(k), "expected a number");
    out = v->get<double>();
    return true;
  }

  bool optional_number(std::string_view k, std::optional<double>& out) {
    const json* v = take(k);
    if (!v) return false;
    if (v->is_null()) {
      out.reset();
      return true;
    }
    if (!v->is_number()) throw ValidationError(key(k), "expected a number or null");
    out = v->get<double>();
    return true;
  }

  bool integer(std::string_view k, int& out) {
    const json* v = take(k);
    if (!v) return false;
    if (!v->is_number_integer()) throw ValidationError(key(k), "expected an integer");
    const auto x = v->get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      throw ValidationError(key(k), "integer out of range");
    }
    out = static_cast<int>(x);
    return true;
  }

  bool unsigned64(std::string_view k, std::uint64_t& out) {
    const json* v = take(k);
    if (!v) return false;
    if (v->is_number_unsigned()) {
      out = v->get<std::uint64_t>();
    } else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
      out = static_cast<std::uint64_t>(v->get<std::int64_t>());
    } else {
      throw ValidationError(key(k), "expected a non-negative integer");
    }
    return true;
  }

  bool boolean(std::string_view k, bool& out) {
    const json* v = take(k);
    if (!v) return false;
    if (!v->is_boolean()) throw ValidationError(key(k), "expected true or false");
    out = v->get<bool>();
    return true;
  }

  bool string(std::string_view k, std::string& out) {
    const json* v = take(k);
    if (!v) return false;
    if (!v->is_string()) throw ValidationError(key(k), "expected a string");
    out = v->get<std::string>();
    return true;
  }

  template <typename E, typename Parse>
  bool enumeration(std::string_view k, E& out, Parse parse, std::string_view choices) {
    std::string s;
    if (!string(k, s)) return false;
    const auto e = parse(s);
    if (!e) throw ValidationError(key(k), "unknown value '" + s + "'; expected one of " + std::string(choices));
    out = *e;
    return true;
  }

  /// `<base>_deg` or `<base>_rad`, never both.
  bool angle(std::string_view base, double& rad) {
    const std::string deg_key = std::string(base) + "_deg";
    const std::string rad_key = std::string(base) + "_rad";
    if (has(deg_key) && has(rad_key)) {
      throw ValidationError(key(deg_key), "give either " + deg_key + " or " + rad_key + ", not both");
    }
    double v = 0.0;
    if (number(deg_key, v)) {
      rad = deg_to_rad(v);
      return true;
    }
    if (number(rad_key, v)) {
      rad = v;
      return true;
    }
    return false;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw UnknownParameter(key(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

constexpr std::string_view kFacings = "side_horizontal, downward";
constexpr std::string_view kSides = "left, right";
constexpr std::string_view kPatterns = "flat_top, cosine_power";
constexpr std::string_view kModes = "free_space, two_ray";
constexpr std::string_view kEncodings = "FM0, Miller2, Miller4, Miller8";

std::optional<Facing> facing_from(std::string_view s) {
  if (s == "side_horizontal") return Facing::side_horizontal;
  if (s == "downward") return Facing::downward;
  return std::nullopt;
}
std::string_view name(Facing f) { return f == Facing::downward ? "downward" : "side_horizontal"; }

std::optional<Side> side_from(std::string_view s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  return std::nullopt;
}
std::string_view name(Side s) { return s == Side::right ? "right" : "left"; }

std::optional<BeamPattern> pattern_from(std::string_view s) {
  if (s == "flat_top") return BeamPattern::flat_top;
  if (s == "cosine_power") return BeamPattern::cosine_power;
  return std::nullopt;
}
std::string_view name(BeamPattern p) {
  return p == BeamPattern::cosine_power ? "cosine_power" : "flat_top";
}

std::optional<MultipathMode> mode_from(std::string_view s) {
  if (s == "free_space") return MultipathMode::free_space;
  if (s == "two_ray") return MultipathMode::two_ray;
  return std::nullopt;
}
std::string_view name(MultipathMode m) { return m == MultipathMode::two_ray ? "two_ray" : "free_space"; }

bool is_sign(ScenarioId id) {
  return id == ScenarioId::S1 || id == ScenarioId::S2 || id == ScenarioId::S3 ||
         id == ScenarioId::S4 || id == ScenarioId::S5 || id == ScenarioId::S6;
}

// --- writers ---------------------------------------------------------------

json mount_json(const AntennaMount& m) {
  return json{{"mount_angle_rad", m.mount_angle_rad},
              {"beamwidth_rad", m.beamwidth_rad},
              {"height_m", m.height_m},
              {"lateral_offset_m", m.lateral_offset_m},
              {"boresight_gain_dbi", m.boresight_gain_dbi},
              {"facing", name(m.facing)},
              {"side", name(m.side)},
              {"pattern", name(m.pattern)},
              {"taper_exponent", m.taper_exponent}};
}

json radio_json(const RadioConfig& r) {
  return json{{"tx_power_dbm", r.tx_power_dbm},
              {"reader_sensitivity_dbm", r.reader_sensitivity_dbm},
              {"tag_chip_sensitivity_dbm", r.tag_chip_sensitivity_dbm},
              {"frequency_hz", r.frequency_hz},
              {"tag_gain_dbi", r.tag_gain_dbi},
              {"backscatter_loss_db", r.backscatter_loss_db}};
}

json multipath_json(const MultipathModel& m) {
  return json{{"mode", name(m.mode)},
              {"ground_reflection_coefficient", m.ground_reflection_coefficient},
              {"noise_floor_dbm", m.noise_floor_dbm},
              {"excess_noise_sigma_db", m.excess_noise_sigma_db},
              {"coherence_s", m.coherence_s}};
}

json gen2_json(const Gen2Params& p) {
  json j{{"tari_s", p.tari_s},
         {"data1_ratio", p.data1_ratio},
         {"dr", p.dr},
         {"blf_hz", p.blf_hz},
         {"delimiter_s", p.delimiter_s},
         {"encoding", to_string(p.encoding)},
         {"pilot", to_string(p.pilot)},
         {"q_init", p.q_init},
         {"q_step", p.q_step},
         {"q_adaptive", p.q_adaptive},
         {"session", to_string(p.session)},
         {"target_mode", to_string(p.target_mode)},
         {"epc_reply_bits", p.epc_reply_bits},
         {"rn16_bits", p.rn16_bits},
         {"s1_persistence_s", p.s1_persistence_s}};
  if (p.rtcal_override_s) j["rtcal_s"] = *p.rtcal_override_s;
  if (p.trcal_override_s) j["trcal_s"] = *p.trcal_override_s;
  if (p.t1_override_s) j["t1_s"] = *p.t1_override_s;
  if (p.t2_override_s) j["t2_s"] = *p.t2_override_s;
  if (p.t3_override_s) j["t3_s"] = *p.t3_override_s;
  return j;
}

void write_speed(json& j, const RoadScenario& sc) {
  if (sc.speed_profile.size() == 1) {
    j["speed_mps"] = sc.speed_profile.front().speed_mps;
    return;
  }
  json profile = json::array();
  for (const auto& seg : sc.speed_profile) {
    profile.push_back({{"t_start_s", seg.t_start_s}, {"speed_mps", seg.speed_mps}});
  }
  j["speed_profile"] = profile;
}

json scenario_json(const SimConfig& cfg) {
  const RoadScenario& sc = cfg.scenario;
  json j{{"id", to_string(sc.id)},
         {"lane_width_m", sc.lane_width_m},
         {"max_turn_angle_rad", sc.max_turn_angle_rad}};
  write_speed(j, sc);
  j["lateral"] = json{{"offset_m", sc.lateral.offset_m},
                      {"amplitude_m", sc.lateral.amplitude_m},
                      {"period_m", sc.lateral.period_m},
                      {"phase_rad", sc.lateral.phase_rad}};
  if (cfg.preset) {
    const ScenarioPreset& p = *cfg.preset;
    if (is_sign(sc.id)) {
      if (p.sign.standoff_m) j["standoff_m"] = *p.sign.standoff_m;
      if (sc.id == ScenarioId::S5) j["curvature_per_m"] = p.sign.curvature_per_m;
      j["lead_m"] = p.sign.lead_m;
      j["sign_height_m"] = p.sign.sign_height_m;
      j["tag_height_offset_m"] = p.sign.tag_height_offset_m;
    } else if (sc.id == ScenarioId::lane_straight) {
      j["lane_markers"] = json{{"tag_spacing_m", p.markers.tag_spacing_m},
                               {"start_m", p.markers.start_m},
                               {"length_m", p.markers.length_m}};
    }
    return j;
  }
  j["standoff_m"] = sc.lateral_standoff_m;
  j["curvature_per_m"] = sc.curvature_per_m;
  json tags = json::array();
  for (const auto& t : sc.tags) {
    tags.push_back(json{{"x_m", t.position.x},
                        {"y_m", t.position.y},
                        {"z_m", t.position.z},
                        {"role", to_string(t.role)},
                        {"epc_bits", t.epc_bits},
                        {"user_memory_words", t.user_memory_words}});
  }
  j["tags"] = tags;
  return j;
}

// --- readers ---------------------------------------------------------------

void read_mount(const json& j, AntennaMount& m) {
  Fields f(j, "mount");
  f.angle("mount_angle", m.mount_angle_rad);
  f.angle("beamwidth", m.beamwidth_rad);
  f.number("height_m", m.height_m);
  f.number("lateral_offset_m", m.lateral_offset_m);
  f.number("boresight_gain_dbi", m.boresight_gain_dbi);
  f.enumeration("facing", m.facing, facing_from, kFacings);
  f.enumeration("side", m.side, side_from, kSides);
  f.enumeration("pattern", m.pattern, pattern_from, kPatterns);
  f.number("taper_exponent", m.taper_exponent);
  f.finish();
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw ValidationError("mount", e.what());
  }
}

void read_radio(const json& j, RadioConfig& r) {
  Fields f(j, "radio");
  f.number("tx_power_dbm", r.tx_power_dbm);
  f.number("reader_sensitivity_dbm", r.reader_sensitivity_dbm);
  f.number("tag_chip_sensitivity_dbm", r.tag_chip_sensitivity_dbm);
  f.number("frequency_hz", r.frequency_hz);
  f.number("tag_gain_dbi", r.tag_gain_dbi);
  f.number("backscatter_loss_db", r.backscatter_loss_db);
  f.finish();
}

void read_multipath(const json& j, MultipathModel& m) {
  Fields f(j, "multipath");
  f.enumeration("mode", m.mode, mode_from, kModes);
  f.number("ground_reflection_coefficient", m.ground_reflection_coefficient);
  f.number("noise_floor_dbm", m.noise_floor_dbm);
  f.number("excess_noise_sigma_db", m.excess_noise_sigma_db);
  f.number("coherence_s", m.coherence_s);
  f.finish();
}

void read_gen2(const json& j, Gen2Params& p) {
  Fields f(j, "gen2");
  f.number("tari_s", p.tari_s);
  f.number("data1_ratio", p.data1_ratio);
  if (const json* dr = f.take("dr")) {
    if (dr->is_string() && dr->get<std::string>() == "64/3") {
      p.dr = 64.0 / 3.0;
    } else if (dr->is_number()) {
      p.dr = dr->get<double>();
    } else {
      throw ValidationError("gen2.dr", "expected 8, 64/3 or \"64/3\"");
    }
  }
  f.number("blf_hz", p.blf_hz);
  f.number("delimiter_s", p.delimiter_s);
  f.enumeration("encoding", p.encoding, encoding_from_string, kEncodings);
  f.enumeration("pilot", p.pilot, pilot_tone_from_string, "auto, on, off");
  f.integer("q_init", p.q_init);
  f.number("q_step", p.q_step);
  f.boolean("q_adaptive", p.q_adaptive);
  f.enumeration("session", p.session, session_from_string, "S0, S1, S2, S3");
  f.enumeration("target_mode", p.target_mode, target_mode_from_string,
                "single_target, dual_target");
  f.integer("epc_reply_bits", p.epc_reply_bits);
  f.integer("rn16_bits", p.rn16_bits);
  f.number("s1_persistence_s", p.s1_persistence_s);
  f.optional_number("rtcal_s", p.rtcal_override_s);
  f.optional_number("trcal_s", p.trcal_override_s);
  f.optional_number("t1_s", p.t1_override_s);
  f.optional_number("t2_s", p.t2_override_s);
  f.optional_number("t3_s", p.t3_override_s);
  f.finish();
}

void read_speed(Fields& f, RoadScenario& sc, bool& given) {
  const bool mph = f.has("speed_mph");
  const bool mps = f.has("speed_mps");
  const bool profile = f.has("speed_profile");
  if (int(mph) + int(mps) + int(profile) > 1) {
    throw ValidationError(f.key("speed_mps"),
                          "give only one of speed_mph, speed_mps, speed_profile");
  }
  double v = 0.0;
  given = true;
  if (f.number("speed_mph", v)) {
    sc.speed_profile = {{0.0, mph_to_mps(v)}};
  } else if (f.number("speed_mps", v)) {
    sc.speed_profile = {{0.0, v}};
  } else if (const json* p = f.take("speed_profile")) {
    if (!p->is_array()) throw ValidationError(f.key("speed_profile"), "expected an array");
    sc.speed_profile.clear();
    for (std::size_t i = 0; i < p->size(); ++i) {
      Fields seg((*p)[i], f.key("speed_profile") + "[" + std::to_string(i) + "]");
      SpeedSegment s;
      seg.number("t_start_s", s.t_start_s);
      if (!seg.number("speed_mps", s.speed_mps)) {
        double m = 0.0;
        if (!seg.number("speed_mph", m)) {
          throw ValidationError(seg.key("speed_mps"), "missing speed");
        }
        s.speed_mps = mph_to_mps(m);
      }
      seg.finish();
      sc.speed_profile.push_back(s);
    }
  } else {
    given = false;
  }
}

RoadScenario read_scenario(const json& j, const AntennaMount& mount,
                           std::optional<ScenarioPreset>& preset_out) {
  if (j.is_string()) {
    const auto id = scenario_from_string(j.get<std::string>());
    if (!id) throw ValidationError("scenario", "unknown scenario '" + j.get<std::string>() + "'");
    SimConfig tmp;
    tmp.mount = mount;
    apply_preset(tmp, *id, ScenarioPreset{});
    preset_out = tmp.preset;
    return tmp.scenario;
  }
  Fields f(j, "scenario");
  ScenarioId id = ScenarioId::S1;
  f.enumeration("id", id, scenario_from_string,
                "S1, S2, S3, S4, S5, S6, lane_straight, lane_custom");
  RoadScenario base;
  f.number("lane_width_m", base.lane_width_m);
  f.angle("max_turn_angle", base.max_turn_angle_rad);
  bool speed_given = false;
  read_speed(f, base, speed_given);
  if (const json* lat = f.take("lateral")) {
    Fields l(*lat, "scenario.lateral");
    l.number("offset_m", base.lateral.offset_m);
    l.number("amplitude_m", base.lateral.amplitude_m);
    l.number("period_m", base.lateral.period_m);
    l.angle("phase", base.lateral.phase_rad);
    l.finish();
  }
  std::optional<double> standoff;
  f.optional_number("standoff_m", standoff);
  std::optional<double> curvature;
  f.optional_number("curvature_per_m", curvature);

  const json* tags = f.take("tags");
  if (tags) {
    for (std::string_view k : {"lead_m", "sign_height_m", "tag_height_offset_m", "lane_markers"}) {
      if (f.has(k)) throw ValidationError(f.key(k), "not allowed together with explicit tags");
    }
    f.finish();
    if (!tags->is_array()) throw ValidationError("scenario.tags", "expected an array");
    RoadScenario sc = base;
    sc.id = id;
    if (standoff) sc.lateral_standoff_m = *standoff;
    if (curvature) sc.curvature_per_m = *curvature;
    for (std::size_t i = 0; i < tags->size(); ++i) {
      Fields t((*tags)[i], "scenario.tags[" + std::to_string(i) + "]");
      TagPlacement tag;
      t.number("x_m", tag.position.x);
      t.number("y_m", tag.position.y);
      t.number("z_m", tag.position.z);
      t.enumeration("role", tag.role, tag_role_from_string,
                    "lane_marker, traffic_sign, sensor_tag");
      t.integer("epc_bits", tag.epc_bits);
      t.integer("user_memory_words", tag.user_memory_words);
      t.finish();
      sc.tags.push_back(tag);
    }
    preset_out.reset();
    return sc;
  }

  ScenarioPreset preset;
  preset.sign.speed_mps = speed_given ? base.speed_profile.front().speed_mps
                                      : preset.sign.speed_mps;
  preset.sign.standoff_m = standoff;
  if (curvature) {
    if (id != ScenarioId::S5 && *curvature != 0.0) {
      throw ValidationError("scenario.curvature_per_m",
                            "only S5 is curved; give explicit tags for a custom curved road");
    }
    preset.sign.curvature_per_m = *curvature;
  }
  f.number("lead_m", preset.sign.lead_m);
  f.number("sign_height_m", preset.sign.sign_height_m);
  f.number("tag_height_offset_m", preset.sign.tag_height_offset_m);
  if (const json* lm = f.take("lane_markers")) {
    Fields l(*lm, "scenario.lane_markers");
    l.number("tag_spacing_m", preset.markers.tag_spacing_m);
    l.number("start_m", preset.markers.start_m);
    l.number("length_m", preset.markers.length_m);
    l.finish();
    if (!(preset.markers.tag_spacing_m > 0.0)) {
      throw ValidationError("scenario.lane_markers.tag_spacing_m", "must be > 0");
    }
  }
  f.finish();
  if (standoff && !(*standoff > 0.0)) {
    throw ValidationError("scenario.standoff_m", "must be > 0");
  }
  SimConfig tmp;
  tmp.mount = mount;
  tmp.scenario = base;
  apply_preset(tmp, id, preset);
  if (speed_given) tmp.scenario.speed_profile = base.speed_profile;
  preset_out = tmp.preset;
  return tmp.scenario;
}

}  // namespace

json to_json(const SimConfig& cfg) {
  json j;
  j["scenario"] = scenario_json(cfg);
  j["mount"] = mount_json(cfg.mount);
  j["radio"] = radio_json(cfg.radio);
  j["multipath"] = multipath_json(cfg.multipath);
  j["gen2"] = gen2_json(cfg.gen2);
  j["ber"] = json{{"miller_gain_exponent", cfg.ber.miller_gain_exponent}};
  j["lane"] = json::object();
  if (cfg.lane.tau_s) j["lane"]["tau_s"] = *cfg.lane.tau_s;
  j["duration_s"] = cfg.duration_s;
  j["seed"] = cfg.seed;
  j["trace_detail"] = to_string(cfg.trace_detail);
  return j;
}

SimConfig config_from_json(const json& doc) {
  SimConfig cfg;
  Fields f(doc, "");
  if (const json* m = f.take("mount")) read_mount(*m, cfg.mount);
  if (const json* r = f.take("radio")) read_radio(*r, cfg.radio);
  if (const json* m = f.take("multipath")) read_multipath(*m, cfg.multipath);
  if (const json* g = f.take("gen2")) read_gen2(*g, cfg.gen2);
  if (const json* b = f.take("ber")) {
    Fields bf(*b, "ber");
    bf.number("miller_gain_exponent", cfg.ber.miller_gain_exponent);
    bf.finish();
  }
  if (const json* l = f.take("lane")) {
    Fields lf(*l, "lane");
    lf.optional_number("tau_s", cfg.lane.tau_s);
    lf.finish();
  }
  f.number("duration_s", cfg.duration_s);
  f.unsigned64("seed", cfg.seed);
  f.enumeration("trace_detail", cfg.trace_detail, trace_detail_from_string,
                "events_only, full_protocol");
  if (const json* s = f.take("scenario")) {
    cfg.scenario = read_scenario(*s, cfg.mount, cfg.preset);
  } else {
    apply_preset(cfg, ScenarioId::S1, ScenarioPreset{});
  }
  f.finish();
  cfg.validate();
  return cfg;
}

json parse_document(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin, e.what());
  }
}

json load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str(), path.string());
}

SimConfig load_config(const std::filesystem::path& path) {
  return config_from_json(load_document(path));
}

void save_config(const SimConfig& cfg, const std::filesystem::path& path) {
  write_file(path, canonical_dump(cfg) + '\n');
}

std::string canonical_dump(const SimConfig& cfg) { return to_json(cfg).dump(2); }

std::uint64_t config_hash(const SimConfig& cfg) { return fnv1a64(canonical_dump(cfg)); }

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json with_parameter(const json& doc, const std::string& axis, const json& value) {
  if (axis.empty()) throw UnknownParameter("<axis>", "empty parameter path");
  std::vector<std::string> parts;
  std::stringstream ss(axis);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw UnknownParameter(axis, "malformed parameter path");
    parts.push_back(part);
  }
  json out = doc.is_null() ? json::object() : doc;
  json* node = &out;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& child = (*node)[parts[i]];
    if (child.is_string() && i == 0 && parts[i] == "scenario") {
      child = json{{"id", child.get<std::string>()}};
    }
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw UnknownParameter(axis, "'" + parts[i] + "' is not a section");
    node = &child;
  }
  const std::string& leaf = parts.back();
  const auto drop = [&](std::string_view k) { node->erase(std::string(k)); };
  for (std::string_view suffix : {"_deg", "_rad"}) {
    if (leaf.size() > 4 && leaf.compare(leaf.size() - 4, 4, suffix) == 0) {
      const std::string stem = leaf.substr(0, leaf.size() - 4);
      drop(stem + (suffix == "_deg" ? "_rad" : "_deg"));
    }
  }
  if (leaf == "speed_mph" || leaf == "speed_mps" || leaf == "speed_profile") {
    for (std::string_view k : {"speed_mph", "speed_mps", "speed_profile"}) {
      if (k != leaf) drop(k);
    }
  }
  (*node)[leaf] = value;
  // Resolve now so a bad axis is reported with its own name.
  try {
    config_from_json(out);
  } catch (const UnknownParameter&) {
    throw UnknownParameter(axis, "unknown parameter");
  }
  return out;
}

json to_json(const SensorTimingModel& m) {
  json act = json::object();
  for (const auto& [variant, value] : m.activation_s) act[std::string(to_string(variant))] = value;
  return json{{"query_processing_s", m.query_processing_s},
              {"activation_s", act},
              {"propagation_s", m.propagation_s},
              {"power_mode", to_string(m.power_mode)},
              {"assisted_activation_factor", m.assisted_activation_factor}};
}

SensorTimingModel sensor_model_from_json(const json& doc) {
  SensorTimingModel m;
  Fields f(doc, "sensing");
  f.number("query_processing_s", m.query_processing_s);
  if (const json* act = f.take("activation_s")) {
    if (!act->is_object()) throw ValidationError("sensing.activation_s", "must be an object");
    m.activation_s.clear();
    for (auto it = act->begin(); it != act->end(); ++it) {
      const auto v = activation_variant_from_string(it.key());
      if (!v) throw UnknownParameter("sensing.activation_s." + it.key(), "unknown variant");
      if (!it->is_number()) {
        throw ValidationError("sensing.activation_s." + it.key(), "expected a number");
      }
      m.activation_s[*v] = it->get<double>();
    }
  }
  f.number("propagation_s", m.propagation_s);
  f.enumeration("power_mode", m.power_mode, power_mode_from_string, "passive, assisted");
  f.number("assisted_activation_factor", m.assisted_activation_factor);
  f.finish();
  m.validate();
  return m;
}

}  // namespace reisim
