#include "reisim/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reisim/detail/parallel.hpp"
#include "reisim/error.hpp"
#include "reisim/rng.hpp"

namespace reisim {

std::string_view to_string(ActivationVariant v) {
  switch (v) {
    case ActivationVariant::tag_ic: return "tag_ic";
    case ActivationVariant::tag_ic_plus_sensor: return "tag_ic_plus_sensor";
    case ActivationVariant::tag_ic_sensor_mcu: return "tag_ic_sensor_mcu";
  }
  return "tag_ic";
}

std::optional<ActivationVariant> activation_variant_from_string(std::string_view s) {
  for (auto v : {ActivationVariant::tag_ic, ActivationVariant::tag_ic_plus_sensor,
                 ActivationVariant::tag_ic_sensor_mcu}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string_view to_string(PowerMode m) { return m == PowerMode::assisted ? "assisted" : "passive"; }

std::optional<PowerMode> power_mode_from_string(std::string_view s) {
  if (s == "passive") return PowerMode::passive;
  if (s == "assisted") return PowerMode::assisted;
  return std::nullopt;
}

double SensorTimingModel::activation(ActivationVariant variant) const {
  const auto it = activation_s.find(variant);
  if (it == activation_s.end()) {
    throw UnknownVariant("no activation time for variant " + std::string(to_string(variant)));
  }
  return power_mode == PowerMode::assisted ? it->second * assisted_activation_factor
                                           : it->second;
}

void SensorTimingModel::validate() const {
  if (!(query_processing_s >= 0.0)) {
    throw ValidationError("sensing.query_processing_s", "must be >= 0");
  }
  if (!(propagation_s >= 0.0)) throw ValidationError("sensing.propagation_s", "must be >= 0");
  if (!(assisted_activation_factor >= 0.0 && assisted_activation_factor <= 1.0)) {
    throw ValidationError("sensing.assisted_activation_factor", "must lie in [0, 1]");
  }
  std::optional<double> previous;
  for (auto v : {ActivationVariant::tag_ic, ActivationVariant::tag_ic_plus_sensor,
                 ActivationVariant::tag_ic_sensor_mcu}) {
    const auto it = activation_s.find(v);
    if (it == activation_s.end()) continue;
    const std::string key = "sensing.activation_s." + std::string(to_string(v));
    if (!(it->second >= 0.0)) throw ValidationError(key, "must be >= 0");
    if (previous && it->second < *previous) {
      throw ValidationError(key, "must not be shorter than the simpler variant's activation");
    }
    previous = it->second;
  }
}

double t_total(const SensorTimingModel& model, ActivationVariant variant) {
  return model.query_processing_s + model.activation(variant) + model.propagation_s;
}

double SensorFixture::mean_forward_power_dbm(double distance_m) const {
  const PathGeometry path{distance_m, 1.0, 1.0};
  return forward_power(path, reader_antenna_gain_dbi, radio, multipath);
}

SensorFixture calibrated_sensor_fixture(double far_distance_m, double margin_db, double sigma_db,
                                        double coherence_s) {
  SensorFixture f;
  f.multipath.mode = MultipathMode::free_space;
  f.multipath.excess_noise_sigma_db = sigma_db;
  f.multipath.coherence_s = coherence_s;
  f.radio.tx_power_dbm = 0.0;
  const double at_zero_tx = f.mean_forward_power_dbm(far_distance_m);
  f.radio.tx_power_dbm = f.radio.tag_chip_sensitivity_dbm + margin_db - at_zero_tx;
  return f;
}

SensorReadResult simulate_sensor_read(double distance_m, const Gen2Params& gen2,
                                      const SensorTimingModel& model, ActivationVariant variant,
                                      const SensorFixture& fixture, std::uint64_t seed,
                                      const BerModel& ber) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be > 0");
  const ShadowingField shadowing(derive_seed(seed, StreamComponent::shadowing),
                                 fixture.multipath.excess_noise_sigma_db,
                                 fixture.multipath.coherence_s);
  const PathGeometry path{distance_m, 1.0, 1.0};
  const bool assisted = model.power_mode == PowerMode::assisted;
  const LinkFn link = [&](double t) {
    const double shadow = shadowing.draw_db(0, t);
    const double fwd =
        forward_power(path, fixture.reader_antenna_gain_dbi, fixture.radio, fixture.multipath,
                      shadow);
    const double back = backscatter_power(path, fixture.reader_antenna_gain_dbi, fixture.radio,
                                          fixture.multipath, shadow);
    LinkSample s = classify_link(t, true, fwd, back, fixture.radio, fixture.multipath);
    if (assisted) {
      s.tag_powered = true;
      s.reader_detects = back >= fixture.radio.reader_sensitivity_dbm;
    }
    return s;
  };
  MemoryReadOptions options;
  options.pre_access_processing_s = model.query_processing_s;
  options.tag_access_delay_s = model.activation(variant) + model.propagation_s;
  options.max_attempts = fixture.max_attempts;
  options.max_duration_s = fixture.max_duration_s;
  options.ber = ber;
  TagStreams streams = TagStreams::make(seed, 0);
  const MemoryReadResult r =
      read_user_memory(TagSessionState{}, fixture.word_count, gen2, link, streams, 0.0, options);
  return SensorReadResult{r.duration_s, r.attempts, r.success};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SensorSweepRow> sensor_sweep(const std::vector<double>& distances_m,
                                         const Gen2Params& gen2, const SensorTimingModel& model,
                                         const SensorFixture& fixture,
                                         const SensorSweepOptions& options) {
  return parallel_map<SensorSweepRow>(distances_m.size(), options.jobs, [&](std::size_t i) {
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(options.trials));
    double attempts = 0.0;
    int ok = 0;
    for (int trial = 0; trial < options.trials; ++trial) {
      const std::uint64_t seed =
          derive_seed(options.seed, StreamComponent::trial, static_cast<std::uint64_t>(trial));
      const SensorReadResult r =
          simulate_sensor_read(distances_m[i], gen2, model, options.variant, fixture, seed);
      times.push_back(r.t_total_s);
      attempts += r.attempts;
      ok += r.succeeded ? 1 : 0;
    }
    SensorSweepRow row;
    row.distance_m = distances_m[i];
    row.median_s = quantile(times, 0.5);
    row.p10_s = quantile(times, 0.1);
    row.p90_s = quantile(times, 0.9);
    row.attempts_mean = options.trials > 0 ? attempts / options.trials : 0.0;
    row.success_fraction = options.trials > 0 ? static_cast<double>(ok) / options.trials : 0.0;
    return row;
  });
}

}  // namespace reisim
