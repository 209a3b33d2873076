#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "reisim/gen2.hpp"
#include "reisim/rflink.hpp"

namespace reisim {

enum class ActivationVariant { tag_ic, tag_ic_plus_sensor, tag_ic_sensor_mcu };
enum class PowerMode { passive, assisted };

std::string_view to_string(ActivationVariant v);
std::optional<ActivationVariant> activation_variant_from_string(std::string_view s);
std::string_view to_string(PowerMode m);
std::optional<PowerMode> power_mode_from_string(std::string_view s);

/// Sensor readout time = query processing + activation + propagation.
/// The activation values are placeholders, not measured magnitudes.
struct SensorTimingModel {
  double query_processing_s = 2e-3;
  std::map<ActivationVariant, double> activation_s{
      {ActivationVariant::tag_ic, 1e-3},
      {ActivationVariant::tag_ic_plus_sensor, 5e-3},
      {ActivationVariant::tag_ic_sensor_mcu, 20e-3},
  };
  double propagation_s = 1e-3;
  PowerMode power_mode = PowerMode::passive;
  /// Activation multiplier applied in assisted mode, in [0, 1].
  double assisted_activation_factor = 0.2;

  /// Activation time of `variant` after the power-mode adjustment. Throws
  /// UnknownVariant when the variant has no entry.
  double activation(ActivationVariant variant) const;
  /// Throws ValidationError on negative components or when a richer variant
  /// activates faster than a simpler one.
  void validate() const;
};

double t_total(const SensorTimingModel& model, ActivationVariant variant);

/// Reader and a sensor tag facing each other on boresight at a given distance.
struct SensorFixture {
  RadioConfig radio;
  MultipathModel multipath;
  double reader_antenna_gain_dbi = 6.0;
  int word_count = 4;
  int max_attempts = 50;
  double max_duration_s = 60.0;

  /// Mean forward power at the tag, excluding shadowing.
  double mean_forward_power_dbm(double distance_m) const;
};

/// Sets the transmit power so that the mean forward power at `far_distance_m`
/// sits `margin_db` relative to the tag's sensitivity (negative = below),
/// with log-normal spread `sigma_db` per coherence interval.
SensorFixture calibrated_sensor_fixture(double far_distance_m = 0.65, double margin_db = -1.0,
                                        double sigma_db = 0.5, double coherence_s = 0.05);

struct SensorReadResult {
  double t_total_s = 0.0;
  int attempts = 0;
  bool succeeded = false;
};

/// Singulation, ReqRN and Read of the sensor word block, with query
/// processing charged before the access and activation + propagation while
/// the tag must stay powered. Power dips restart from Query. In assisted
/// mode the tag never browns out.
SensorReadResult simulate_sensor_read(double distance_m, const Gen2Params& gen2,
                                      const SensorTimingModel& model, ActivationVariant variant,
                                      const SensorFixture& fixture, std::uint64_t seed,
                                      const BerModel& ber = {});

struct SensorSweepRow {
  double distance_m = 0.0;
  double median_s = 0.0;
  double p10_s = 0.0;
  double p90_s = 0.0;
  double attempts_mean = 0.0;
  double success_fraction = 0.0;
};

struct SensorSweepOptions {
  int trials = 500;
  std::uint64_t seed = 1;
  int jobs = 1;
  ActivationVariant variant = ActivationVariant::tag_ic_plus_sensor;
};

/// Trial i uses the same sub-seed at every distance.
std::vector<SensorSweepRow> sensor_sweep(const std::vector<double>& distances_m,
                                         const Gen2Params& gen2, const SensorTimingModel& model,
                                         const SensorFixture& fixture,
                                         const SensorSweepOptions& options = {});

/// Linear-interpolated quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace reisim
