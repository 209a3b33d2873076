#pragma once

#include <cstdint>

#include "reisim/encoding.hpp"
#include "reisim/geometry.hpp"

namespace reisim {

struct RadioConfig {
  double tx_power_dbm = 30.0;
  double reader_sensitivity_dbm = -90.0;
  double tag_chip_sensitivity_dbm = -18.0;
  double frequency_hz = 902e6;
  double tag_gain_dbi = 2.0;
  /// Modulation and conversion loss of the tag's backscatter.
  double backscatter_loss_db = 5.0;

  double wavelength_m() const { return kSpeedOfLight / frequency_hz; }
  void validate() const;
};

enum class MultipathMode { free_space, two_ray };

struct MultipathModel {
  MultipathMode mode = MultipathMode::free_space;
  /// Ground reflection coefficient, real, in [-1, 0].
  double ground_reflection_coefficient = -0.7;
  /// Environmental noise plus interference at the reader receiver.
  double noise_floor_dbm = -80.0;
  /// Log-normal shadowing spread of the one-way channel.
  double excess_noise_sigma_db = 0.0;
  /// Shadowing is redrawn once per tag per coherence interval.
  double coherence_s = 0.05;

  void validate() const;
};

/// Ends of the direct ray. Heights only matter for the two-ray model.
struct PathGeometry {
  double range_m = 1.0;
  double antenna_height_m = 1.0;
  double tag_height_m = 1.0;
};

double free_space_path_loss_db(double range_m, double wavelength_m);

/// Two-ray field relative to the direct ray alone:
/// 20 log10 |1 + gamma (d1/d2) exp(-j k (d2 - d1))|.
double two_ray_gain_db(const PathGeometry& path, double wavelength_m, double gamma);

/// One-way channel gain (negative dB) antenna-to-antenna, excluding antenna gains.
double one_way_channel_db(const PathGeometry& path, const RadioConfig& cfg,
                          const MultipathModel& mp);

/// Power available at the tag chip. `geometry_gain_db` is the reader antenna
/// gain toward the tag; `shadow_db` the one-way shadowing draw.
double forward_power(const PathGeometry& path, double geometry_gain_db, const RadioConfig& cfg,
                     const MultipathModel& mp, double shadow_db = 0.0);

/// Backscattered power at the reader: the one-way law applied twice minus
/// the tag's modulation loss.
double backscatter_power(const PathGeometry& path, double geometry_gain_db,
                         const RadioConfig& cfg, const MultipathModel& mp,
                         double shadow_db = 0.0);

/// Miller-M is credited `gain_exponent * 10 log10(M)` dB of processing gain
/// over FM0 before the Gaussian-channel Q-function.
struct BerModel {
  double miller_gain_exponent = 1.0;
};

double q_function(double x);

double effective_snr_db(double snr_db, Encoding encoding, const BerModel& model = {});

/// Q(sqrt(2 * snr_eff)); monotone decreasing in SNR, FM0 >= M2 >= M4 >= M8.
double snr_to_bit_error_rate(double snr_db, Encoding encoding, const BerModel& model = {});

/// Probability that every one of `bits` bits is received correctly.
double reply_success_probability(double snr_db, int bits, Encoding encoding,
                                 const BerModel& model = {});

struct LinkSample {
  double t = 0.0;
  double forward_power_at_tag_dbm = kNegInf;
  double backscatter_power_at_reader_dbm = kNegInf;
  bool in_beam = false;
  bool tag_powered = false;
  bool reader_detects = false;
  double snr_db = kNegInf;
};

/// Counter-based log-normal shadowing: a pure function of
/// (seed, tag, coherence interval), so no draw depends on evaluation order.
class ShadowingField {
 public:
  ShadowingField() = default;
  ShadowingField(std::uint64_t seed, double sigma_db, double coherence_s);

  double draw_db(std::uint64_t tag_id, double t) const;
  double sigma_db() const { return sigma_db_; }

 private:
  std::uint64_t seed_ = 0;
  double sigma_db_ = 0.0;
  double coherence_s_ = 0.05;
};

/// Builds a LinkSample from received powers, applying the threshold rules.
LinkSample classify_link(double t, bool in_beam, double forward_dbm, double backscatter_dbm,
                         const RadioConfig& cfg, const MultipathModel& mp);

LinkSample sample_link(double t, const RoadScenario& scenario, const AntennaMount& mount,
                       const TagPlacement& tag, std::uint64_t tag_id, const RadioConfig& cfg,
                       const MultipathModel& mp, const ShadowingField& shadowing);

/// Upper bound on the range at which a tag can still be powered, counting
/// constructive two-ray gain and the largest shadowing draw the field can produce.
double max_power_range_m(const AntennaMount& mount, const RadioConfig& cfg,
                         const MultipathModel& mp);

}  // namespace reisim
