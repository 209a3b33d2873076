#include "reisim/rflink.hpp"

#include <cmath>
#include <complex>

#include "reisim/error.hpp"
#include "reisim/rng.hpp"

namespace reisim {

void RadioConfig::validate() const {
  if (!(frequency_hz >= 860e6 && frequency_hz <= 960e6)) {
    throw ValidationError("radio.frequency_hz", "must lie in the UHF RFID band [860e6, 960e6]");
  }
  if (!std::isfinite(tx_power_dbm)) throw ValidationError("radio.tx_power_dbm", "must be finite");
  if (!std::isfinite(reader_sensitivity_dbm)) {
    throw ValidationError("radio.reader_sensitivity_dbm", "must be finite");
  }
  if (!std::isfinite(tag_chip_sensitivity_dbm)) {
    throw ValidationError("radio.tag_chip_sensitivity_dbm", "must be finite");
  }
  if (!(backscatter_loss_db >= 0.0)) {
    throw ValidationError("radio.backscatter_loss_db", "must be >= 0");
  }
}

void MultipathModel::validate() const {
  if (!(ground_reflection_coefficient >= -1.0 && ground_reflection_coefficient <= 0.0)) {
    throw ValidationError("multipath.ground_reflection_coefficient", "must lie in [-1, 0]");
  }
  if (!(excess_noise_sigma_db >= 0.0)) {
    throw ValidationError("multipath.excess_noise_sigma_db", "must be >= 0");
  }
  if (!(coherence_s > 0.0)) throw ValidationError("multipath.coherence_s", "must be > 0");
  if (!std::isfinite(noise_floor_dbm)) {
    throw ValidationError("multipath.noise_floor_dbm", "must be finite");
  }
}

double free_space_path_loss_db(double range_m, double wavelength_m) {
  return 20.0 * std::log10(4.0 * kPi * range_m / wavelength_m);
}

double two_ray_gain_db(const PathGeometry& path, double wavelength_m, double gamma) {
  const double dz = path.antenna_height_m - path.tag_height_m;
  const double horizontal2 = std::max(0.0, path.range_m * path.range_m - dz * dz);
  const double hsum = path.antenna_height_m + path.tag_height_m;
  const double d1 = path.range_m;
  const double d2 = std::sqrt(horizontal2 + hsum * hsum);
  const double k = 2.0 * kPi / wavelength_m;
  const std::complex<double> field =
      1.0 + gamma * (d1 / d2) * std::polar(1.0, -k * (d2 - d1));
  return 20.0 * std::log10(std::abs(field));
}

double one_way_channel_db(const PathGeometry& path, const RadioConfig& cfg,
                          const MultipathModel& mp) {
  const double lambda = cfg.wavelength_m();
  double gain = -free_space_path_loss_db(path.range_m, lambda);
  if (mp.mode == MultipathMode::two_ray) {
    gain += two_ray_gain_db(path, lambda, mp.ground_reflection_coefficient);
  }
  return gain;
}

double forward_power(const PathGeometry& path, double geometry_gain_db, const RadioConfig& cfg,
                     const MultipathModel& mp, double shadow_db) {
  return cfg.tx_power_dbm + geometry_gain_db + cfg.tag_gain_dbi +
         one_way_channel_db(path, cfg, mp) + shadow_db;
}

double backscatter_power(const PathGeometry& path, double geometry_gain_db,
                         const RadioConfig& cfg, const MultipathModel& mp, double shadow_db) {
  return forward_power(path, geometry_gain_db, cfg, mp, shadow_db) + cfg.tag_gain_dbi +
         geometry_gain_db + one_way_channel_db(path, cfg, mp) + shadow_db -
         cfg.backscatter_loss_db;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double effective_snr_db(double snr_db, Encoding encoding, const BerModel& model) {
  return snr_db + model.miller_gain_exponent * 10.0 * std::log10(subcarrier_cycles(encoding));
}

double snr_to_bit_error_rate(double snr_db, Encoding encoding, const BerModel& model) {
  if (snr_db == kNegInf) return 0.5;
  const double gamma = db_to_linear(effective_snr_db(snr_db, encoding, model));
  return q_function(std::sqrt(2.0 * gamma));
}

double reply_success_probability(double snr_db, int bits, Encoding encoding,
                                 const BerModel& model) {
  const double ber = snr_to_bit_error_rate(snr_db, encoding, model);
  return std::exp(static_cast<double>(bits) * std::log1p(-ber));
}

ShadowingField::ShadowingField(std::uint64_t seed, double sigma_db, double coherence_s)
    : seed_(seed), sigma_db_(sigma_db), coherence_s_(coherence_s) {}

double ShadowingField::draw_db(std::uint64_t tag_id, double t) const {
  if (sigma_db_ == 0.0) return 0.0;
  const auto interval = static_cast<std::int64_t>(std::floor(t / coherence_s_));
  const std::uint64_t key = derive_seed(seed_, StreamComponent::shadowing, tag_id);
  const std::uint64_t a = splitmix64(key ^ static_cast<std::uint64_t>(interval));
  const std::uint64_t b = splitmix64(a);
  // Box-Muller on two 53-bit uniforms; u1 is kept away from zero.
  const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return sigma_db_ * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

LinkSample classify_link(double t, bool in_beam, double forward_dbm, double backscatter_dbm,
                         const RadioConfig& cfg, const MultipathModel& mp) {
  LinkSample s;
  s.t = t;
  s.in_beam = in_beam;
  if (!in_beam) return s;
  s.forward_power_at_tag_dbm = forward_dbm;
  s.backscatter_power_at_reader_dbm = backscatter_dbm;
  s.tag_powered = forward_dbm >= cfg.tag_chip_sensitivity_dbm;
  s.reader_detects = s.tag_powered && backscatter_dbm >= cfg.reader_sensitivity_dbm;
  s.snr_db = backscatter_dbm - mp.noise_floor_dbm;
  return s;
}

LinkSample sample_link(double t, const RoadScenario& scenario, const AntennaMount& mount,
                       const TagPlacement& tag, std::uint64_t tag_id, const RadioConfig& cfg,
                       const MultipathModel& mp, const ShadowingField& shadowing) {
  const auto geom = antenna_tag_geometry(scenario.pose_at(t), mount, tag);
  if (!geom.in_beam) return classify_link(t, false, kNegInf, kNegInf, cfg, mp);
  const double gain = mount.gain_dbi(geom.off_boresight_rad);
  const PathGeometry path{std::max(geom.range_m, 1e-3), geom.antenna_position.z,
                          tag.position.z};
  const double shadow = shadowing.draw_db(tag_id, t);
  return classify_link(t, true, forward_power(path, gain, cfg, mp, shadow),
                       backscatter_power(path, gain, cfg, mp, shadow), cfg, mp);
}

double max_power_range_m(const AntennaMount& mount, const RadioConfig& cfg,
                         const MultipathModel& mp) {
  double budget = cfg.tx_power_dbm + mount.boresight_gain_dbi + cfg.tag_gain_dbi -
                  cfg.tag_chip_sensitivity_dbm + 9.0 * mp.excess_noise_sigma_db;
  if (mp.mode == MultipathMode::two_ray) {
    budget += 20.0 * std::log10(1.0 - mp.ground_reflection_coefficient);
  }
  return cfg.wavelength_m() / (4.0 * kPi) * std::pow(10.0, budget / 20.0);
}

}  // namespace reisim
