#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "reisim/engine.hpp"

namespace reisim {

/// Longest aggregation window that still reports before a vehicle leaving
/// the lane centre at angle alpha_max can cross half a lane:
/// W / (2 v cos(alpha_max)). Throws DomainError for v <= 0 or alpha_max
/// outside [0, pi/2).
double tau_max(double lane_width_m, double speed_mps, double alpha_max_rad);

enum class CurveSource { synthetic_from_sim, table };

/// Per-interrogation detection probability of a marker line as a function of
/// its lateral distance from the antenna. Piecewise linear through the
/// points, held constant beyond the first and last point.
class ReadRateCurve {
 public:
  ReadRateCurve() = default;
  /// Points must have strictly increasing offsets and probabilities in [0, 1].
  ReadRateCurve(std::vector<double> offsets_m, std::vector<double> probabilities,
                CurveSource source = CurveSource::table);

  /// Flat plateau at `p_max` up to |d| = plateau, then linear to zero at |d| = zero_at.
  static ReadRateCurve plateau_linear(double p_max, double plateau_m, double zero_at_m);

  double operator()(double offset_m) const;
  const std::vector<double>& offsets() const { return d_; }
  const std::vector<double>& probabilities() const { return p_; }
  CurveSource source() const { return source_; }

  void write_csv(std::ostream& out) const;
  static ReadRateCurve read_csv(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static ReadRateCurve load(const std::filesystem::path& path);

 private:
  std::vector<double> d_;
  std::vector<double> p_;
  CurveSource source_ = CurveSource::table;
};

/// Reads of one side antenna aggregated over a window: n interrogations
/// (inventory rounds started in the window), z of which read at least one
/// marker.
struct CountWindow {
  double t_start_s = 0.0;
  double tau_s = 0.0;
  std::uint64_t n = 0;
  std::uint64_t z = 0;
};

/// Partitions [0, t_end) into consecutive tau windows. When `tag_mask` is
/// given only reads of tags with tag_mask[id] set count toward z.
std::vector<CountWindow> window_counts(const std::vector<ReadEvent>& trace,
                                       const std::vector<RoundRecord>& interrogations,
                                       double tau_s, double t_end,
                                       const std::vector<bool>* tag_mask = nullptr);

struct LaneEstimatorOptions {
  /// Lateral distance from each side antenna to its marker line when the
  /// vehicle is centred.
  double nominal_offset_m = 0.9;
  /// Feasible positions are [-pos_bound, pos_bound].
  double pos_bound_m = 1.8;
  bool closed_form = true;
  double tolerance_m = 1e-3;
  int max_iterations = 100;
};

struct LaneWindowEstimate {
  /// Signed lateral offset from the lane centre, positive toward the left marker.
  double pos = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// log Binomial(z_left; n_left, p(d0 - pos)) + log Binomial(z_right; n_right, p(d0 + pos)).
double lane_log_likelihood(double pos, std::uint64_t z_left, std::uint64_t n_left,
                           std::uint64_t z_right, std::uint64_t n_right,
                           const ReadRateCurve& curve, double nominal_offset_m);

/// Maximum-likelihood lateral position, ties broken toward `pos_prev`. When
/// neither side reads anything and the curve is ~0 over the whole feasible
/// range, returns pos_prev with converged = false.
LaneWindowEstimate estimate_position(std::uint64_t z_left, std::uint64_t n_left,
                                     std::uint64_t z_right, std::uint64_t n_right,
                                     const ReadRateCurve& curve, double pos_prev,
                                     const LaneEstimatorOptions& options = {});

inline LaneWindowEstimate estimate_position(std::uint64_t z_left, std::uint64_t z_right,
                                            std::uint64_t n, const ReadRateCurve& curve,
                                            double pos_prev,
                                            const LaneEstimatorOptions& options = {}) {
  return estimate_position(z_left, n, z_right, n, curve, pos_prev, options);
}

/// Pearson correlation at zero lag. Throws DegenerateSeries for unequal
/// lengths, fewer than two samples or zero variance.
double cross_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct LagCorrelation {
  int lag = 0;
  double correlation = 0.0;
};

/// Correlation of a[i + lag] with b[i] over the overlap, for |lag| <= max_lag.
std::vector<LagCorrelation> cross_correlation_lags(const std::vector<double>& a,
                                                   const std::vector<double>& b, int max_lag);

// ---------------------------------------------------------------------------
// Two-antenna lane rig on top of the engine.

/// The left antenna is cfg.mount; the right one mirrors it across the
/// vehicle axis.
AntennaMount mirrored(const AntennaMount& mount);

struct LaneRun {
  RunResult left;
  RunResult right;
  std::vector<bool> left_tags;
  std::vector<bool> right_tags;
};

/// Runs both side antennas over the same drive with independent sub-seeds.
LaneRun simulate_lane(const SimConfig& cfg);

struct LaneTrackPoint {
  double t_mid_s = 0.0;
  double truth_m = 0.0;
  LaneWindowEstimate estimate;
  CountWindow left;
  CountWindow right;
};

/// Windows both antennas' counts and estimates every window in order, each
/// initialised at the previous estimate.
std::vector<LaneTrackPoint> track_lane(const SimConfig& cfg, const LaneRun& run, double tau_s,
                                       const ReadRateCurve& curve,
                                       const LaneEstimatorOptions& options);

struct CurveCalibration {
  std::vector<double> offsets_m;
  double duration_s = 2.0;
  int seeds = 4;
  int jobs = 1;
};

/// Holds the vehicle at each lateral offset in turn, measures the fraction of
/// left-antenna interrogations that read a left marker, and returns the
/// resulting curve over antenna-to-marker distance (made non-increasing
/// away from its peak).
ReadRateCurve calibrate_read_rate_curve(const SimConfig& cfg, const CurveCalibration& cal);

/// Antenna-to-marker distance for a centred vehicle.
double nominal_marker_offset(const SimConfig& cfg);

}  // namespace reisim
