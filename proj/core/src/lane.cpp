#include "reisim/lane.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "reisim/error.hpp"
#include "reisim/rng.hpp"

namespace reisim {

double tau_max(double lane_width_m, double speed_mps, double alpha_max_rad) {
  if (!(speed_mps > 0.0)) throw DomainError("speed must be > 0");
  if (!(alpha_max_rad >= 0.0 && alpha_max_rad < kPi / 2.0)) {
    throw DomainError("alpha_max must lie in [0, pi/2)");
  }
  return lane_width_m / (2.0 * speed_mps * std::cos(alpha_max_rad));
}

// ---------------------------------------------------------------------------

ReadRateCurve::ReadRateCurve(std::vector<double> offsets_m, std::vector<double> probabilities,
                             CurveSource source)
    : d_(std::move(offsets_m)), p_(std::move(probabilities)), source_(source) {
  if (d_.empty() || d_.size() != p_.size()) {
    throw std::invalid_argument("read-rate curve needs matching, non-empty point lists");
  }
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (!(p_[i] >= 0.0 && p_[i] <= 1.0)) {
      throw std::invalid_argument("read-rate curve probabilities must lie in [0, 1]");
    }
    if (i > 0 && !(d_[i] > d_[i - 1])) {
      throw std::invalid_argument("read-rate curve offsets must be strictly increasing");
    }
  }
}

ReadRateCurve ReadRateCurve::plateau_linear(double p_max, double plateau_m, double zero_at_m) {
  if (!(zero_at_m > plateau_m && plateau_m >= 0.0)) {
    throw std::invalid_argument("plateau_linear needs 0 <= plateau < zero_at");
  }
  if (plateau_m == 0.0) {
    return ReadRateCurve({-zero_at_m, 0.0, zero_at_m}, {0.0, p_max, 0.0});
  }
  return ReadRateCurve({-zero_at_m, -plateau_m, plateau_m, zero_at_m}, {0.0, p_max, p_max, 0.0});
}

double ReadRateCurve::operator()(double d) const {
  if (d_.empty()) return 0.0;
  if (d <= d_.front()) return p_.front();
  if (d >= d_.back()) return p_.back();
  const auto it = std::upper_bound(d_.begin(), d_.end(), d);
  const auto i = static_cast<std::size_t>(it - d_.begin());
  const double w = (d - d_[i - 1]) / (d_[i] - d_[i - 1]);
  return p_[i - 1] + w * (p_[i] - p_[i - 1]);
}

void ReadRateCurve::write_csv(std::ostream& out) const {
  out << "offset_m,probability\n";
  char buf[64];
  for (std::size_t i = 0; i < d_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", d_[i], p_[i]);
    out << buf;
  }
}

ReadRateCurve ReadRateCurve::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("curve", "empty read-rate curve file");
  if (line.rfind("offset_m,probability", 0) != 0) {
    throw ParseError("curve", "expected header 'offset_m,probability'");
  }
  std::vector<double> d;
  std::vector<double> p;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("curve[" + std::to_string(row) + "]", "expected two columns");
    }
    try {
      d.push_back(std::stod(line.substr(0, comma)));
      p.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError("curve[" + std::to_string(row) + "]", "not a number");
    }
  }
  try {
    return ReadRateCurve(std::move(d), std::move(p), CurveSource::table);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("curve", e.what());
  }
}

void ReadRateCurve::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out);
  if (!out) throw IoError("failed writing " + path.string());
}

ReadRateCurve ReadRateCurve::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in);
}

// ---------------------------------------------------------------------------

std::vector<CountWindow> window_counts(const std::vector<ReadEvent>& trace,
                                       const std::vector<RoundRecord>& interrogations,
                                       double tau_s, double t_end,
                                       const std::vector<bool>* tag_mask) {
  if (!(tau_s > 0.0)) throw std::invalid_argument("window length must be > 0");
  const auto count = static_cast<std::size_t>(std::floor(t_end / tau_s + 1e-9));
  std::vector<CountWindow> windows(count);
  for (std::size_t k = 0; k < count; ++k) {
    windows[k].t_start_s = static_cast<double>(k) * tau_s;
    windows[k].tau_s = tau_s;
  }
  if (count == 0) return windows;
  const auto window_of = [&](double t) -> std::optional<std::size_t> {
    if (t < 0.0) return std::nullopt;
    const auto k = static_cast<std::size_t>(std::floor(t / tau_s));
    if (k >= count) return std::nullopt;
    return k;
  };
  std::vector<std::optional<std::size_t>> round_window(interrogations.size());
  for (std::size_t i = 0; i < interrogations.size(); ++i) {
    round_window[i] = window_of(interrogations[i].t_start);
    if (round_window[i]) ++windows[*round_window[i]].n;
  }
  std::vector<bool> hit(interrogations.size(), false);
  for (const ReadEvent& ev : trace) {
    if (tag_mask && (ev.tag_id >= tag_mask->size() || !(*tag_mask)[ev.tag_id])) continue;
    if (ev.round_index >= interrogations.size()) continue;
    const auto r = static_cast<std::size_t>(ev.round_index);
    if (hit[r] || !round_window[r]) continue;
    hit[r] = true;
    ++windows[*round_window[r]].z;
  }
  return windows;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kProbFloor = 1e-12;

double log_binomial(std::uint64_t z, std::uint64_t n, double p) {
  p = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  const auto zd = static_cast<double>(z);
  const auto nd = static_cast<double>(n);
  return std::lgamma(nd + 1.0) - std::lgamma(zd + 1.0) - std::lgamma(nd - zd + 1.0) +
         zd * std::log(p) + (nd - zd) * std::log1p(-p);
}

using Poly = std::array<double, 4>;  // c0 + c1 u + c2 u^2 + c3 u^3

double eval(const Poly& c, double u) { return ((c[3] * u + c[2]) * u + c[1]) * u + c[0]; }

/// Real roots of a polynomial of degree <= 3 inside [0, len], located by
/// splitting at the derivative's roots and bisecting each monotone piece.
std::vector<double> roots_in(const Poly& c, double len) {
  std::vector<double> splits{0.0};
  // Derivative 3 c3 u^2 + 2 c2 u + c1.
  const double a = 3.0 * c[3];
  const double b = 2.0 * c[2];
  const double cc = c[1];
  const double scale = std::max({std::abs(a) * len * len, std::abs(b) * len, std::abs(cc), 1e-300});
  if (std::abs(a) * len * len > 1e-14 * scale) {
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(sq, b));
      for (double r : {q / a, q != 0.0 ? cc / q : 0.5 * len}) {
        if (r > 0.0 && r < len) splits.push_back(r);
      }
    }
  } else if (std::abs(b) * len > 1e-14 * scale) {
    const double r = -cc / b;
    if (r > 0.0 && r < len) splits.push_back(r);
  }
  splits.push_back(len);
  std::sort(splits.begin(), splits.end());
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < splits.size(); ++i) {
    double lo = splits[i];
    double hi = splits[i + 1];
    double flo = eval(c, lo);
    const double fhi = eval(c, hi);
    if (flo == 0.0) {
      roots.push_back(lo);
      continue;
    }
    if ((flo < 0.0) == (fhi < 0.0)) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = eval(c, mid);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

Poly mul(const Poly& a, const Poly& b) {
  Poly r{0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; i + j < 4; ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

struct Candidate {
  double pos;
  double ll;
};

/// Best candidate, preferring the one nearest `pos_prev` among near-ties.
Candidate pick(const std::vector<Candidate>& cands, double pos_prev) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best = std::max(best, c.ll);
  const double tie = 1e-9 * std::max(1.0, std::abs(best));
  Candidate chosen{pos_prev, best};
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) {
    if (c.ll >= best - tie && std::abs(c.pos - pos_prev) < nearest) {
      nearest = std::abs(c.pos - pos_prev);
      chosen = c;
    }
  }
  return chosen;
}

}  // namespace

double lane_log_likelihood(double pos, std::uint64_t z_left, std::uint64_t n_left,
                           std::uint64_t z_right, std::uint64_t n_right,
                           const ReadRateCurve& curve, double d0) {
  return log_binomial(z_left, n_left, curve(d0 - pos)) +
         log_binomial(z_right, n_right, curve(d0 + pos));
}

LaneWindowEstimate estimate_position(std::uint64_t z_left, std::uint64_t n_left,
                                     std::uint64_t z_right, std::uint64_t n_right,
                                     const ReadRateCurve& curve, double pos_prev,
                                     const LaneEstimatorOptions& o) {
  if (z_left > n_left || z_right > n_right) {
    throw std::invalid_argument("read counts must not exceed interrogation counts");
  }
  const double d0 = o.nominal_offset_m;
  const double bound = o.pos_bound_m;
  const double start = std::clamp(pos_prev, -bound, bound);
  const auto ll = [&](double pos) {
    return lane_log_likelihood(pos, z_left, n_left, z_right, n_right, curve, d0);
  };

  // Breakpoints of both sides' piecewise-linear probabilities, in pos.
  std::vector<double> knots{-bound, bound};
  for (double d : curve.offsets()) {
    for (double x : {d0 - d, d - d0}) {
      if (x > -bound && x < bound) knots.push_back(x);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  if (z_left == 0 && z_right == 0) {
    double pmax = 0.0;
    for (double x : knots) pmax = std::max({pmax, curve(d0 - x), curve(d0 + x)});
    if (pmax < 1e-9) return LaneWindowEstimate{pos_prev, ll(start), false, 0};
  }

  LaneWindowEstimate est;
  if (o.closed_form) {
    std::vector<Candidate> cands{{start, ll(start)}};
    const auto zl = static_cast<double>(z_left);
    const auto nl = static_cast<double>(n_left);
    const auto zr = static_cast<double>(z_right);
    const auto nr = static_cast<double>(n_right);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      const double a = knots[i];
      const double len = knots[i + 1] - a;
      cands.push_back({a, ll(a)});
      if (len <= 0.0) continue;
      // On this piece p_l(u) = al + bl u and p_r(u) = ar + br u, u = pos - a.
      const double al = curve(d0 - a);
      const double bl = (curve(d0 - a - len) - al) / len;
      const double ar = curve(d0 + a);
      const double br = (curve(d0 + a + len) - ar) / len;
      // d(ll)/du * p_l (1 - p_l) p_r (1 - p_r) =
      //   bl (zl - nl p_l) p_r (1 - p_r) + br (zr - nr p_r) p_l (1 - p_l)
      const Poly pl{al, bl, 0, 0};
      const Poly pr{ar, br, 0, 0};
      const Poly ql{1.0 - al, -bl, 0, 0};
      const Poly qr{1.0 - ar, -br, 0, 0};
      const Poly left_term = mul(Poly{bl * (zl - nl * al), -bl * nl * bl, 0, 0}, mul(pr, qr));
      const Poly right_term = mul(Poly{br * (zr - nr * ar), -br * nr * br, 0, 0}, mul(pl, ql));
      Poly g{};
      for (int k = 0; k < 4; ++k) g[k] = left_term[k] + right_term[k];
      for (double u : roots_in(g, len)) cands.push_back({a + u, ll(a + u)});
    }
    cands.push_back({knots.back(), ll(knots.back())});
    const Candidate best = pick(cands, start);
    est.pos = best.pos;
    est.log_likelihood = best.ll;
    est.converged = true;
    est.iterations = 1;
    return est;
  }

  // Coarse scan from pos_prev, then golden-section refinement.
  constexpr int kScan = 256;
  const double step = 2.0 * bound / kScan;
  std::vector<Candidate> cands{{start, ll(start)}};
  for (int i = 0; i <= kScan; ++i) {
    const double x = -bound + step * i;
    cands.push_back({x, ll(x)});
  }
  Candidate best = pick(cands, start);
  double lo = std::max(-bound, best.pos - step);
  double hi = std::min(bound, best.pos + step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = ll(x1);
  double f2 = ll(x2);
  int it = 0;
  while (hi - lo >= o.tolerance_m && it < o.max_iterations) {
    ++it;
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = ll(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = ll(x2);
    }
  }
  const double mid = 0.5 * (lo + hi);
  std::vector<Candidate> finals{best, {mid, ll(mid)}, {x1, f1}, {x2, f2}};
  const Candidate chosen = pick(finals, start);
  est.pos = chosen.pos;
  est.log_likelihood = chosen.ll;
  est.converged = hi - lo < o.tolerance_m;
  est.iterations = it;
  return est;
}

// ---------------------------------------------------------------------------

double cross_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DegenerateSeries("series lengths differ");
  if (a.size() < 2) throw DegenerateSeries("need at least two samples");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) throw DegenerateSeries("series has zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<LagCorrelation> cross_correlation_lags(const std::vector<double>& a,
                                                   const std::vector<double>& b, int max_lag) {
  if (a.size() != b.size()) throw DegenerateSeries("series lengths differ");
  std::vector<LagCorrelation> out;
  const auto n = static_cast<long>(a.size());
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    std::vector<double> x;
    std::vector<double> y;
    for (long i = 0; i < n; ++i) {
      const long j = i + lag;
      if (j < 0 || j >= n) continue;
      x.push_back(a[static_cast<std::size_t>(j)]);
      y.push_back(b[static_cast<std::size_t>(i)]);
    }
    if (x.size() < 2) continue;
    try {
      out.push_back({lag, cross_correlation(x, y)});
    } catch (const DegenerateSeries&) {
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

AntennaMount mirrored(const AntennaMount& mount) {
  AntennaMount m = mount;
  m.lateral_offset_m = -mount.lateral_offset_m;
  m.side = mount.side == Side::left ? Side::right : Side::left;
  return m;
}

double nominal_marker_offset(const SimConfig& cfg) {
  return cfg.scenario.lane_width_m / 2.0 - std::abs(cfg.mount.lateral_offset_m);
}

namespace {

std::vector<bool> side_mask(const RoadScenario& sc, bool left) {
  std::vector<bool> mask(sc.tags.size());
  for (std::size_t i = 0; i < sc.tags.size(); ++i) {
    const Vec3& p = sc.tags[i].position;
    const Pose2D at = sc.pose_at_distance(sc.project(p));
    const double lateral = dot(p - Vec3{at.x, at.y, 0.0}, at.left());
    mask[i] = left ? lateral > 0.0 : lateral < 0.0;
  }
  return mask;
}

}  // namespace

LaneRun simulate_lane(const SimConfig& cfg) {
  SimConfig left = cfg;
  left.seed = derive_seed(cfg.seed, StreamComponent::trial, 0);
  SimConfig right = cfg;
  right.mount = mirrored(cfg.mount);
  right.seed = derive_seed(cfg.seed, StreamComponent::trial, 1);
  LaneRun out;
  out.left = run(left);
  out.right = run(right);
  out.left_tags = side_mask(cfg.scenario, true);
  out.right_tags = side_mask(cfg.scenario, false);
  return out;
}

std::vector<LaneTrackPoint> track_lane(const SimConfig& cfg, const LaneRun& lr, double tau_s,
                                       const ReadRateCurve& curve,
                                       const LaneEstimatorOptions& options) {
  const auto left = window_counts(lr.left.trace, lr.left.interrogations, tau_s, cfg.duration_s,
                                  &lr.left_tags);
  const auto right = window_counts(lr.right.trace, lr.right.interrogations, tau_s,
                                   cfg.duration_s, &lr.right_tags);
  std::vector<LaneTrackPoint> track;
  track.reserve(left.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < left.size() && k < right.size(); ++k) {
    LaneTrackPoint pt;
    pt.t_mid_s = left[k].t_start_s + 0.5 * tau_s;
    pt.truth_m = cfg.scenario.lateral_offset_at(pt.t_mid_s);
    pt.left = left[k];
    pt.right = right[k];
    pt.estimate = estimate_position(left[k].z, left[k].n, right[k].z, right[k].n, curve, prev,
                                    options);
    prev = pt.estimate.pos;
    track.push_back(pt);
  }
  return track;
}

ReadRateCurve calibrate_read_rate_curve(const SimConfig& cfg, const CurveCalibration& cal) {
  const double d0 = nominal_marker_offset(cfg);
  const std::vector<bool> mask = side_mask(cfg.scenario, true);
  const std::size_t total = cal.offsets_m.size() * static_cast<std::size_t>(cal.seeds);
  const auto counts = parallel_map<std::pair<std::uint64_t, std::uint64_t>>(
      total, cal.jobs, [&](std::size_t job) {
        const std::size_t i = job / static_cast<std::size_t>(cal.seeds);
        SimConfig c = cfg;
        c.scenario.lateral = LateralProfile{cal.offsets_m[i], 0.0, 0.0, 0.0};
        c.duration_s = cal.duration_s;
        c.lane.tau_s.reset();
        c.seed = derive_seed(cfg.seed, StreamComponent::trial, 1000 + job);
        const RunResult r = run(c);
        const auto w = window_counts(r.trace, r.interrogations, cal.duration_s, cal.duration_s,
                                     &mask);
        if (w.empty()) return std::pair<std::uint64_t, std::uint64_t>{0, 0};
        return std::pair{w.front().z, w.front().n};
      });
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < cal.offsets_m.size(); ++i) {
    std::uint64_t z = 0;
    std::uint64_t n = 0;
    for (int s = 0; s < cal.seeds; ++s) {
      const auto& [zz, nn] = counts[i * static_cast<std::size_t>(cal.seeds) + s];
      z += zz;
      n += nn;
    }
    pts.emplace_back(d0 - cal.offsets_m[i], n > 0 ? static_cast<double>(z) / n : 0.0);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }),
            pts.end());
  std::vector<double> d;
  std::vector<double> p;
  for (const auto& [x, y] : pts) {
    d.push_back(x);
    p.push_back(y);
  }
  if (!p.empty()) {
    const auto peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    for (std::size_t i = peak + 1; i < p.size(); ++i) p[i] = std::min(p[i], p[i - 1]);
    for (std::size_t i = peak; i-- > 0;) p[i] = std::min(p[i], p[i + 1]);
  }
  return ReadRateCurve(std::move(d), std::move(p), CurveSource::synthetic_from_sim);
}

}  // namespace reisim
