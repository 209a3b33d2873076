#include <doctest.h>

#include "reisim/config.hpp"
#include "reisim/error.hpp"
#include "reisim/sensing.hpp"

using namespace reisim;

TEST_SUITE("sensing") {

TEST_CASE("timing model composition") {
  SensorTimingModel m;
  for (auto v : {ActivationVariant::tag_ic, ActivationVariant::tag_ic_plus_sensor,
                 ActivationVariant::tag_ic_sensor_mcu}) {
    CHECK(t_total(m, v) == doctest::Approx(m.query_processing_s + m.activation_s.at(v) +
                                           m.propagation_s));
  }
  CHECK(t_total(m, ActivationVariant::tag_ic) < t_total(m, ActivationVariant::tag_ic_plus_sensor));
  CHECK(t_total(m, ActivationVariant::tag_ic_plus_sensor) <
        t_total(m, ActivationVariant::tag_ic_sensor_mcu));

  SensorTimingModel assisted = m;
  assisted.power_mode = PowerMode::assisted;
  CHECK(assisted.activation(ActivationVariant::tag_ic_sensor_mcu) ==
        doctest::Approx(m.activation_s.at(ActivationVariant::tag_ic_sensor_mcu) *
                        m.assisted_activation_factor));
}

TEST_CASE("timing model validation") {
  SensorTimingModel m;
  CHECK_NOTHROW(m.validate());
  m.activation_s[ActivationVariant::tag_ic_sensor_mcu] = 1e-4;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  SensorTimingModel neg;
  neg.propagation_s = -1.0;
  CHECK_THROWS_AS(neg.validate(), ValidationError);
  SensorTimingModel missing;
  missing.activation_s.erase(ActivationVariant::tag_ic);
  CHECK_THROWS_AS(missing.activation(ActivationVariant::tag_ic), UnknownVariant);
}

TEST_CASE("timing model JSON round trip") {
  SensorTimingModel m;
  m.power_mode = PowerMode::assisted;
  m.query_processing_s = 3e-3;
  const SensorTimingModel back = sensor_model_from_json(to_json(m));
  CHECK(to_json(back) == to_json(m));
}

TEST_CASE("calibrated fixture sits at the requested margin") {
  const SensorFixture f = calibrated_sensor_fixture(0.65, -1.0);
  CHECK(f.mean_forward_power_dbm(0.65) ==
        doctest::Approx(f.radio.tag_chip_sensitivity_dbm - 1.0));
}

TEST_CASE("assisted read on a strong link equals the closed-form exchange") {
  Gen2Params p;
  SensorTimingModel m;
  m.power_mode = PowerMode::assisted;
  SensorFixture f = calibrated_sensor_fixture();
  f.multipath.excess_noise_sigma_db = 0.0;
  const auto v = ActivationVariant::tag_ic_sensor_mcu;
  MemoryReadOptions o;
  o.pre_access_processing_s = m.query_processing_s;
  o.tag_access_delay_s = m.activation(v) + m.propagation_s;
  double lo = 1e9, hi = 0;
  for (std::uint16_t rn : {std::uint16_t{0}, std::uint16_t{0xFFFF}}) {
    for (std::uint16_t h : {std::uint16_t{0}, std::uint16_t{0xFFFF}}) {
      const double d = user_memory_read_duration(p, rn, h, f.word_count, o);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = simulate_sensor_read(0.3, p, m, v, f, seed);
    CHECK(r.succeeded);
    CHECK(r.attempts == 1);
    CHECK(r.t_total_s >= lo - 1e-12);
    CHECK(r.t_total_s <= hi + 1e-12);
  }
}

TEST_CASE("readout time grows toward the power threshold") {
  Gen2Params p;
  SensorTimingModel m;
  const SensorFixture f = calibrated_sensor_fixture();
  SensorSweepOptions o;
  o.trials = 60;
  const auto rows = sensor_sweep({0.4, 0.5, 0.6, 0.65}, p, m, f, o);
  REQUIRE(rows.size() == 4);
  CHECK(rows.front().median_s < 1.0);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].median_s >= rows[i - 1].median_s);
  for (const auto& r : rows) {
    CHECK(r.p10_s <= r.median_s);
    CHECK(r.median_s <= r.p90_s);
  }
}

TEST_CASE("quantile interpolates") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == doctest::Approx(2.0));
  CHECK(quantile({1.0, 2.0}, 0.25) == doctest::Approx(1.25));
  CHECK(quantile({4.0}, 0.9) == doctest::Approx(4.0));
}

TEST_CASE("variant and power mode names") {
  for (auto v : {ActivationVariant::tag_ic, ActivationVariant::tag_ic_plus_sensor,
                 ActivationVariant::tag_ic_sensor_mcu}) {
    CHECK(activation_variant_from_string(to_string(v)) == v);
  }
  CHECK(power_mode_from_string(to_string(PowerMode::assisted)) == PowerMode::assisted);
  CHECK_FALSE(activation_variant_from_string("nope").has_value());
}

}
