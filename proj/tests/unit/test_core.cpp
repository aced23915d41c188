#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "pml/core/binary_io.hpp"
#include "pml/core/checksum.hpp"
#include "pml/core/gray_image.hpp"
#include "pml/core/rng.hpp"
#include "pml/core/run_config.hpp"
#include "pml/core/steering.hpp"
#include "pml/core/vehicle_state.hpp"

using namespace pml;

TEST_CASE("gray image validates shape and range") {
  CHECK_NOTHROW(GrayImage(2, 2, {0.0, 0.5, 1.0, 0.25}));
  CHECK_THROWS_AS(GrayImage(2, 3, std::vector<double>(6, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(GrayImage(2, 2, {0.0, 0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(GrayImage(2, 2, {0.0, 0.5, 1.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(GrayImage(2, 2, {0.0, -0.1, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(GrayImage(2, 2, {0.0, std::nan(""), 1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("mirror image reverses columns and is an involution") {
  const GrayImage img(3, 3, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  const GrayImage m = mirror_image(img);
  CHECK(m.at(0, 0) == 0.3);
  CHECK(m.at(1, 2) == 0.4);
  CHECK(m.at(2, 1) == 0.8);
  CHECK(mirror_image(m) == img);
}

TEST_CASE("steering action range and clamping") {
  CHECK(SteeringAction(1.0).value() == 1.0);
  CHECK(SteeringAction(-1.0).value() == -1.0);
  CHECK_THROWS_AS(SteeringAction(1.0000001), std::invalid_argument);
  CHECK_THROWS_AS(SteeringAction(std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
  CHECK(clamp_action(1.7).value() == 1.0);
  CHECK(clamp_action(-3.0).value() == -1.0);
  CHECK(clamp_action(0.25).value() == 0.25);
  CHECK_THROWS_AS(clamp_action(std::nan("")), std::domain_error);
}

TEST_CASE("steering grid is symmetric with step 0.1 at 21 points") {
  const auto grid = make_steering_grid(21);
  REQUIRE(grid.size() == 21);
  CHECK(grid.front().value() == -1.0);
  CHECK(grid.back().value() == 1.0);
  CHECK(grid[10].value() == 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid[i].value() == -grid[grid.size() - 1 - i].value());
    CHECK(grid[i].value() == doctest::Approx(-1.0 + 0.1 * static_cast<double>(i)));
  }
  CHECK(is_valid_steering_grid(grid));
  CHECK_THROWS_AS(make_steering_grid(20), std::invalid_argument);
  CHECK_THROWS_AS(make_steering_grid(1), std::invalid_argument);
  CHECK_FALSE(is_valid_steering_grid({SteeringAction(0.0), SteeringAction(0.5)}));
}

TEST_CASE("wrap angle lands in (-pi, pi]") {
  const double pi = std::acos(-1.0);
  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  CHECK(wrap_angle(0.3) == 0.3);
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50.0, 50.0);
    const double w = wrap_angle(a);
    CHECK(w > -pi);
    CHECK(w <= pi);
    CHECK(std::fabs(std::remainder(a - w, 2 * pi)) < 1e-9);
  }
}

TEST_CASE("rng is reproducible and in range") {
  Rng a(42), b(42), c(43);
  std::vector<std::uint64_t> xa, xb, xc;
  for (int i = 0; i < 16; ++i) {
    xa.push_back(a.next_u64());
    xb.push_back(b.next_u64());
    xc.push_back(c.next_u64());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  Rng r(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    ++counts[r.below(7)];
  }
  for (int n : counts) CHECK(n > 800);
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  auto a = v, b = v;
  Rng r1(9), r2(9);
  r1.shuffle(std::span<int>(a));
  r2.shuffle(std::span<int>(b));
  CHECK(a == b);
  CHECK(a != v);
  CHECK(std::set<int>(a.begin(), a.end()).size() == 50);
}

TEST_CASE("run config json round trip and overrides") {
  RunConfig cfg;
  cfg.speed = 4.5;
  cfg.rng_seed = 77;
  cfg.steering_grid = make_steering_grid(11);
  const RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back == cfg);
  CHECK(run_config_keys().size() == 15);

  RunConfig o;
  apply_override(o, "prediction_horizon", "2");
  apply_override(o, "steering_grid", "odd:5");
  apply_override(o, "camera_pitch", "0.4");
  CHECK(o.prediction_horizon == 2);
  CHECK(o.steering_grid.size() == 5);
  CHECK(o.camera_pitch == 0.4);
  apply_override(o, "steering_grid", "-1,0,1");
  CHECK(o.steering_grid.size() == 3);
  CHECK_THROWS(apply_override(o, "no_such_key", "1"));
  CHECK_THROWS(apply_override(o, "speed", "fast"));
  CHECK_THROWS(apply_override(o, "steering_grid", "0,1"));
  CHECK_THROWS(run_config_from_json(R"({"speed": -1})"));
  CHECK_THROWS(run_config_from_json(R"({"bogus": 1})"));
}

TEST_CASE("run config file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "pml_cfg_test.json";
  RunConfig cfg;
  cfg.image_size = 32;
  save_run_config(path.string(), cfg);
  CHECK(load_run_config(path.string()) == cfg);
  std::filesystem::remove(path);
}

TEST_CASE("byte reader and writer are little-endian and detect truncation") {
  ByteWriter w;
  w.u8(0xAB);
  w.u16(0x1234);
  w.u32(0xDEADBEEF);
  w.i32(-2);
  w.f32(1.5f);
  const auto& buf = w.buffer();
  REQUIRE(buf.size() == 15);
  CHECK(buf[1] == 0x34);
  CHECK(buf[2] == 0x12);
  CHECK(buf[3] == 0xEF);
  ByteReader r(buf);
  CHECK(r.u8() == 0xAB);
  CHECK(r.u16() == 0x1234);
  CHECK(r.u32() == 0xDEADBEEF);
  CHECK(r.i32() == -2);
  CHECK(r.f32() == 1.5f);
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.u8(), TruncatedInput);
}

TEST_CASE("fnv1a matches published vectors") {
  Fnv1a empty;
  CHECK(empty.digest() == 0xcbf29ce484222325ULL);
  Fnv1a a;
  a.update(std::string_view("a"));
  CHECK(a.digest() == 0xaf63dc4c8601ec8cULL);
  Fnv1a foobar;
  foobar.update(std::string_view("foobar"));
  CHECK(foobar.digest() == 0x85944171f73967e8ULL);
}
