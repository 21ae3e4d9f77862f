#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sxen/encoding.hpp"
#include "sxen/hashing.hpp"
#include "sxen/rng.hpp"

using namespace sxen;

namespace {

EncoderConfig small_config(Backend backend, int dim, int levels = 2) {
  EncoderConfig cfg;
  cfg.dim = dim;
  cfg.levels = levels;
  cfg.table_size = 1u << 10;
  cfg.features = 2;
  cfg.base_resolution = 4;
  cfg.growth = 2.0;
  cfg.backend = backend;
  cfg.level_scale = LevelScale::raw;
  return cfg;
}

std::vector<float> encode_vec(const HashEncoder& enc, std::span<const double> x) {
  std::vector<float> out(static_cast<size_t>(enc.config().encoded_width()));
  enc.encode(x, out);
  return out;
}

}  // namespace

TEST_SUITE("encoding") {

TEST_CASE("hash: all-zero coordinates map to index 0") {
  for (int n = 1; n <= kMaxDim; ++n) {
    std::vector<std::int64_t> zeros(static_cast<size_t>(n), 0);
    CHECK(hash_coords(zeros) == 0);
    CHECK(hash_index(zeros, 1u << 14) == 0);
  }
}

TEST_CASE("hash: agrees with an independent reimplementation") {
  CounterRng rng(21);
  for (int n = 1; n <= kMaxDim; ++n) {
    for (int it = 0; it < 2000; ++it) {
      std::vector<std::int64_t> coords(static_cast<size_t>(n));
      for (auto& c : coords) {
        c = static_cast<std::int64_t>(rng.next_u64() % 2000000) - 1000000;
      }
      CHECK(hash_coords(coords) == oracle::hash(coords));
      CHECK(hash_index(coords, 1u << 19) == (oracle::hash(coords) & ((1u << 19) - 1u)));
    }
  }
}

TEST_CASE("hash: index validation") {
  const std::array<std::int64_t, 2> c{1, 2};
  CHECK_THROWS_AS(hash_index(c, 1000), std::invalid_argument);  // not a power of two
  CHECK_THROWS_AS(hash_index(std::span<const std::int64_t>{}, 1u << 4), std::invalid_argument);
}

TEST_CASE("hash: occupancy over random coordinates matches the balls-in-bins model") {
  const std::uint32_t t = 1u << 19;
  const std::uint64_t m = 1000000;
  std::vector<bool> seen(t, false);
  CounterRng rng(22);
  std::array<std::int64_t, 3> c{};
  std::uint64_t distinct = 0;
  for (std::uint64_t it = 0; it < m; ++it) {
    for (auto& v : c) v = static_cast<std::int64_t>(rng.next_u64() % (1u << 20));
    const std::uint32_t idx = hash_index(c, t);
    if (!seen[idx]) {
      seen[idx] = true;
      ++distinct;
    }
  }
  const double expected =
      static_cast<double>(t) *
      (1.0 - std::pow(1.0 - 1.0 / static_cast<double>(t), static_cast<double>(m)));
  CHECK(std::abs(static_cast<double>(distinct) - expected) / expected < 0.02);
}

TEST_CASE("level_resolution: growth table and equal-memory multipliers") {
  EncoderConfig cfg = small_config(Backend::simplex, 2, 4);
  cfg.base_resolution = 16;
  CHECK(level_resolution(cfg, 0) == 16);
  CHECK(level_resolution(cfg, 1) == 32);
  CHECK(level_resolution(cfg, 3) == 128);

  CHECK(equal_memory_multiplier(2) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-12));
  CHECK(equal_memory_multiplier(2) == doctest::Approx(1.3161).epsilon(1e-4));
  CHECK(equal_memory_multiplier(3) == doctest::Approx(std::cbrt(4.0)).epsilon(1e-12));
  CHECK(equal_memory_multiplier(3) == doctest::Approx(1.5874).epsilon(1e-4));

  cfg.level_scale = LevelScale::equal_memory;
  CHECK(level_resolution(cfg, 0) ==
        static_cast<std::uint32_t>(std::floor(16.0 * std::pow(3.0, 0.25))));

  cfg.backend = Backend::grid;  // multiplier only applies to the simplex lattice
  CHECK(level_resolution(cfg, 0) == 16);
}

TEST_CASE("config validation rejects out-of-range fields with a reason") {
  EncoderConfig cfg = small_config(Backend::simplex, 2);
  CHECK_NOTHROW(cfg.validate());

  auto broken = cfg;
  broken.dim = 0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = cfg;
  broken.dim = kMaxDim + 1;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = cfg;
  broken.levels = 0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = cfg;
  broken.table_size = 1000;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = cfg;
  broken.features = 0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = cfg;
  broken.base_resolution = 0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = cfg;
  broken.growth = 1.0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = cfg;
  broken.levels = 40;  // finest resolution overflows the supported range
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}

TEST_CASE("zero-initialized tables encode to zero everywhere") {
  CounterRng rng(23);
  for (Backend backend : {Backend::simplex, Backend::grid}) {
    HashEncoder enc(small_config(backend, 3));
    for (int it = 0; it < 50; ++it) {
      std::array<double, 3> x{rng.next_double(), rng.next_double(), rng.next_double()};
      for (float v : encode_vec(enc, x)) CHECK(v == 0.0f);
    }
  }
}

TEST_CASE("a point at a lattice vertex reads back that vertex's entry exactly") {
  // The origin maps to skewed/grid coordinates (0,...,0) in every backend,
  // whose hash index is 0.
  for (Backend backend : {Backend::simplex, Backend::grid}) {
    EncoderConfig cfg = small_config(backend, 2, 1);
    HashEncoder enc(cfg);
    enc.table(0)[0] = 0.25f;
    enc.table(0)[1] = -0.75f;
    const std::array<double, 2> origin{0.0, 0.0};
    const auto out = encode_vec(enc, origin);
    CHECK(out[0] == 0.25f);
    CHECK(out[1] == -0.75f);
  }

  // An interior grid corner with an exactly representable coordinate.
  EncoderConfig cfg = small_config(Backend::grid, 2, 1);
  HashEncoder enc(cfg);
  const std::array<std::int64_t, 2> corner{2, 1};
  const std::uint32_t idx = hash_index(corner, cfg.table_size);
  enc.table(0)[idx * 2] = 1.5f;
  enc.table(0)[idx * 2 + 1] = 2.5f;
  const std::array<double, 2> x{0.5, 0.25};  // times resolution 4 -> (2, 1)
  const auto out = encode_vec(enc, x);
  CHECK(out[0] == 1.5f);
  CHECK(out[1] == 2.5f);
}

TEST_CASE("grid backend: frozen one-dimensional and bilinear blends") {
  // n=1, single cell: plain linear interpolation between the two entries.
  {
    EncoderConfig cfg = small_config(Backend::grid, 1, 1);
    cfg.base_resolution = 1;
    cfg.features = 1;
    HashEncoder enc(cfg);
    const std::array<std::int64_t, 1> c0{0};
    const std::array<std::int64_t, 1> c1{1};
    enc.table(0)[hash_index(c0, cfg.table_size)] = 2.0f;
    enc.table(0)[hash_index(c1, cfg.table_size)] = 6.0f;
    for (double t : {0.0, 0.25, 0.5, 0.75}) {
      const std::array<double, 1> x{t};
      CHECK(encode_vec(enc, x)[0] == doctest::Approx(2.0 + 4.0 * t).epsilon(1e-6));
    }
  }

  // n=2, single cell, corner values 0,1,2,3 at the cell midpoint -> 1.5.
  {
    EncoderConfig cfg = small_config(Backend::grid, 2, 1);
    cfg.base_resolution = 1;
    cfg.features = 1;
    HashEncoder enc(cfg);
    for (int m = 0; m < 4; ++m) {
      const std::array<std::int64_t, 2> corner{m & 1, (m >> 1) & 1};
      enc.table(0)[hash_index(corner, cfg.table_size)] = static_cast<float>(m);
    }
    const std::array<double, 2> x{0.5, 0.5};
    CHECK(encode_vec(enc, x)[0] == doctest::Approx(1.5).epsilon(1e-7));
  }
}

TEST_CASE("simplex backend: frozen three-vertex blend against the independent pipeline") {
  EncoderConfig cfg = small_config(Backend::simplex, 2, 1);
  HashEncoder enc(cfg);
  enc.init_tables(123);

  const std::array<double, 2> x{0.25, 0.5};
  const auto got = encode_vec(enc, x);

  oracle::LevelParams lp{cfg.dim, enc.resolution(0), cfg.table_size, cfg.features};
  const auto want = oracle::encode_simplex_level(lp, enc.table(0), x);
  REQUIRE(want.size() == got.size());
  for (size_t i = 0; i < got.size(); ++i) {
    CHECK(std::abs(static_cast<double>(got[i]) - want[i]) < 1e-9);
  }
}

TEST_CASE("both backends match the independent pipeline at random points and levels") {
  CounterRng rng(24);
  for (Backend backend : {Backend::simplex, Backend::grid}) {
    for (int n = 1; n <= 7; ++n) {
      EncoderConfig cfg = small_config(backend, n, 3);
      HashEncoder enc(cfg);
      enc.init_tables(77);
      for (int it = 0; it < 200; ++it) {
        std::array<double, kMaxDim> x{};
        for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = rng.next_double();
        const auto view = std::span<const double>(x.data(), static_cast<size_t>(n));
        const auto got = encode_vec(enc, view);
        for (int l = 0; l < cfg.levels; ++l) {
          oracle::LevelParams lp{n, enc.resolution(l), cfg.table_size, cfg.features};
          const auto want = backend == Backend::simplex
                                ? oracle::encode_simplex_level(lp, enc.table(l), view)
                                : oracle::encode_grid_level(lp, enc.table(l), view);
          for (int f = 0; f < cfg.features; ++f) {
            const double g = static_cast<double>(
                got[static_cast<size_t>(l) * static_cast<size_t>(cfg.features) +
                    static_cast<size_t>(f)]);
            CHECK(std::abs(g - want[static_cast<size_t>(f)]) < 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("encoding is linear in the table entries") {
  CounterRng rng(25);
  for (Backend backend : {Backend::simplex, Backend::grid}) {
    HashEncoder enc(small_config(backend, 3));
    enc.init_tables(5);
    const std::array<double, 3> x{0.31, 0.77, 0.12};
    const auto once = encode_vec(enc, x);
    for (int l = 0; l < enc.config().levels; ++l) {
      for (float& v : enc.table(l)) v *= 2.0f;
    }
    const auto twice = encode_vec(enc, x);
    for (size_t i = 0; i < once.size(); ++i) {
      CHECK(std::abs(static_cast<double>(twice[i]) - 2.0 * static_cast<double>(once[i])) < 1e-9);
    }
  }
}

TEST_CASE("interpolation weights sum to one: constant tables encode to the constant") {
  CounterRng rng(26);
  for (Backend backend : {Backend::simplex, Backend::grid}) {
    for (int n = 1; n <= 7; ++n) {
      HashEncoder enc(small_config(backend, n));
      for (int l = 0; l < enc.config().levels; ++l) {
        for (float& v : enc.table(l)) v = 0.5f;
      }
      for (int it = 0; it < 100; ++it) {
        std::array<double, kMaxDim> x{};
        for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = rng.next_double();
        for (float v :
             encode_vec(enc, std::span<const double>(x.data(), static_cast<size_t>(n)))) {
          CHECK(std::abs(static_cast<double>(v) - 0.5) < 1e-7);
        }
      }
    }
  }
}

TEST_CASE("identical config and seed produce bit-identical tables and outputs") {
  const EncoderConfig cfg = small_config(Backend::simplex, 4);
  HashEncoder a(cfg);
  HashEncoder b(cfg);
  a.init_tables(999);
  b.init_tables(999);
  for (int l = 0; l < cfg.levels; ++l) {
    const auto ta = a.table(l);
    const auto tb = b.table(l);
    REQUIRE(ta.size() == tb.size());
    for (size_t i = 0; i < ta.size(); ++i) CHECK(ta[i] == tb[i]);
  }
  const std::array<double, 4> x{0.1, 0.9, 0.4, 0.6};
  const auto oa = encode_vec(a, x);
  const auto ob = encode_vec(b, x);
  for (size_t i = 0; i < oa.size(); ++i) CHECK(oa[i] == ob[i]);
}

TEST_CASE("touched-vertex counters are exact; in-range inputs never go out of bounds") {
  CounterRng rng(27);
  for (int n = 2; n <= 5; ++n) {
    HashEncoder simplex(small_config(Backend::simplex, n));
    HashEncoder grid(small_config(Backend::grid, n));
    const int k = 100;
    std::vector<float> out(static_cast<size_t>(simplex.config().encoded_width()));
    for (int it = 0; it < k; ++it) {
      std::array<double, kMaxDim> x{};
      for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = rng.next_double();
      const auto view = std::span<const double>(x.data(), static_cast<size_t>(n));
      simplex.encode(view, out);
      grid.encode(view, out);
    }
    const int levels = simplex.config().levels;
    CHECK(simplex.counters().touched_vertices ==
          static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(levels) *
              static_cast<std::uint64_t>(n + 1));
    CHECK(grid.counters().touched_vertices ==
          static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(levels) *
              (1ull << n));
    CHECK(simplex.counters().out_of_bounds == 0);
    CHECK(grid.counters().out_of_bounds == 0);
    simplex.reset_counters();
    CHECK(simplex.counters().touched_vertices == 0);
  }
}

TEST_CASE("unit-cube boundary points are accepted and stay in bounds") {
  for (Backend backend : {Backend::simplex, Backend::grid}) {
    HashEncoder enc(small_config(backend, 2));
    std::vector<float> out(static_cast<size_t>(enc.config().encoded_width()));
    for (const auto& x : {std::array{0.0, 0.0}, std::array{1.0, 1.0}, std::array{1.0, 0.0},
                          std::array{0.999999999, 1.0}}) {
      CHECK_NOTHROW(enc.encode(x, out));
    }
    CHECK(enc.counters().out_of_bounds == 0);
  }
}

TEST_CASE("encode input and shape validation") {
  HashEncoder enc(small_config(Backend::simplex, 2));
  std::vector<float> out(static_cast<size_t>(enc.config().encoded_width()));
  CHECK_THROWS_AS(enc.encode(std::array{0.5, 0.5, 0.5}, out), std::invalid_argument);
  CHECK_THROWS_AS(enc.encode(std::array{1.5, 0.5}, out), std::invalid_argument);
  CHECK_THROWS_AS(enc.encode(std::array{-0.1, 0.5}, out), std::invalid_argument);
  const double nan = std::nan("");
  CHECK_THROWS_AS(enc.encode(std::array{nan, 0.5}, out), std::invalid_argument);
  std::vector<float> bad(out.size() + 1);
  CHECK_THROWS_AS(enc.encode(std::array{0.5, 0.5}, bad), std::invalid_argument);
}

TEST_CASE("gradient accumulator: add, merge, and O(touched) clear") {
  EncoderGradient g(2, 1u << 4, 2);
  const std::array<double, 2> up{1.0, -2.0};
  g.add(0, 3, 0.5, up);
  g.add(0, 3, 0.5, up);  // same slot accumulates
  g.add(1, 7, 1.0, up);
  CHECK(g.touched(0).size() == 1);
  CHECK(g.touched(1).size() == 1);
  CHECK(g.touched_total() == 2);
  CHECK(g.slice(0, 3)[0] == doctest::Approx(1.0));
  CHECK(g.slice(0, 3)[1] == doctest::Approx(-2.0));

  EncoderGradient h(2, 1u << 4, 2);
  h.add(0, 3, 1.0, up);
  h.add(0, 9, 2.0, up);
  g.merge(h);
  CHECK(g.touched(0).size() == 2);
  CHECK(g.slice(0, 3)[0] == doctest::Approx(2.0));
  CHECK(g.slice(0, 9)[1] == doctest::Approx(-4.0));

  g.clear();
  CHECK(g.touched_total() == 0);
  CHECK(g.slice(0, 3)[0] == 0.0);
  CHECK(g.slice(0, 9)[0] == 0.0);

  EncoderGradient wrong(3, 1u << 4, 2);
  CHECK_THROWS_AS(g.merge(wrong), std::invalid_argument);
}

TEST_CASE("backward: zero upstream leaves only zero slices") {
  HashEncoder enc(small_config(Backend::simplex, 3));
  enc.init_tables(4);
  EncoderGradient grad(enc.config().levels, enc.config().table_size, enc.config().features);
  const std::array<double, 3> x{0.2, 0.6, 0.9};
  std::vector<double> upstream(static_cast<size_t>(enc.config().encoded_width()), 0.0);
  enc.encode_backward(x, upstream, grad);
  for (int l = 0; l < grad.levels(); ++l) {
    for (std::uint32_t idx : grad.touched(l)) {
      for (double v : grad.slice(l, idx)) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("backward: one-hot upstream recovers the interpolation weights") {
  CounterRng rng(28);
  for (Backend backend : {Backend::simplex, Backend::grid}) {
    HashEncoder enc(small_config(backend, 2));
    enc.init_tables(6);
    const auto& cfg = enc.config();
    for (int it = 0; it < 20; ++it) {
      const std::array<double, 2> x{rng.next_double(), rng.next_double()};
      const int hot_level = it % cfg.levels;
      const int hot_feature = it % cfg.features;
      std::vector<double> upstream(static_cast<size_t>(cfg.encoded_width()), 0.0);
      upstream[static_cast<size_t>(hot_level * cfg.features + hot_feature)] = 1.0;
      EncoderGradient grad(cfg.levels, cfg.table_size, cfg.features);
      enc.encode_backward(x, upstream, grad);

      // Weights land in the hot feature slot and sum to one over the level.
      double sum = 0.0;
      for (int l = 0; l < cfg.levels; ++l) {
        for (std::uint32_t idx : grad.touched(l)) {
          const auto slice = grad.slice(l, idx);
          for (int f = 0; f < cfg.features; ++f) {
            if (l != hot_level || f != hot_feature) {
              CHECK(slice[static_cast<size_t>(f)] == 0.0);
            }
          }
          sum += slice[static_cast<size_t>(hot_feature)];
          if (l == hot_level) CHECK(slice[static_cast<size_t>(hot_feature)] >= 0.0);
        }
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward matches finite differences on individual table entries") {
  CounterRng rng(29);
  for (Backend backend : {Backend::simplex, Backend::grid}) {
    HashEncoder enc(small_config(backend, 2));
    enc.init_tables(8);
    const auto& cfg = enc.config();
    const std::array<double, 2> x{0.37, 0.58};

    std::vector<double> upstream(static_cast<size_t>(cfg.encoded_width()));
    for (auto& u : upstream) u = rng.next_double(-1.0, 1.0);
    EncoderGradient grad(cfg.levels, cfg.table_size, cfg.features);
    enc.encode_backward(x, upstream, grad);

    // loss = upstream . encode(x); its derivative in entry (l, idx, f) is
    // the accumulated value. The encoding is linear, so differences are
    // exact up to float rounding.
    auto loss = [&]() {
      const auto out = encode_vec(enc, x);
      double acc = 0.0;
      for (size_t i = 0; i < out.size(); ++i) acc += upstream[i] * static_cast<double>(out[i]);
      return acc;
    };
    const float h = 1e-3f;
    int checked = 0;
    for (int l = 0; l < cfg.levels && checked < 8; ++l) {
      for (std::uint32_t idx : grad.touched(l)) {
        const int f = static_cast<int>(idx % static_cast<std::uint32_t>(cfg.features));
        float& entry = enc.table(l)[static_cast<size_t>(idx) * static_cast<size_t>(cfg.features) +
                                    static_cast<size_t>(f)];
        const float saved = entry;
        entry = saved + h;
        const double up = loss();
        entry = saved - h;
        const double down = loss();
        entry = saved;
        const double fd = (up - down) / (2.0 * static_cast<double>(h));
        const double analytic = grad.slice(l, idx)[static_cast<size_t>(f)];
        CHECK(std::abs(fd - analytic) < 1e-3 * std::max(1.0, std::abs(analytic)));
        if (++checked >= 8) break;
      }
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("backward shape validation") {
  HashEncoder enc(small_config(Backend::simplex, 2));
  EncoderGradient good(enc.config().levels, enc.config().table_size, enc.config().features);
  EncoderGradient bad(enc.config().levels + 1, enc.config().table_size, enc.config().features);
  std::vector<double> upstream(static_cast<size_t>(enc.config().encoded_width()), 0.0);
  std::vector<double> short_up(upstream.size() - 1, 0.0);
  const std::array<double, 2> x{0.5, 0.5};
  CHECK_THROWS_AS(enc.encode_backward(x, short_up, good), std::invalid_argument);
  CHECK_THROWS_AS(enc.encode_backward(x, upstream, bad), std::invalid_argument);
}

TEST_CASE("parameter count covers every level's table") {
  const EncoderConfig cfg = small_config(Backend::simplex, 3, 5);
  HashEncoder enc(cfg);
  CHECK(enc.parameter_count() == 5ull * cfg.table_size * 2ull);
}

}  // TEST_SUITE
