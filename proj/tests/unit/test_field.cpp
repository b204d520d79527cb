#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "plab/calibration.hpp"
#include "plab/field.hpp"
#include "plab/field_io.hpp"
#include "plab/smooth_function.hpp"

using namespace plab;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("plab_field_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// The three V-distances of a gradient field to its V-, arithmetic and
/// A-averages on a ball.
std::array<double, 3> dks_quantities(const VectorField& g, const Ball& b, const ExponentCtx& ctx) {
  const auto nodes = nodes_in(g.grid(), b);
  const Vec2 qs[3] = {v_average(g, b, ctx), ball_average(g, b), a_average(g, b, ctx)};
  std::array<double, 3> out{};
  for (int m = 0; m < 3; ++m) {
    const Vec2 vq = v_map(ctx, qs[m]);
    double acc = 0.0;
    for (std::size_t k : nodes) acc += norm2(v_map(ctx, g[k]) - vq);
    out[m] = acc / double(nodes.size());
  }
  return out;
}

}  // namespace

TEST_SUITE("field") {
  TEST_CASE("grid and ball basics") {
    const Grid2D g(-1.0, 0.5, 0.25, 9, 5);
    CHECK(g.size() == 45);
    CHECK(g.x_max() == Approx(1.0));
    CHECK(g.y_max() == Approx(1.5));
    CHECK(g.point(g.index(2, 3)) == Vec2{-0.5, 1.25});
    CHECK_THROWS_AS(Grid2D(0, 0, 0.0, 5, 5), DomainError);
    CHECK_THROWS_AS(Grid2D(0, 0, 0.1, 1, 5), DomainError);
    CHECK_THROWS_AS(Ball({0, 0}, 0.0), DomainError);
    CHECK_THROWS_AS(Ball({0, 0}, -1.0), DomainError);
    const Ball b({0, 0}, 1.0);
    CHECK(b.contains({0.5, 0.5}));
    CHECK_FALSE(b.contains({1.0, 0.0}));
    CHECK(b.scaled(2.0).radius() == 2.0);
    CHECK(b.inside(Grid2D::square(-1, 1, 11)));
    CHECK_FALSE(b.scaled(1.1).inside(Grid2D::square(-1, 1, 11)));
  }

  TEST_CASE("fields reject non-finite values and wrong lengths") {
    const Grid2D g = Grid2D::square(0, 1, 3);
    CHECK_THROWS_AS(ScalarField(g, std::vector<double>(8, 0.0)), DomainError);
    std::vector<double> v(9, 0.0);
    v[4] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ScalarField(g, v), DomainError);
  }

  TEST_CASE("gradient examples") {
    const Grid2D g(-0.7, 0.2, 0.1, 23, 17);
    const VectorField flat = gradient(ScalarField(g, 4.2));
    for (const Vec2& v : flat.values()) CHECK(norm(v) < 1e-12);
    const auto affine = sample(g, [](const Vec2& x) { return 3.0 * x.x - 2.0 * x.y; });
    const VectorField ga = gradient(affine);
    for (const Vec2& v : ga.values()) {
      CHECK(v.x == Approx(3.0).epsilon(1e-12));
      CHECK(v.y == Approx(-2.0).epsilon(1e-12));
    }
    const auto quad = sample(g, [](const Vec2& x) { return x.x * x.x; });
    const VectorField gq = gradient(quad);
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 1; i + 1 < g.nx(); ++i) CHECK(std::abs(gq(i, j).x - 2.0 * g.x(i)) < 1e-12);
    }
    // The one-sided second-order boundary stencil is exact on quadratics too.
    CHECK(std::abs(gq(0, 0).x - 2.0 * g.x(0)) < 1e-12);
    CHECK(std::abs(gq(g.nx() - 1, 0).x - 2.0 * g.x_max()) < 1e-12);
  }

  TEST_CASE("divergence and curl of exact stencil identities") {
    const Grid2D g = Grid2D::square(-1, 1, 41);
    const auto u = sample(g, [](const Vec2& x) { return std::sin(2 * x.x) * std::cos(x.y); });
    const ScalarField c = curl(gradient(u));
    // Central differences in x and y commute away from the boundary stencils.
    for (int j = 1; j + 1 < g.ny(); ++j) {
      for (int i = 1; i + 1 < g.nx(); ++i) {
        if (i > 1 && j > 1 && i + 2 < g.nx() && j + 2 < g.ny()) CHECK(std::abs(c(i, j)) < 1e-11);
      }
    }
    const auto rot = transform(gradient(u), [](const Vec2& v) { return rot90(v); });
    const ScalarField d = divergence(rot);
    for (int j = 2; j + 2 < g.ny(); ++j) {
      for (int i = 2; i + 2 < g.nx(); ++i) CHECK(std::abs(d(i, j)) < 1e-11);
    }
  }

  TEST_CASE("summation by parts with explicit boundary terms") {
    const Grid2D g(0.1, -0.3, 0.05, 31, 23);
    const TrigSeries su = TrigSeries::random(7, 5, 4.0, 1.0, 1.0);
    const TrigSeries sx = TrigSeries::random(8, 5, 4.0, 1.0, 1.0);
    const TrigSeries sy = TrigSeries::random(9, 5, 4.0, 1.0, 1.0);
    const auto u = sample(g, [&](const Vec2& x) { return su.value(x); });
    const auto G = sample(g, [&](const Vec2& x) { return Vec2{sx.value(x), sy.value(x)}; });
    const VectorField gu = gradient(u);
    const ScalarField dg = divergence(G);
    const double h = g.h();
    const int nx = g.nx(), ny = g.ny();

    // Interior sum of grad u . G + u div G.
    double lhs = 0.0, scale = 0.0;
    for (int j = 1; j + 1 < ny; ++j) {
      for (int i = 1; i + 1 < nx; ++i) {
        lhs += dot(gu(i, j), G(i, j)) + u(i, j) * dg(i, j);
        scale += std::abs(dot(gu(i, j), G(i, j))) + std::abs(u(i, j) * dg(i, j));
      }
    }
    // Along each line the central-difference sum telescopes to
    // (S_{n-2} - S_0) / 2h with S_i = u_{i+1} G_i + u_i G_{i+1}.
    double rhs = 0.0;
    for (int j = 1; j + 1 < ny; ++j) {
      const auto s = [&](int i) { return u(i + 1, j) * G(i, j).x + u(i, j) * G(i + 1, j).x; };
      rhs += (s(nx - 2) - s(0)) / (2.0 * h);
    }
    for (int i = 1; i + 1 < nx; ++i) {
      const auto s = [&](int j) { return u(i, j + 1) * G(i, j).y + u(i, j) * G(i, j + 1).y; };
      rhs += (s(ny - 2) - s(0)) / (2.0 * h);
    }
    CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
  }

  TEST_CASE("ball_average examples") {
    const Grid2D g = Grid2D::square(-1.5, 1.5, 301);
    CHECK(ball_average(ScalarField(g, 2.5), Ball({0.3, 0.1}, 0.7)) == Approx(2.5).epsilon(1e-14));
    const auto fx = sample(g, [](const Vec2& x) { return x.x; });
    CHECK(std::abs(ball_average(fx, Ball({0, 0}, 1.0))) <= 2.0 * g.h());
    const auto fx2 = sample(g, [](const Vec2& x) { return x.x * x.x; });
    CHECK(std::abs(ball_average(fx2, Ball({0, 0}, 1.0)) - 0.25) < 1e-2);
  }

  TEST_CASE("ball statistics require sixteen nodes") {
    const Grid2D g = Grid2D::square(0, 1, 11);
    const ScalarField f(g, 1.0);
    CHECK_THROWS_AS(ball_average(f, Ball({0.5, 0.5}, 0.2)), InsufficientResolution);
    CHECK_NOTHROW(ball_average(f, Ball({0.5, 0.5}, 0.3)));
    CHECK_THROWS_AS(oscillation(f, Ball({0.5, 0.5}, 0.15), 1.0), InsufficientResolution);
    // Nodes outside the grid rectangle do not count.
    CHECK_THROWS_AS(ball_average(f, Ball({-0.2, -0.2}, 0.45)), InsufficientResolution);
  }

  TEST_CASE("oscillation examples") {
    const Grid2D g = Grid2D::square(-1, 1, 201);
    const double r = 0.5;
    const Ball b({0, 0}, r);
    CHECK(oscillation(ScalarField(g, 3.0), b, 2.0) == 0.0);
    const auto fx = sample(g, [](const Vec2& x) { return x.x; });
    REQUIRE(g.h() <= r / 50.0);
    CHECK(std::abs(oscillation(fx, b, 2.0) - r / 2.0) <= 0.03 * r / 2.0);
    CHECK(std::abs(oscillation(fx, b, kInf) - r) <= 2.0 * g.h());
    CHECK_THROWS_AS(oscillation(fx, b, 0.5), ParameterError);
  }

  TEST_CASE("oscillation is shift invariant and homogeneous") {
    const Grid2D g = Grid2D::square(-1, 1, 81);
    const auto f = sample(g, [](const Vec2& x) { return std::exp(x.x) * std::sin(3 * x.y); });
    const auto vf = sample(g, [](const Vec2& x) { return Vec2{x.x * x.y, std::cos(x.x)}; });
    const Ball b({0.2, -0.1}, 0.6);
    for (double w : {1.0, 1.5, 2.0, 3.0, 4.5, kInf}) {
      const double o = oscillation(f, b, w);
      CHECK(oscillation(transform(f, [](double v) { return v + 0.375; }), b, w) == Approx(o).epsilon(1e-12));
      // Scaling by a power of two is exact except through pow(., 1/w).
      const double scaled = oscillation(transform(f, [](double v) { return -4.0 * v; }), b, w);
      if (w == 1.0 || w == 2.0 || std::isinf(w)) {
        CHECK(scaled == 4.0 * o);
      } else {
        CHECK(scaled == Approx(4.0 * o).epsilon(1e-13));
      }
      CHECK(oscillation(transform(f, [](double v) { return 0.3 * v; }), b, w) == Approx(0.3 * o).epsilon(1e-13));
      const double ov = oscillation(vf, b, w);
      CHECK(oscillation(transform(vf, [](const Vec2& v) { return v + Vec2{1, -2}; }), b, w) ==
            Approx(ov).epsilon(1e-12));
    }
  }

  TEST_CASE("A- and V-averages") {
    const Grid2D g = Grid2D::square(-1, 1, 101);
    const Ball b({0, 0}, 0.5);
    const VectorField cst(g, Vec2{0.7, -1.3});
    for (double p : {1.5, 2.0, 3.0, 4.5}) {
      const ExponentCtx ctx(p);
      const Vec2 qa = a_average(cst, b, ctx), qv = v_average(cst, b, ctx);
      CHECK(norm(qa - Vec2{0.7, -1.3}) < 1e-12);
      CHECK(norm(qv - Vec2{0.7, -1.3}) < 1e-12);
    }
    const auto gen = sample(g, [](const Vec2& x) { return Vec2{std::sin(x.x + x.y), x.y * x.y}; });
    const ExponentCtx p2(2);
    CHECK(norm(a_average(gen, b, p2) - ball_average(gen, b)) < 1e-14);
    CHECK(norm(v_average(gen, b, p2) - ball_average(gen, b)) < 1e-14);
    const auto odd = sample(g, [](const Vec2& x) { return Vec2{x.x, 0}; });
    // The A-image is zero up to round-off; A^{-1} takes a cube root of it.
    const ExponentCtx p4(4);
    CHECK(norm(a_map(p4, a_average(odd, b, p4))) < 1e-14);
  }

  TEST_CASE("nondegeneracy_ratio examples") {
    const Grid2D g = Grid2D::square(-1, 1, 201);
    const Ball b({0, 0}, 0.5);
    const ExponentCtx ctx(3);
    const auto r_const = nondegeneracy_ratio(VectorField(g, Vec2{1, 2}), b, ctx);
    REQUIRE(r_const.has_value());
    CHECK(*r_const < 1e-14);
    const auto odd = sample(g, [](const Vec2& x) { return Vec2{x.x, 0}; });
    const auto r_odd = nondegeneracy_ratio(odd, b, ctx);
    REQUIRE(r_odd.has_value());
    CHECK(*r_odd == Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(nondegeneracy_ratio(VectorField(g, Vec2{0, 0}), b, ctx).has_value());
  }

  TEST_CASE("mean_equivalence_check examples") {
    const Grid2D g = Grid2D::square(-1, 1, 101);
    const Ball b({0, 0}, 0.6);
    const MeanEquivalence c = mean_equivalence_check(ScalarField(g, 5.0), b, 1.0);
    CHECK(c.about_mean == 0.0);
    CHECK(c.infimum == Approx(0.0).epsilon(1e-12));
    const auto f = sample(g, [](const Vec2& x) { return std::exp(x.x) + x.y * x.y * x.y; });
    const MeanEquivalence two = mean_equivalence_check(f, b, 2.0);
    CHECK(std::abs(two.about_mean - two.infimum) <= 1e-8);
    const auto fx = sample(g, [](const Vec2& x) { return x.x; });
    const MeanEquivalence one = mean_equivalence_check(fx, b, 1.0);
    CHECK(one.bracket_holds());
    CHECK(one.about_mean / one.infimum >= 1.0 - 1e-12);
    CHECK(one.about_mean / one.infimum <= 2.0);
    CHECK_THROWS_AS(mean_equivalence_check(fx, b, kInf), ParameterError);
  }

  TEST_CASE("mean equivalence bracket over random fields") {
    const Grid2D g = Grid2D::square(-1, 1, 65);
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const TrigSeries s = TrigSeries::random(seed, 4, 5.0, 1.0, 1.0);
      const TrigSeries t = TrigSeries::random(seed + 100, 4, 5.0, 1.0, 1.0);
      const auto f = sample(g, [&](const Vec2& x) { return s.value(x); });
      const auto vf = sample(g, [&](const Vec2& x) { return Vec2{s.value(x), t.value(x)}; });
      const Ball b({0.1 * double(seed % 3), -0.05 * double(seed % 4)}, 0.5);
      for (double w : {1.0, 1.5, 2.0, 3.0}) {
        CHECK(mean_equivalence_check(f, b, w).bracket_holds());
        CHECK(mean_equivalence_check(vf, b, w).bracket_holds());
      }
      const MeanEquivalence two = mean_equivalence_check(vf, b, 2.0);
      CHECK(std::abs(two.about_mean - two.infimum) <= 1e-8 * std::max(1.0, two.about_mean));
    }
  }

  TEST_CASE("V-distance to the V-, arithmetic and A-averages are equivalent") {
    const Grid2D g = Grid2D::square(-1, 1, 81);
    for (double p : {1.5, 3.0}) {
      const ExponentCtx ctx(p);
      const auto ratios = [&](std::uint64_t first) {
        std::vector<double> out;
        for (std::uint64_t seed = first; seed < first + 20; ++seed) {
          const TrigSeries s = TrigSeries::random(seed, 4, 4.0, 0.6, 1.0);
          const auto grad = sample(g, [&](const Vec2& x) { return s.gradient(x); });
          const Ball b({0.2 * std::sin(double(seed)), 0.2 * std::cos(double(seed))}, 0.5);
          const auto q = dks_quantities(grad, b, ctx);
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              if (i != j) out.push_back(q[i] / q[j]);
            }
          }
        }
        return out;
      };
      const auto train = ratios(1000), held_out = ratios(2000);
      const double c = calibrate_max_ratio(train);
      CAPTURE(p);
      CAPTURE(c);
      CHECK(std::isfinite(c));
      CHECK(validate_ratios(held_out, c).pass_rate() >= 0.95);
    }
  }

  TEST_CASE("field dumps round trip bit exactly") {
    const auto dir = scratch_dir("io");
    const Grid2D g(-0.123456789012345, 3.5e-7, 1.0 / 3.0, 7, 5);
    Rng rng(77);
    std::vector<double> sv(g.size());
    std::vector<Vec2> vv(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      sv[k] = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-300.0, 300.0));
      vv[k] = {rng.uniform(-1.0, 1.0) / 3.0, std::nextafter(rng.uniform(), 2.0)};
    }
    sv[0] = 0.0;
    sv[1] = -0.0;
    sv[2] = std::numeric_limits<double>::denorm_min();
    sv[3] = std::numeric_limits<double>::max();
    const ScalarField s(g, sv);
    const VectorField v(g, vv);
    write_field(s, dir / "s", 42);
    write_field(v, dir / "v");
    const ScalarField s2 = read_scalar_field(dir / "s");
    const VectorField v2 = read_vector_field(dir / "v");
    CHECK(s2.grid() == g);
    CHECK(v2.grid() == g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(std::signbit(s2[k]) == std::signbit(s[k]));
      CHECK(s2[k] == s[k]);
      CHECK(v2[k] == v[k]);
    }
    CHECK_THROWS(read_vector_field(dir / "s"));
    CHECK_THROWS(read_scalar_field(dir / "missing"));
  }

  TEST_CASE("format_double and parse_double") {
    for (double v : {0.1, 1.0 / 3.0, 1e-310, -2.5e300, 123456789.123456789}) {
      CHECK(parse_double(format_double(v)) == v);
    }
    CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
  }
}
