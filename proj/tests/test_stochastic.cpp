#include <doctest.h>

#include <cmath>
#include <vector>

#include "fptmc/errors.hpp"
#include "fptmc/stochastic.hpp"
#include "support/stats.hpp"

using namespace fptmc;
namespace ts = testsupport;

TEST_SUITE("stochastic") {

TEST_CASE("streams replay bit-identically and differ across run indices") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool identical = true, different = false;
  for (int i = 0; i < 200; ++i) {
    const double ua = a.uniform();
    identical = identical && ua == b.uniform();
    different = different || ua != c.uniform();
  }
  CHECK(identical);
  CHECK(different);

  RngStream d(42, 7), e(42, 7);
  for (int i = 0; i < 50; ++i) {
    CHECK(d.normal() == e.normal());
    CHECK(d.exponential(3.0) == e.exponential(3.0));
  }
}

TEST_CASE("jump timeline structure and degenerate limit") {
  RngStream stream(1, 0);
  SUBCASE("huge interjump mean gives the bare horizon") {
    for (int rep = 0; rep < 50; ++rep) {
      const auto tl = sample_jump_timeline(1e9, 10.0, stream);
      CHECK(tl.jump_count() == 0);
      CHECK(tl.instants.front() == 0.0);
      CHECK(tl.instants.back() == 10.0);
    }
  }
  SUBCASE("instants are strictly increasing with bracketing endpoints") {
    for (int rep = 0; rep < 200; ++rep) {
      const auto tl = sample_jump_timeline(0.8, 10.0, stream);
      CHECK(tl.instants.front() == 0.0);
      CHECK(tl.instants.back() == 10.0);
      for (std::size_t i = 1; i < tl.instants.size(); ++i)
        CHECK(tl.instants[i] > tl.instants[i - 1]);
    }
  }
  SUBCASE("fixed seed replays the same timeline") {
    RngStream s1(9, 3), s2(9, 3);
    const auto t1 = sample_jump_timeline(1.0, 10.0, s1);
    const auto t2 = sample_jump_timeline(1.0, 10.0, s2);
    CHECK(t1.instants == t2.instants);
  }
}

TEST_CASE("mean jump count matches the exponential interarrival law") {
  // With mean-1 interjump times over [0,10] the count is Poisson(10).
  const std::size_t runs = 100000;
  double total = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    RngStream stream(123, r);
    total += static_cast<double>(sample_jump_timeline(1.0, 10.0, stream).jump_count());
  }
  CHECK(total / static_cast<double>(runs) == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("interjump endpoint sampling") {
  SUBCASE("zero diffusion leaves pure drift") {
    const auto zero_row = DiffusionMatrix::from_rows({{0.0}});
    // validate() would reject an all-zero row; the sampler itself is exact.
    const double x0[1] = {1.5}, mu[1] = {-0.25};
    double out[1];
    RngStream stream(5, 0);
    sample_interjump_endpoint(std::span<const double>(x0, 1), std::span<const double>(mu, 1),
                              zero_row, 4.0, stream, std::span<double>(out, 1));
    CHECK(out[0] == doctest::Approx(1.5 - 1.0).epsilon(1e-15));
  }

  SUBCASE("single firm sd scales with sqrt(tau)") {
    const auto m = DiffusionMatrix::from_rows({{0.09}});
    const double x0[1] = {0.0}, mu[1] = {0.0};
    double out[1];
    RngStream stream(17, 0);
    const std::size_t n = 1000000;
    std::vector<double> incr(n);
    for (std::size_t i = 0; i < n; ++i) {
      sample_interjump_endpoint(std::span<const double>(x0, 1), std::span<const double>(mu, 1),
                                m, 4.0, stream, std::span<double>(out, 1));
      incr[i] = out[0];
    }
    CHECK(std::sqrt(ts::variance(incr)) == doctest::Approx(0.18).epsilon(0.005));
  }

  SUBCASE("two-firm increment covariance converges to tau * sigma sigma^T") {
    const auto m = DiffusionMatrix::from_rows({{0.06963755, 0.02993134},
                                               {0.03387809, 0.06691001}});
    double target[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) target[i][j] += m(i, k) * m(j, k);

    const double x0[2] = {0.0, 0.0}, mu[2] = {0.0, 0.0};
    double out[2];
    RngStream stream(29, 0);
    const std::size_t n = 1000000;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      sample_interjump_endpoint(std::span<const double>(x0, 2), std::span<const double>(mu, 2),
                                m, 1.0, stream, std::span<double>(out, 2));
      a[i] = out[0];
      b[i] = out[1];
    }
    double cov = 0.0;
    const double ma = ts::mean(a), mb = ts::mean(b);
    for (std::size_t i = 0; i < n; ++i) cov += (a[i] - ma) * (b[i] - mb);
    cov /= static_cast<double>(n);
    CHECK(ts::variance(a) == doctest::Approx(target[0][0]).epsilon(0.01));
    CHECK(ts::variance(b) == doctest::Approx(target[1][1]).epsilon(0.01));
    CHECK(cov == doctest::Approx(target[0][1]).epsilon(0.01));
  }
}

TEST_CASE("jump sizes: moments and cross-firm independence") {
  FirmSpec f1;
  f1.x0 = 2.0;
  f1.jump_mean = -0.20003641;
  f1.jump_sd = 0.50000485;
  FirmSpec f2 = f1;

  SUBCASE("zero sd would be degenerate, tiny sd pins the mean") {
    FirmSpec f = f1;
    f.jump_sd = 1e-300;  // the distribution requires sd > 0
    double out[1];
    RngStream stream(3, 0);
    const FirmSpec firms[1] = {f};
    sample_jump_sizes(std::span<const FirmSpec>(firms, 1), stream, std::span<double>(out, 1));
    CHECK(out[0] == doctest::Approx(f.jump_mean).epsilon(1e-12));
  }

  SUBCASE("sample moments at the fitted jump law") {
    const FirmSpec firms[2] = {f1, f2};
    double out[2];
    RngStream stream(31, 0);
    const std::size_t n = 1000000;
    std::vector<double> za(n), zb(n);
    for (std::size_t i = 0; i < n; ++i) {
      sample_jump_sizes(std::span<const FirmSpec>(firms, 2), stream, std::span<double>(out, 2));
      za[i] = out[0];
      zb[i] = out[1];
    }
    CHECK(ts::mean(za) == doctest::Approx(-0.20003641).epsilon(0.005));
    CHECK(std::sqrt(ts::variance(za)) == doctest::Approx(0.50000485).epsilon(0.005));
    CHECK(std::abs(ts::pearson(za, zb)) < 0.01);
  }
}

TEST_CASE("sum-of-uniforms mixing calibration") {
  SUBCASE("zero target needs no common component") {
    CHECK(SumOfUniforms::calibrate(0.0).mixing() == 0.0);
  }
  SUBCASE("targets outside [0,1) signal") {
    CHECK_THROWS_AS(SumOfUniforms::calibrate(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(SumOfUniforms::calibrate(1.0), std::invalid_argument);
  }
  SUBCASE("pair correlation is monotone in the mixing coefficient") {
    double prev = 0.0;
    for (double a : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
      const double rho = SumOfUniforms::pair_correlation(a);
      CHECK(rho > prev);
      prev = rho;
    }
  }
  SUBCASE("calibration hits the requested correlation") {
    for (double target : {0.1, 0.5, 0.7673104, 0.999}) {
      const auto sou = SumOfUniforms::calibrate(target);
      CHECK(sou.achieved_correlation() == doctest::Approx(target).epsilon(1e-4));
    }
  }
}

TEST_CASE("calibrated pairs reproduce the target correlation empirically") {
  const double target = 0.7673104;
  const auto sou = SumOfUniforms::calibrate(target);
  RngStream stream(71, 0);
  const std::size_t n = 1000000;
  std::vector<double> a(n), b(n);
  double pair[2];
  for (std::size_t i = 0; i < n; ++i) {
    sou.sample(stream, std::span<double>(pair, 2));
    a[i] = pair[0];
    b[i] = pair[1];
  }
  CHECK(ts::pearson(a, b) == doctest::Approx(target).epsilon(0.0066));  // +-0.005 absolute
  CHECK(ts::ks_uniform(a) < ts::ks_critical(0.01, n));
  CHECK(ts::ks_uniform(b) < ts::ks_critical(0.01, n));
}

TEST_CASE("sample_correlated_uniforms contract") {
  SUBCASE("n = 1 yields a plain uniform draw") {
    RngStream stream(5, 1);
    double out[1];
    sample_correlated_uniforms(1, 0.0, stream, std::span<double>(out, 1));
    CHECK(out[0] > 0.0);
    CHECK(out[0] < 1.0);
  }
  SUBCASE("independent target") {
    RngStream stream(6, 2);
    const std::size_t n = 1000000;
    std::vector<double> a(n), b(n);
    const auto sou = SumOfUniforms::calibrate(0.0);
    double pair[2];
    for (std::size_t i = 0; i < n; ++i) {
      sou.sample(stream, std::span<double>(pair, 2));
      a[i] = pair[0];
      b[i] = pair[1];
    }
    CHECK(std::abs(ts::pearson(a, b)) < 0.005);
  }
  SUBCASE("mid-range target with uniform marginals") {
    RngStream stream(7, 3);
    const std::size_t n = 1000000;
    std::vector<double> a(n), b(n);
    const auto sou = SumOfUniforms::calibrate(0.5);
    double pair[2];
    for (std::size_t i = 0; i < n; ++i) {
      sou.sample(stream, std::span<double>(pair, 2));
      a[i] = pair[0];
      b[i] = pair[1];
    }
    CHECK(ts::pearson(a, b) == doctest::Approx(0.5).epsilon(0.04));  // +-0.02 absolute
    CHECK(ts::ks_uniform(a) < ts::ks_critical(0.01, n));
    CHECK(ts::ks_uniform(b) < ts::ks_critical(0.01, n));
  }
}

TEST_CASE("equicorrelated_target degrades mixed targets to the average") {
  std::vector<std::string> warnings;
  const double targets[3] = {0.2, 0.4, 0.6};
  CHECK(equicorrelated_target(std::span<const double>(targets, 3), &warnings) ==
        doctest::Approx(0.4));
  CHECK(warnings.size() == 1);
  warnings.clear();
  const double same[2] = {0.3, 0.3};
  CHECK(equicorrelated_target(std::span<const double>(same, 2), &warnings) ==
        doctest::Approx(0.3));
  CHECK(warnings.empty());
}

}  // TEST_SUITE
