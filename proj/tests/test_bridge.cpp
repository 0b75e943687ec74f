#include <doctest.h>

#include <cmath>
#include <random>

#include "fptmc/bridge.hpp"
#include "fptmc/errors.hpp"
#include "support/bridge_oracle.hpp"
#include "support/quadrature.hpp"

using namespace fptmc;
namespace ts = testsupport;

namespace {

IntervalEndpoints endpoints(double x_prev, double x_next, double tau, double sigma,
                            double mu = 0.0) {
  IntervalEndpoints e;
  e.t_prev = 0.0;
  e.t_next = tau;
  e.x_prev = x_prev;
  e.x_next = x_next;
  e.mu = mu;
  e.sigma = sigma;
  return e;
}

// Quadrature of the crossing density over the open interval; the endpoint
// margins are safe because g decays essentially fast at both ends.
double integrate_crossing_density(const IntervalEndpoints& e, double tol = 1e-9) {
  const double eps = 1e-9 * e.tau();
  return ts::integrate([&](double t) { return crossing_density(e, t); }, e.t_prev + eps,
                       e.t_next - eps, tol);
}

struct RandomCase {
  IntervalEndpoints e;
};

RandomCase random_case(std::mt19937_64& rng, bool allow_below = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomCase rc;
  const double tau = 0.3 + 1.7 * u(rng);
  const double sigma = 0.5 + u(rng);
  const double scale = sigma * std::sqrt(tau);
  const double a = (0.1 + 1.9 * u(rng)) * scale;
  double b = allow_below ? (-1.0 + 3.0 * u(rng)) * scale : (0.1 + 1.9 * u(rng)) * scale;
  if (std::abs(b) < 0.05 * scale) b = 0.05 * scale;  // keep away from the removable endpoint
  const double mu = -1.0 + 2.0 * u(rng);
  rc.e = endpoints(a, b, tau, sigma, mu);
  return rc;
}

}  // namespace

TEST_SUITE("bridge") {

TEST_CASE("survival probability closed form") {
  SUBCASE("endpoint below the boundary forces a crossing") {
    CHECK(survival_probability(endpoints(1.0, -0.2, 1.0, 1.0)) == 0.0);
    CHECK(survival_probability(endpoints(1.0, 0.0, 1.0, 1.0)) == 0.0);
  }
  SUBCASE("reference value 1 - exp(-1)") {
    CHECK(survival_probability(endpoints(1.0, 0.5, 1.0, 1.0)) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  }
  SUBCASE("far above the boundary survival approaches 1") {
    const double far = 10.0;  // endpoints 10 sigma sqrt(tau) above
    CHECK(survival_probability(endpoints(far, far, 1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(1.0 - survival_probability(endpoints(far, far, 1.0, 1.0)) < 1e-10);
  }
  SUBCASE("entering at or below the boundary signals") {
    CHECK_THROWS_AS(survival_probability(endpoints(0.0, 0.5, 1.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(survival_probability(endpoints(-0.1, 0.5, 1.0, 1.0)), std::invalid_argument);
  }
  SUBCASE("degenerate interval or sigma signals") {
    auto e = endpoints(1.0, 0.5, 1.0, 1.0);
    e.t_next = e.t_prev;
    CHECK_THROWS_AS(survival_probability(e), std::invalid_argument);
    auto e2 = endpoints(1.0, 0.5, 1.0, 0.0);
    CHECK_THROWS_AS(survival_probability(e2), std::invalid_argument);
  }
}

TEST_CASE("survival probability is monotone in both endpoints") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const double tau = u(rng), sigma = u(rng);
    const double a = u(rng), b = u(rng), bump = 0.25 * u(rng);
    const double base = survival_probability(endpoints(a, b, tau, sigma));
    CHECK(survival_probability(endpoints(a + bump, b, tau, sigma)) >= base);
    CHECK(survival_probability(endpoints(a, b + bump, tau, sigma)) >= base);
  }
}

TEST_CASE("crossing density edge behavior") {
  SUBCASE("t outside the open interval signals") {
    const auto e = endpoints(1.0, 0.5, 1.0, 1.0);
    CHECK_THROWS_AS(crossing_density(e, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(crossing_density(e, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(crossing_density(e, -0.5), std::invalid_argument);
  }
  SUBCASE("start exactly on the boundary gives zero density") {
    const auto e = endpoints(0.0, 0.5, 1.0, 1.0);
    for (double t : {0.1, 0.5, 0.9}) CHECK(crossing_density(e, t) == 0.0);
  }
  SUBCASE("density is nonnegative on randomized cases") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 200; ++rep) {
      const auto rc = random_case(rng);
      std::uniform_real_distribution<double> ut(1e-6, rc.e.tau() - 1e-6);
      CHECK(crossing_density(rc.e, ut(rng)) >= 0.0);
    }
  }
  SUBCASE("symmetric endpoints give a density symmetric about the midpoint") {
    const auto e = endpoints(0.8, 0.8, 2.0, 1.3);
    const double mid = 1.0;
    for (double d : {0.1, 0.3, 0.7, 0.95}) {
      CHECK(crossing_density(e, mid - d) ==
            doctest::Approx(crossing_density(e, mid + d)).epsilon(1e-9));
    }
  }
}

TEST_CASE("quadrature of the crossing density equals the crossing probability") {
  SUBCASE("reference case integrates to exp(-1)") {
    const auto e = endpoints(1.0, 0.5, 1.0, 1.0);
    CHECK(integrate_crossing_density(e) ==
          doctest::Approx(std::exp(-1.0)).epsilon(2e-6));
  }
  SUBCASE("100 randomized cases within 1e-6 absolute") {
    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 100; ++rep) {
      const auto rc = random_case(rng);
      const double total = integrate_crossing_density(rc.e);
      const double expected = 1.0 - survival_probability(rc.e);
      CHECK(std::abs(total - expected) <= 1e-6);
    }
  }
}

TEST_CASE("survival probability matches the brute-force pinned bridge" *
          doctest::timeout(600)) {
  // Reduced-scale version of the full oracle run (the acceptance suite runs
  // the pinned 20-case/1e5-path configuration).
  std::mt19937_64 rng(5150);
  for (int rep = 0; rep < 5; ++rep) {
    const auto rc = random_case(rng, /*allow_below=*/false);
    const auto res = ts::pinned_bridge_survival(rc.e.x_prev, rc.e.x_next, rc.e.tau(),
                                                rc.e.sigma, 1e-3, 20000, 900 + rep);
    const double p = survival_probability(rc.e);
    const double gap = std::abs(res.p_survive - p);
    CHECK(gap <= 3.0 * std::max(res.std_error, 1e-6));
  }
}

TEST_CASE("first jump default index") {
  SUBCASE("all values above the boundary") {
    const double pre[3] = {1.0, 0.8, 0.6}, post[3] = {0.9, 0.7, 0.5}, b[3] = {0, 0, 0};
    CHECK(!first_jump_default_index(std::span<const double>(pre, 3),
                                    std::span<const double>(post, 3),
                                    std::span<const double>(b, 3)));
  }
  SUBCASE("post-jump value below the boundary at the second jump") {
    const double pre[3] = {1.0, 0.8, 0.6}, post[3] = {0.9, -0.1, 0.5}, b[3] = {0, 0, 0};
    const auto idx = first_jump_default_index(std::span<const double>(pre, 3),
                                              std::span<const double>(post, 3),
                                              std::span<const double>(b, 3));
    REQUIRE(idx.has_value());
    CHECK(*idx == 2);
  }
  SUBCASE("pre-jump crossing belongs to the diffusion case, not this index") {
    const double pre[2] = {-0.2, 0.8}, post[2] = {-0.5, 0.7}, b[2] = {0, 0};
    CHECK(!first_jump_default_index(std::span<const double>(pre, 2),
                                    std::span<const double>(post, 2),
                                    std::span<const double>(b, 2)));
  }
  SUBCASE("nonzero boundary levels") {
    const double pre[2] = {1.0, 1.0}, post[2] = {0.6, 0.4}, b[2] = {0.5, 0.5};
    const auto idx = first_jump_default_index(std::span<const double>(pre, 2),
                                              std::span<const double>(post, 2),
                                              std::span<const double>(b, 2));
    REQUIRE(idx.has_value());
    CHECK(*idx == 2);
  }
}

}  // TEST_SUITE
