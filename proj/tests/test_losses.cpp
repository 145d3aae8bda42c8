#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "head.hpp"
#include "helpers.hpp"
#include "losses.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using cft::ASLParams;
using cft::Errc;
using cft_test::thrown_code;

namespace {

constexpr ASLParams kBce{0.0, 0.0, 0.0};

double bce(double t, double p) { return -t * std::log(p) - (1.0 - t) * std::log(1.0 - p); }

}  // namespace

TEST_CASE("loss hand values") {
  CHECK(cft::asl_loss(1.0, 0.5, kBce) == doctest::Approx(-std::log(0.5)).epsilon(1e-15));

  // Inside the margin-clip zone the negative branch is exactly zero.
  ASLParams clipped{0.0, 4.0, 0.3};
  CHECK(cft::asl_loss(0.0, 0.25, clipped) == 0.0);
  CHECK(cft::asl_loss(0.0, 0.3, clipped) == 0.0);

  ASLParams focus{0.0, 4.0, 0.05};
  double want = std::pow(0.25, 4.0) * (-std::log(0.75));
  CHECK(cft::asl_loss(0.0, 0.3, focus) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("degenerate parameters reproduce binary cross-entropy") {
  cft::Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    double t = rng.uniform01();
    double p = 0.001 + 0.998 * rng.uniform01();
    CHECK(cft::asl_loss(t, p, kBce) == doctest::Approx(bce(t, p)).epsilon(1e-12));
  }
}

TEST_CASE("loss is nonnegative and vanishes exactly where expected") {
  cft::Rng rng(2);
  for (int trial = 0; trial < 2000; ++trial) {
    ASLParams params{4.0 * rng.uniform01(), 4.0 * rng.uniform01(), 0.2 * rng.uniform01()};
    double t = rng.uniform01();
    double p = rng.uniform01();
    CHECK(cft::asl_loss(t, p, params) >= 0.0);
  }
  ASLParams m{0.0, 2.0, 0.1};
  CHECK(cft::asl_loss(0.0, 0.05, m) == 0.0);   // p <= m
  CHECK(cft::asl_loss(0.0, 0.15, m) > 0.0);    // p > m
  CHECK(cft::asl_loss(1.0, 1.0, m) == doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("loss is monotone in p on each branch") {
  ASLParams params{2.0, 3.0, 0.1};
  double prev_pos = cft::asl_loss(1.0, 0.01, params);
  double prev_neg = cft::asl_loss(0.0, 0.01, params);
  for (double p = 0.02; p < 1.0; p += 0.01) {
    double lp = cft::asl_loss(1.0, p, params);
    double ln = cft::asl_loss(0.0, p, params);
    CHECK(lp < prev_pos);   // strictly decreasing toward the target
    CHECK(ln >= prev_neg);  // non-decreasing away from it (flat inside margin)
    prev_pos = lp;
    prev_neg = ln;
  }
}

TEST_CASE("gradient hand values") {
  cft::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    double p = 0.01 + 0.98 * rng.uniform01();
    // BCE gradient in the logit is p - t.
    CHECK(cft::asl_grad_logit(1.0, p, kBce) == doctest::Approx(p - 1.0).epsilon(1e-12));
    CHECK(cft::asl_grad_logit(0.0, p, kBce) == doctest::Approx(p).epsilon(1e-12));
  }
  ASLParams m{0.0, 2.0, 0.2};
  CHECK(cft::asl_grad_logit(0.0, 0.1, m) == 0.0);  // flat clip zone
}

TEST_CASE("analytic gradient matches central finite differences") {
  cft::Rng rng(4);
  int checked = 0;
  while (checked < 10000) {
    ASLParams params{4.0 * rng.uniform01(), 4.0 * rng.uniform01(), 0.2 * rng.uniform01()};
    double t = rng.uniform01();
    double logit = rng.uniform(-6.0, 6.0);
    double p = cft::logistic(logit);
    // The negative branch is only piecewise smooth; skip the seam.
    if (std::abs(p - params.margin) < 1e-4) continue;
    double an = cft::asl_grad_logit(t, p, params);
    double fd = oracle::fd_grad_logit(t, logit, params);
    // Relative tolerance with an absolute floor: the FD quotient itself
    // carries ~1e-10 of roundoff, which dominates when the true gradient is
    // tiny (deep saturation).
    double tol = 1e-6 * std::max(std::abs(an), 1e-2);
    CHECK(std::abs(an - fd) <= tol);
    ++checked;
  }
}

TEST_CASE("inputs are validated") {
  CHECK(thrown_code([] { cft::asl_loss(-0.1, 0.5, kBce); }) == Errc::Param);
  CHECK(thrown_code([] { cft::asl_loss(1.1, 0.5, kBce); }) == Errc::Param);
  CHECK(thrown_code([] { cft::asl_grad_logit(2.0, 0.5, kBce); }) == Errc::Param);
  CHECK(thrown_code([] { ASLParams{-1.0, 0.0, 0.0}.validate(); }) == Errc::Param);
  CHECK(thrown_code([] { ASLParams{0.0, -1.0, 0.0}.validate(); }) == Errc::Param);
  CHECK(thrown_code([] { ASLParams{0.0, 0.0, 1.0}.validate(); }) == Errc::Param);

  // Probabilities outside the open interval are clamped, not rejected.
  CHECK(std::isfinite(cft::asl_loss(1.0, 0.0, kBce)));
  CHECK(std::isfinite(cft::asl_loss(0.0, 1.0, kBce)));
}

TEST_CASE("soft targets interpolate the two branches") {
  ASLParams params{1.0, 3.0, 0.05};
  cft::Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    double t = rng.uniform01();
    double p = 0.01 + 0.98 * rng.uniform01();
    double lo = cft::asl_loss(1.0, p, params);
    double hi = cft::asl_loss(0.0, p, params);
    double want = t * lo + (1.0 - t) * hi;
    CHECK(cft::asl_loss(t, p, params) == doctest::Approx(want).epsilon(1e-12));
  }
}
