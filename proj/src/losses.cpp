#include "losses.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace cft {

static constexpr double kProbEps = 1e-12;

void ASLParams::validate() const {
  if (!(gamma_pos >= 0.0) || !(gamma_neg >= 0.0))
    fail(Errc::Param, "focusing exponents must be nonnegative");
  if (!(margin >= 0.0 && margin < 1.0)) fail(Errc::Param, "margin must lie in [0, 1)");
}

static double clamp_p(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

static void check_target(double t) {
  if (!(t >= 0.0 && t <= 1.0)) fail(Errc::Param, "target must lie in [0, 1]");
}

double asl_loss(double target, double p, const ASLParams& params) {
  check_target(target);
  params.validate();
  p = clamp_p(p);

  double loss = 0.0;
  if (target > 0.0) {
    double lpos = -std::pow(1.0 - p, params.gamma_pos) * std::log(p);
    loss += target * lpos;
  }
  if (target < 1.0) {
    double pm = std::max(p - params.margin, 0.0);
    // pow(0,0) == 1, so gamma_neg = 0 still gives -log(1-pm) here.
    double lneg = -std::pow(pm, params.gamma_neg) * std::log1p(-pm);
    loss += (1.0 - target) * lneg;
  }
  return loss;
}

double asl_grad_logit(double target, double p, const ASLParams& params) {
  check_target(target);
  params.validate();
  p = clamp_p(p);
  const double sig = p * (1.0 - p);  // dp/dlogit

  double grad = 0.0;
  if (target > 0.0) {
    // d/dlogit of -(1-p)^g+ log p  ==  (1-p)^g+ (g+ p log p - (1-p))
    double g = params.gamma_pos;
    grad += target * std::pow(1.0 - p, g) * (g * p * std::log(p) - (1.0 - p));
  }
  if (target < 1.0) {
    double g = params.gamma_neg;
    double pm = p - params.margin;
    double neg;
    if (pm < 0.0) {
      neg = 0.0;  // clipped zone is exactly flat
    } else if (pm == 0.0) {
      // One-sided limit from above: 0 for g > 0, sigma'(x) for g = 0.
      neg = (g == 0.0) ? sig : 0.0;
    } else {
      neg = sig * (std::pow(pm, g) / (1.0 - pm) - g * std::pow(pm, g - 1.0) * std::log1p(-pm));
    }
    grad += (1.0 - target) * neg;
  }
  return grad;
}

}  // namespace cft
