#pragma once

namespace cft {

// Asymmetric loss hyperparameters. gamma_pos/gamma_neg = 0 and margin = 0
// reduce the loss to plain binary cross-entropy.
struct ASLParams {
  double gamma_pos = 0.0;
  double gamma_neg = 0.0;
  double margin = 0.0;

  void validate() const;
};

// Soft-target asymmetric loss:
//   L = t * Lpos + (1 - t) * Lneg
//   Lpos = -(1-p)^gamma_pos * log(p)
//   Lneg = -(pm)^gamma_neg * log(1-pm),  pm = max(p - margin, 0)
// p is clamped to [1e-12, 1-1e-12] before the logs.
double asl_loss(double target, double p, const ASLParams& params);

// d(asl_loss)/d(logit) with p = logistic(logit). At p = margin the negative
// branch takes the one-sided derivative from above.
double asl_grad_logit(double target, double p, const ASLParams& params);

}  // namespace cft
