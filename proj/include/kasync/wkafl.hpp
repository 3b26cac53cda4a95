#pragma once

#include <vector>

#include "kasync/simulator.hpp"

namespace kasync {

/// Two-stage weighted aggregation hyperparameters.
struct WkaflParams {
  double eta0 = 0.5;       // initial learning rate
  double alpha = 0.5;      // momentum on the previous gradient estimate
  double beta = 2.0;       // similarity sharpness in the selection weights
  double sim_min = 0.3;    // cosine threshold below which a gradient is dropped
  double gamma = 0.1;      // learning-rate damping per unit of minimal staleness
  double clip_ratio = 4.0;   // B: stage-two norm cap as a multiple of the estimate norm
  double clip_bound = 10.0;  // CB: absolute pre-aggregation norm bound
  double epsilon = 0.0;      // stage switch when the sum of K losses drops to this
  int k = 1;
};

/// Enforces the documented bounds (alpha > 0, gamma in (0,1), ...).
void validate(const WkaflParams& p);

struct ServerState {
  ParamVector params;
  ParamVector g_bar_prev;  // estimated gradient of the previous iteration
  int stage = 1;           // switches 1 -> 2 once, never back
  long iteration = 0;
};

/// g~_i = g_i + alpha * g_bar_prev for each report.
std::vector<ParamVector> apply_momentum(const std::vector<GradientReport>& reports,
                                        const ParamVector& g_bar_prev, double alpha);

/// g * min(1, cb/||g||): direction preserved, zero vector returned unchanged.
ParamVector clip_to_bound(const ParamVector& g, double cb);

/// Staleness-weighted estimate of the globally unbiased gradient with weights
/// proportional to (e/2)^(-gap). Computed in shifted log-space (the minimum
/// gap is subtracted before exponentiating), which is algebraically identical
/// and cannot underflow to an all-zero weight vector.
ParamVector estimate_unbiased(const std::vector<ParamVector>& clipped, const std::vector<long>& gaps);

struct SagradResult {
  ParamVector aggregated;
  std::vector<double> weights;  // exact 0 for dropped gradients
  bool fallback = false;        // no gradient was consistent; aggregated = g_bar
};

/// Cosine-similarity selection and weighting. In stage two, surviving vectors
/// longer than clip_ratio * ||g_bar|| are rescaled to that norm before
/// aggregation. A zero g_bar accepts everything (similarity defined as 1).
SagradResult sagrad(const std::vector<ParamVector>& clipped, const ParamVector& g_bar,
                    const WkaflParams& p, int stage);

/// eta0 / (min_gap * gamma + 1).
double adapt_lr(double eta0, long min_gap, double gamma);

/// Latches to 2 once the summed losses drop to epsilon.
int stage_check(const std::vector<double>& losses, double epsilon, int stage);

class WkaflServer : public ServerAlgorithm {
public:
  WkaflServer(WkaflParams p, ParamVector initial_params);

  const ParamVector& params() const override { return state_.params; }
  StepResult step(const std::vector<GradientReport>& reports) override;

  const ServerState& state() const { return state_; }

private:
  WkaflParams p_;
  ServerState state_;
};

}  // namespace kasync
