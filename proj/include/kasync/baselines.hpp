#pragma once

#include <set>

#include "kasync/simulator.hpp"

namespace kasync {

/// Uniform 1/K gradient average at a fixed learning rate.
class KavgServer : public ServerAlgorithm {
public:
  KavgServer(double eta, ParamVector initial_params);
  const ParamVector& params() const override { return params_; }
  StepResult step(const std::vector<GradientReport>& reports) override;

private:
  double eta_;
  ParamVector params_;
  long iteration_ = 0;
};

/// Temporally weighted aggregation: per-gradient coefficient
/// (m_i/m) * (e/2)^(-gap_i), applied without normalization.
class TwaflServer : public ServerAlgorithm {
public:
  TwaflServer(double eta, ParamVector initial_params);
  const ParamVector& params() const override { return params_; }
  StepResult step(const std::vector<GradientReport>& reports) override;

private:
  double eta_;
  ParamVector params_;
  long iteration_ = 0;
};

/// Staleness-divided per-gradient learning rates eta0 / (gap_i + 1), averaged
/// over the K gradients. The +1 keeps the freshest gradient at eta0 and avoids
/// the division by zero a raw zero gap would cause.
class SasgdServer : public ServerAlgorithm {
public:
  SasgdServer(double eta0, ParamVector initial_params);
  const ParamVector& params() const override { return params_; }
  StepResult step(const std::vector<GradientReport>& reports) override;

private:
  double eta0_;
  ParamVector params_;
  long iteration_ = 0;
};

/// Round-scheduled global momentum: each client contributes at most one
/// gradient per round; reports from clients already used this round are
/// discarded. A round ends once all clients have contributed.
class GsgmServer : public ServerAlgorithm {
public:
  GsgmServer(double eta, double momentum, int total_clients, ParamVector initial_params);
  const ParamVector& params() const override { return params_; }
  StepResult step(const std::vector<GradientReport>& reports) override;

  std::size_t round_used_count() const { return used_.size(); }

private:
  double eta_;
  double momentum_coef_;
  int total_clients_;
  ParamVector params_;
  ParamVector momentum_;
  std::set<int> used_;
  long iteration_ = 0;
};

/// Momentum plus staleness-exponential weighting with no selection: the plain
/// combination of the two mitigation strategies, with a tunable weight
/// sharpness (sharpness = 1 - ln 2 reproduces the (e/2)^(-gap) weights).
class ExpMomServer : public ServerAlgorithm {
public:
  ExpMomServer(double eta0, double alpha, double sharpness, ParamVector initial_params);
  const ParamVector& params() const override { return params_; }
  StepResult step(const std::vector<GradientReport>& reports) override;

private:
  double eta0_;
  double alpha_;
  double sharpness_;
  ParamVector params_;
  ParamVector g_bar_prev_;
  long iteration_ = 0;
};

}  // namespace kasync
