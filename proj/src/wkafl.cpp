#include "kasync/wkafl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kasync/errors.hpp"

namespace kasync {

namespace {
// (e/2)^(-tau) = exp(-tau * log(e/2))
const double kStalenessLogBase = 1.0 - std::numbers::ln2;
}  // namespace

void validate(const WkaflParams& p) {
  if (p.eta0 <= 0.0) throw ConfigError("wkafl: eta0 must be positive");
  if (p.alpha <= 0.0) throw ConfigError("wkafl: alpha must be positive");
  if (p.beta <= 0.0) throw ConfigError("wkafl: beta must be positive");
  if (p.sim_min < 0.0 || p.sim_min > 1.0) throw ConfigError("wkafl: sim_min must be in [0,1]");
  if (p.gamma <= 0.0 || p.gamma >= 1.0) throw ConfigError("wkafl: gamma must be in (0,1)");
  if (p.clip_ratio <= 0.0) throw ConfigError("wkafl: clip_ratio must be positive");
  if (p.clip_bound <= 0.0) throw ConfigError("wkafl: clip_bound must be positive");
  if (p.epsilon <= 0.0) throw ConfigError("wkafl: epsilon must be positive");
  if (p.k < 1) throw ConfigError("wkafl: k must be at least 1");
}

std::vector<ParamVector> apply_momentum(const std::vector<GradientReport>& reports,
                                        const ParamVector& g_bar_prev, double alpha) {
  std::vector<ParamVector> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    if (!g_bar_prev.empty() && g_bar_prev.size() != r.gradient.size())
      throw UsageError("apply_momentum: dimension mismatch");
    ParamVector g = r.gradient;
    if (!g_bar_prev.empty()) axpy(alpha, g_bar_prev, g);
    out.push_back(std::move(g));
  }
  return out;
}

ParamVector clip_to_bound(const ParamVector& g, double cb) {
  if (cb <= 0.0) throw UsageError("clip_to_bound: bound must be positive");
  const double n = norm2(g);
  if (n <= cb) return g;  // covers the zero vector: no division
  return scaled(g, cb / n);
}

ParamVector estimate_unbiased(const std::vector<ParamVector>& clipped, const std::vector<long>& gaps) {
  if (clipped.empty() || clipped.size() != gaps.size())
    throw UsageError("estimate_unbiased: need one gap per vector");
  const long min_gap = *std::min_element(gaps.begin(), gaps.end());
  std::vector<double> w(gaps.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    w[i] = std::exp(-static_cast<double>(gaps[i] - min_gap) * kStalenessLogBase);
    sum += w[i];
  }
  ParamVector out(clipped[0].size(), 0.0);
  for (std::size_t i = 0; i < clipped.size(); ++i) axpy(w[i] / sum, clipped[i], out);
  return out;
}

namespace {

double cosine(const ParamVector& a, const ParamVector& b, double nb) {
  const double na = norm2(a);
  if (na == 0.0) return 0.0;  // no direction to compare
  return dot(a, b) / (na * nb);
}

}  // namespace

SagradResult sagrad(const std::vector<ParamVector>& clipped, const ParamVector& g_bar,
                    const WkaflParams& p, int stage) {
  const std::size_t k = clipped.size();
  if (k == 0) throw UsageError("sagrad: no gradients");

  const double gbar_norm = norm2(g_bar);
  std::vector<double> raw(k, 0.0);
  double raw_sum = 0.0;
  std::vector<double> sims(k);
  for (std::size_t i = 0; i < k; ++i) {
    sims[i] = gbar_norm == 0.0 ? 1.0 : cosine(clipped[i], g_bar, gbar_norm);
    if (sims[i] >= p.sim_min) {
      raw[i] = std::exp(p.beta * sims[i]);
      raw_sum += raw[i];
    }
  }

  SagradResult res;
  res.weights.assign(k, 0.0);
  if (raw_sum == 0.0) {
    // Nothing consistent this iteration: fall back to the unbiased estimate.
    res.aggregated = g_bar;
    res.fallback = true;
    return res;
  }

  res.aggregated.assign(clipped[0].size(), 0.0);
  const double cap = p.clip_ratio * gbar_norm;
  for (std::size_t i = 0; i < k; ++i) {
    if (raw[i] == 0.0) continue;
    res.weights[i] = raw[i] / raw_sum;
    const double n = norm2(clipped[i]);
    const double rescale = (stage == 2 && n > cap) ? cap / n : 1.0;
    axpy(res.weights[i] * rescale, clipped[i], res.aggregated);
  }
  return res;
}

double adapt_lr(double eta0, long min_gap, double gamma) {
  if (min_gap < 0) throw UsageError("adapt_lr: staleness gap cannot be negative");
  return eta0 / (static_cast<double>(min_gap) * gamma + 1.0);
}

int stage_check(const std::vector<double>& losses, double epsilon, int stage) {
  if (stage == 2) return 2;  // latched
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum <= epsilon ? 2 : 1;
}

WkaflServer::WkaflServer(WkaflParams p, ParamVector initial_params) : p_(p) {
  state_.params = std::move(initial_params);
  state_.g_bar_prev.assign(state_.params.size(), 0.0);
}

StepResult WkaflServer::step(const std::vector<GradientReport>& reports) {
  if (reports.empty()) throw UsageError("wkafl: step with no reports");

  auto tilde = apply_momentum(reports, state_.g_bar_prev, p_.alpha);

  std::vector<double> losses;
  std::vector<long> gaps;
  losses.reserve(reports.size());
  gaps.reserve(reports.size());
  for (const auto& r : reports) {
    losses.push_back(r.loss);
    gaps.push_back(r.staleness);
  }
  state_.stage = stage_check(losses, p_.epsilon, state_.stage);

  std::vector<ParamVector> clipped;
  clipped.reserve(tilde.size());
  for (auto& g : tilde) clipped.push_back(clip_to_bound(g, p_.clip_bound));

  ParamVector g_bar = estimate_unbiased(clipped, gaps);
  auto sel = sagrad(clipped, g_bar, p_, state_.stage);

  const long min_gap = *std::min_element(gaps.begin(), gaps.end());
  const double eta = adapt_lr(p_.eta0, min_gap, p_.gamma);

  axpy(-eta, sel.aggregated, state_.params);
  if (!all_finite(state_.params))
    throw NumericError("wkafl: non-finite parameter update at iteration " +
                       std::to_string(state_.iteration));

  state_.g_bar_prev = std::move(g_bar);
  ++state_.iteration;

  StepResult res;
  res.eta = eta;
  res.stage = state_.stage;
  res.weights = std::move(sel.weights);
  res.weights_fallback = sel.fallback;
  return res;
}

}  // namespace kasync
