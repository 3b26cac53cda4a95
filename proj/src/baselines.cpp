#include "kasync/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kasync/errors.hpp"

namespace kasync {

namespace {

const double kStalenessLogBase = 1.0 - std::numbers::ln2;  // log(e/2)

void require_reports(const std::vector<GradientReport>& reports) {
  if (reports.empty()) throw UsageError("server step with no reports");
}

void check_params(const ParamVector& params, long iteration, const char* who) {
  if (!all_finite(params))
    throw NumericError(std::string(who) + ": non-finite parameter update at iteration " +
                       std::to_string(iteration));
}

std::vector<double> normalized(std::vector<double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum > 0.0)
    for (double& x : v) x /= sum;
  return v;
}

}  // namespace

KavgServer::KavgServer(double eta, ParamVector initial_params)
    : eta_(eta), params_(std::move(initial_params)) {}

StepResult KavgServer::step(const std::vector<GradientReport>& reports) {
  require_reports(reports);
  const double w = 1.0 / static_cast<double>(reports.size());
  for (const auto& r : reports) axpy(-eta_ * w, r.gradient, params_);
  check_params(params_, iteration_, "kavg");
  ++iteration_;
  StepResult res;
  res.eta = eta_;
  res.weights.assign(reports.size(), w);
  return res;
}

TwaflServer::TwaflServer(double eta, ParamVector initial_params)
    : eta_(eta), params_(std::move(initial_params)) {}

StepResult TwaflServer::step(const std::vector<GradientReport>& reports) {
  require_reports(reports);
  long m = 0;
  for (const auto& r : reports) m += r.batch_size;
  std::vector<double> coef(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    coef[i] = (static_cast<double>(reports[i].batch_size) / static_cast<double>(m)) *
              std::exp(-static_cast<double>(reports[i].staleness) * kStalenessLogBase);
    axpy(-eta_ * coef[i], reports[i].gradient, params_);
  }
  check_params(params_, iteration_, "twafl");
  ++iteration_;
  StepResult res;
  res.eta = eta_;
  // The update itself is unnormalized; the logged weights are the relative
  // contributions so the staleness metrics stay comparable across variants.
  res.weights = normalized(std::move(coef));
  return res;
}

SasgdServer::SasgdServer(double eta0, ParamVector initial_params)
    : eta0_(eta0), params_(std::move(initial_params)) {}

StepResult SasgdServer::step(const std::vector<GradientReport>& reports) {
  require_reports(reports);
  const double inv_k = 1.0 / static_cast<double>(reports.size());
  std::vector<double> coef(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    coef[i] = 1.0 / static_cast<double>(reports[i].staleness + 1);
    axpy(-eta0_ * coef[i] * inv_k, reports[i].gradient, params_);
  }
  check_params(params_, iteration_, "sasgd");
  ++iteration_;
  StepResult res;
  res.eta = eta0_;
  res.weights = normalized(std::move(coef));
  return res;
}

GsgmServer::GsgmServer(double eta, double momentum, int total_clients, ParamVector initial_params)
    : eta_(eta), momentum_coef_(momentum), total_clients_(total_clients),
      params_(std::move(initial_params)) {
  if (total_clients_ < 1) throw ConfigError("gsgm: total_clients must be positive");
  momentum_.assign(params_.size(), 0.0);
}

StepResult GsgmServer::step(const std::vector<GradientReport>& reports) {
  require_reports(reports);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (used_.insert(reports[i].client_id).second) kept.push_back(i);
    // else: this client already contributed this round; report discarded.
  }

  ParamVector mean(params_.size(), 0.0);
  if (!kept.empty()) {
    const double w = 1.0 / static_cast<double>(kept.size());
    for (auto i : kept) axpy(w, reports[i].gradient, mean);
  }

  // update = momentum_coef * momentum + round-mean gradient; accumulated.
  scale_inplace(momentum_, momentum_coef_);
  axpy(1.0, mean, momentum_);
  axpy(-eta_, momentum_, params_);
  check_params(params_, iteration_, "gsgm");
  ++iteration_;

  if (static_cast<int>(used_.size()) == total_clients_) used_.clear();  // round complete

  StepResult res;
  res.eta = eta_;
  res.weights.assign(reports.size(), 0.0);
  if (kept.empty()) {
    res.weights_fallback = true;
  } else {
    const double w = 1.0 / static_cast<double>(kept.size());
    for (auto i : kept) res.weights[i] = w;
  }
  return res;
}

ExpMomServer::ExpMomServer(double eta0, double alpha, double sharpness, ParamVector initial_params)
    : eta0_(eta0), alpha_(alpha), sharpness_(sharpness), params_(std::move(initial_params)) {
  if (sharpness_ < 0.0) throw ConfigError("expmom: sharpness must be non-negative");
  g_bar_prev_.assign(params_.size(), 0.0);
}

StepResult ExpMomServer::step(const std::vector<GradientReport>& reports) {
  require_reports(reports);
  long min_gap = reports[0].staleness;
  for (const auto& r : reports) min_gap = std::min(min_gap, r.staleness);

  std::vector<double> w(reports.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    w[i] = std::exp(-static_cast<double>(reports[i].staleness - min_gap) * sharpness_);
    sum += w[i];
  }
  ParamVector g_bar(params_.size(), 0.0);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    w[i] /= sum;
    axpy(w[i], reports[i].gradient, g_bar);
    axpy(w[i] * alpha_, g_bar_prev_, g_bar);
  }

  axpy(-eta0_, g_bar, params_);
  check_params(params_, iteration_, "expmom");
  ++iteration_;
  g_bar_prev_ = std::move(g_bar);

  StepResult res;
  res.eta = eta0_;
  res.weights = std::move(w);
  return res;
}

}  // namespace kasync
