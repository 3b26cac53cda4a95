#include "kasync/model.hpp"

#include <algorithm>
#include <cmath>

#include "kasync/errors.hpp"

namespace kasync {

namespace {

void check_finite(const double* v, std::size_t n, const char* where) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(v[i]))
      throw NumericError(std::string("model: non-finite value in ") + where);
}

// log-softmax cross-entropy of one score row; appends softmax probs to `probs`.
double sample_ce(const std::vector<double>& scores, int label, std::vector<double>& probs) {
  const double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  const double lse = m + std::log(sum);
  probs.resize(scores.size());
  for (std::size_t c = 0; c < scores.size(); ++c) probs[c] = std::exp(scores[c] - lse);
  return lse - scores[static_cast<std::size_t>(label)];
}

}  // namespace

const char* to_string(ModelKind kind) {
  return kind == ModelKind::logistic ? "logistic" : "mlp";
}

void validate_spec(const ModelSpec& spec) {
  if (spec.input_dim < 1) throw ConfigError("model: input_dim must be positive");
  if (spec.num_classes < 2) throw ConfigError("model: num_classes must be at least 2");
  if (spec.kind == ModelKind::mlp && spec.hidden_dim < 1)
    throw ConfigError("model: hidden_dim must be positive for mlp");
}

std::size_t param_count(const ModelSpec& spec) {
  const auto d = static_cast<std::size_t>(spec.input_dim);
  const auto c = static_cast<std::size_t>(spec.num_classes);
  if (spec.kind == ModelKind::logistic) return c * d + c;
  const auto h = static_cast<std::size_t>(spec.hidden_dim);
  return h * d + h + c * h + c;
}

static void check_dims(const ModelSpec& spec, const ParamVector& params, const MiniBatch& batch) {
  validate_spec(spec);
  if (params.size() != param_count(spec))
    throw ConfigError("model: parameter vector length does not match spec");
  if (batch.dim != spec.input_dim)
    throw ConfigError("model: batch feature dim does not match spec");
  if (batch.size() == 0) throw ConfigError("model: empty mini-batch");
  for (int y : batch.labels)
    if (y < 0 || y >= spec.num_classes)
      throw ConfigError("model: label out of range for spec");
}

LossGrad loss_and_gradient(const ModelSpec& spec, const ParamVector& params, const MiniBatch& batch) {
  check_dims(spec, params, batch);
  const std::size_t n = batch.size();
  const auto d = static_cast<std::size_t>(spec.input_dim);
  const auto c = static_cast<std::size_t>(spec.num_classes);
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGrad out;
  out.grad.assign(params.size(), 0.0);

  if (spec.kind == ModelKind::logistic) {
    const double* w = params.data();          // c x d
    const double* b = params.data() + c * d;  // c
    double* gw = out.grad.data();
    double* gb = out.grad.data() + c * d;
    std::vector<double> scores(c), probs;
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = batch.row(i);
      for (std::size_t k = 0; k < c; ++k) scores[k] = dotn(w + k * d, x, d) + b[k];
      check_finite(scores.data(), c, "output layer");
      out.loss += sample_ce(scores, batch.labels[i], probs) * inv_n;
      for (std::size_t k = 0; k < c; ++k) {
        const double delta = (probs[k] - (static_cast<int>(k) == batch.labels[i] ? 1.0 : 0.0)) * inv_n;
        for (std::size_t j = 0; j < d; ++j) gw[k * d + j] += delta * x[j];
        gb[k] += delta;
      }
    }
  } else {
    const auto h = static_cast<std::size_t>(spec.hidden_dim);
    const double* w1 = params.data();                      // h x d
    const double* b1 = params.data() + h * d;              // h
    const double* w2 = params.data() + h * d + h;          // c x h
    const double* b2 = params.data() + h * d + h + c * h;  // c
    double* gw1 = out.grad.data();
    double* gb1 = out.grad.data() + h * d;
    double* gw2 = out.grad.data() + h * d + h;
    double* gb2 = out.grad.data() + h * d + h + c * h;

    std::vector<double> pre(h), hid(h), scores(c), probs, dhid(h);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = batch.row(i);
      for (std::size_t u = 0; u < h; ++u) {
        pre[u] = dotn(w1 + u * d, x, d) + b1[u];
        hid[u] = pre[u] > 0.0 ? pre[u] : 0.0;  // ReLU
      }
      check_finite(hid.data(), h, "hidden layer");
      for (std::size_t k = 0; k < c; ++k) scores[k] = dotn(w2 + k * h, hid.data(), h) + b2[k];
      check_finite(scores.data(), c, "output layer");
      out.loss += sample_ce(scores, batch.labels[i], probs) * inv_n;

      std::fill(dhid.begin(), dhid.end(), 0.0);
      for (std::size_t k = 0; k < c; ++k) {
        const double delta = (probs[k] - (static_cast<int>(k) == batch.labels[i] ? 1.0 : 0.0)) * inv_n;
        for (std::size_t u = 0; u < h; ++u) {
          gw2[k * h + u] += delta * hid[u];
          dhid[u] += delta * w2[k * h + u];
        }
        gb2[k] += delta;
      }
      for (std::size_t u = 0; u < h; ++u) {
        if (pre[u] <= 0.0) continue;  // ReLU gate (derivative 0 at the kink)
        for (std::size_t j = 0; j < d; ++j) gw1[u * d + j] += dhid[u] * x[j];
        gb1[u] += dhid[u];
      }
    }
  }

  if (!std::isfinite(out.loss)) throw NumericError("model: non-finite value in loss");
  check_finite(out.grad.data(), out.grad.size(), "gradient");
  return out;
}

double batch_loss(const ModelSpec& spec, const ParamVector& params, const MiniBatch& batch) {
  check_dims(spec, params, batch);
  const std::size_t n = batch.size();
  const auto c = static_cast<std::size_t>(spec.num_classes);
  double loss = 0.0;
  std::vector<double> probs, scores(c);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = class_scores(spec, params, batch.row(i));
    check_finite(s.data(), c, "output layer");
    loss += sample_ce(s, batch.labels[i], probs) / static_cast<double>(n);
  }
  if (!std::isfinite(loss)) throw NumericError("model: non-finite value in loss");
  return loss;
}

ParamVector finite_diff_gradient(const std::function<double(const ParamVector&)>& f,
                                 const ParamVector& params, double h) {
  if (h <= 0.0) throw UsageError("finite_diff_gradient: h must be positive");
  ParamVector grad(params.size());
  ParamVector theta = params;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double step = h * std::max(1.0, std::fabs(params[k]));
    theta[k] = params[k] + step;
    const double fp = f(theta);
    theta[k] = params[k] - step;
    const double fm = f(theta);
    theta[k] = params[k];
    grad[k] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

ParamVector finite_diff_gradient(const ModelSpec& spec, const ParamVector& params,
                                 const MiniBatch& batch, double h) {
  return finite_diff_gradient(
      [&](const ParamVector& theta) { return batch_loss(spec, theta, batch); }, params, h);
}

std::vector<double> class_scores(const ModelSpec& spec, const ParamVector& params, const double* x) {
  const auto d = static_cast<std::size_t>(spec.input_dim);
  const auto c = static_cast<std::size_t>(spec.num_classes);
  std::vector<double> scores(c);
  if (spec.kind == ModelKind::logistic) {
    const double* w = params.data();
    const double* b = params.data() + c * d;
    for (std::size_t k = 0; k < c; ++k) scores[k] = dotn(w + k * d, x, d) + b[k];
  } else {
    const auto h = static_cast<std::size_t>(spec.hidden_dim);
    const double* w1 = params.data();
    const double* b1 = params.data() + h * d;
    const double* w2 = params.data() + h * d + h;
    const double* b2 = params.data() + h * d + h + c * h;
    std::vector<double> hid(h);
    for (std::size_t u = 0; u < h; ++u) {
      const double pre = dotn(w1 + u * d, x, d) + b1[u];
      hid[u] = pre > 0.0 ? pre : 0.0;
    }
    for (std::size_t k = 0; k < c; ++k) scores[k] = dotn(w2 + k * h, hid.data(), h) + b2[k];
  }
  return scores;
}

double evaluate_accuracy(const ModelSpec& spec, const ParamVector& params, const LabeledDataset& data) {
  validate_spec(spec);
  if (data.size() == 0) throw UsageError("evaluate_accuracy: empty dataset");
  if (params.size() != param_count(spec))
    throw ConfigError("model: parameter vector length does not match spec");
  if (data.dim != spec.input_dim) throw ConfigError("model: dataset dim does not match spec");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto scores = class_scores(spec, params, data.row(i));
    int best = 0;
    for (int k = 1; k < spec.num_classes; ++k)
      if (scores[static_cast<std::size_t>(k)] > scores[static_cast<std::size_t>(best)]) best = k;
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace kasync
