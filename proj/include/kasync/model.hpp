#pragma once

#include <functional>
#include <string>

#include "kasync/dataset.hpp"
#include "kasync/vec.hpp"

namespace kasync {

enum class ModelKind { logistic, mlp };

/// Small differentiable classifier. Parameter layout is fixed:
///   logistic: W (classes x input_dim, row-major), then bias (classes)
///   mlp:      W1 (hidden x input_dim), b1 (hidden), W2 (classes x hidden), b2 (classes)
struct ModelSpec {
  ModelKind kind = ModelKind::logistic;
  int input_dim = 0;
  int num_classes = 0;
  int hidden_dim = 0;  // mlp only
};

std::size_t param_count(const ModelSpec& spec);
void validate_spec(const ModelSpec& spec);

const char* to_string(ModelKind kind);

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

/// Mean cross-entropy over the batch and its exact analytic gradient.
/// Throws ConfigError on dimension mismatch, NumericError (naming the layer)
/// if a non-finite value appears.
LossGrad loss_and_gradient(const ModelSpec& spec, const ParamVector& params, const MiniBatch& batch);

/// Loss alone; same checks as loss_and_gradient.
double batch_loss(const ModelSpec& spec, const ParamVector& params, const MiniBatch& batch);

/// Central finite differences of an arbitrary scalar function of the
/// parameters. The step for coordinate k is h * max(1, |params[k]|).
ParamVector finite_diff_gradient(const std::function<double(const ParamVector&)>& f,
                                 const ParamVector& params, double h);

/// Finite-difference gradient of the batch loss (the gradient oracle).
ParamVector finite_diff_gradient(const ModelSpec& spec, const ParamVector& params,
                                 const MiniBatch& batch, double h);

/// Class scores (pre-softmax) for a single feature row of length spec.input_dim.
std::vector<double> class_scores(const ModelSpec& spec, const ParamVector& params, const double* x);

/// Fraction of samples whose argmax score equals the label; score ties go to
/// the lowest class index. Throws UsageError on an empty dataset.
double evaluate_accuracy(const ModelSpec& spec, const ParamVector& params, const LabeledDataset& data);

}  // namespace kasync
