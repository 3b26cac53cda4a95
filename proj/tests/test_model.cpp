#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kasync/errors.hpp"
#include "kasync/model.hpp"
#include "test_util.hpp"

using namespace kasync;
using testutil::max_abs_err;
using testutil::max_rel_err;
using testutil::random_batch;
using testutil::random_params;

TEST_CASE("zero parameters give the uniform-softmax loss ln C") {
  Rng rng(11);
  const ModelSpec logistic{ModelKind::logistic, 3, 5, 0};
  const auto batch = random_batch(logistic, 4, rng);
  ParamVector zero(param_count(logistic), 0.0);
  const auto lg = loss_and_gradient(logistic, zero, batch);
  CHECK(lg.loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  const ModelSpec mlp{ModelKind::mlp, 3, 4, 6};
  ParamVector zero_mlp(param_count(mlp), 0.0);
  const auto batch2 = random_batch(mlp, 3, rng);
  CHECK(loss_and_gradient(mlp, zero_mlp, batch2).loss ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(2024);
  double worst_logistic = 0.0, worst_mlp = 0.0;
  for (int trial = 0; trial < 120; ++trial) {
    ModelSpec spec;
    spec.kind = trial % 2 == 0 ? ModelKind::logistic : ModelKind::mlp;
    spec.input_dim = static_cast<int>(rng.uniform_int(2, 8));
    spec.num_classes = static_cast<int>(rng.uniform_int(2, 6));
    spec.hidden_dim = static_cast<int>(rng.uniform_int(2, 8));
    const auto params = random_params(spec, rng);
    const auto batch = random_batch(spec, static_cast<std::size_t>(rng.uniform_int(1, 6)), rng);

    const auto analytic = loss_and_gradient(spec, params, batch).grad;
    const auto fd = finite_diff_gradient(spec, params, batch, 1e-5);
    const double err = max_rel_err(analytic, fd);
    if (spec.kind == ModelKind::logistic)
      worst_logistic = std::max(worst_logistic, err);
    else
      worst_mlp = std::max(worst_mlp, err);
  }
  CHECK(worst_logistic < 1e-5);
  CHECK(worst_mlp < 1e-4);
}

TEST_CASE("duplicating the batch leaves loss and gradient unchanged") {
  Rng rng(7);
  const ModelSpec spec{ModelKind::mlp, 4, 3, 5};
  const auto params = random_params(spec, rng);
  const auto batch = random_batch(spec, 5, rng);

  MiniBatch doubled = batch;
  doubled.features.insert(doubled.features.end(), batch.features.begin(), batch.features.end());
  doubled.labels.insert(doubled.labels.end(), batch.labels.begin(), batch.labels.end());

  const auto a = loss_and_gradient(spec, params, batch);
  const auto b = loss_and_gradient(spec, params, doubled);
  CHECK(std::fabs(a.loss - b.loss) < 1e-12);
  CHECK(max_abs_err(a.grad, b.grad) < 1e-12);
}

TEST_CASE("gradient over a concatenation is the mean of per-batch gradients") {
  Rng rng(8);
  const ModelSpec spec{ModelKind::logistic, 5, 4, 0};
  const auto params = random_params(spec, rng);
  const auto a = random_batch(spec, 6, rng);
  const auto b = random_batch(spec, 6, rng);

  MiniBatch both = a;
  both.features.insert(both.features.end(), b.features.begin(), b.features.end());
  both.labels.insert(both.labels.end(), b.labels.begin(), b.labels.end());

  const auto ga = loss_and_gradient(spec, params, a).grad;
  const auto gb = loss_and_gradient(spec, params, b).grad;
  const auto gboth = loss_and_gradient(spec, params, both).grad;
  ParamVector mean(ga.size());
  for (std::size_t i = 0; i < ga.size(); ++i) mean[i] = 0.5 * (ga[i] + gb[i]);
  CHECK(max_abs_err(gboth, mean) < 1e-12);
}

TEST_CASE("finite differences of an injected quadratic recover the exact derivative") {
  const ParamVector theta{1.0, 2.0};
  const auto grad = finite_diff_gradient(
      [](const ParamVector& p) { return 0.5 * (p[0] * p[0] + p[1] * p[1]); }, theta, 1e-5);
  CHECK(grad[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(grad[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("finite-difference error is second order in the step") {
  Rng rng(19);
  const ModelSpec spec{ModelKind::logistic, 4, 3, 0};
  const auto params = random_params(spec, rng, 1.0);
  const auto batch = random_batch(spec, 8, rng);
  const auto analytic = loss_and_gradient(spec, params, batch).grad;

  const double e1 = max_abs_err(finite_diff_gradient(spec, params, batch, 2e-3), analytic);
  const double e2 = max_abs_err(finite_diff_gradient(spec, params, batch, 1e-3), analytic);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.35));

  // and the spec'd default step keeps the oracle within its own tolerance
  const auto fd = finite_diff_gradient(spec, params, batch, 1e-5);
  CHECK(max_rel_err(analytic, fd) < 1e-5);
}

TEST_CASE("loss is non-negative and finite across random draws") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    ModelSpec spec;
    spec.kind = trial % 2 == 0 ? ModelKind::logistic : ModelKind::mlp;
    spec.input_dim = static_cast<int>(rng.uniform_int(2, 6));
    spec.num_classes = static_cast<int>(rng.uniform_int(2, 5));
    spec.hidden_dim = 4;
    const auto params = random_params(spec, rng);
    const auto batch = random_batch(spec, 3, rng);
    const double loss = loss_and_gradient(spec, params, batch).loss;
    REQUIRE(loss >= 0.0);
    REQUIRE(std::isfinite(loss));
  }
}

TEST_CASE("accuracy ties break toward the lowest class index") {
  const ModelSpec spec{ModelKind::logistic, 3, 10, 0};
  ParamVector zero(param_count(spec), 0.0);
  LabeledDataset data;
  data.dim = 3;
  data.class_count = 10;
  for (int c = 0; c < 10; ++c)
    for (int i = 0; i < 4; ++i) {
      data.features.insert(data.features.end(), {0.1 * c, 0.2 * i, 1.0});
      data.labels.push_back(c);
    }
  // every score is equal, so everything is predicted as class 0
  CHECK(evaluate_accuracy(spec, zero, data) == doctest::Approx(0.1));
}

TEST_CASE("a dataset labeled by the model's own predictions scores 1.0") {
  Rng rng(31);
  const ModelSpec spec{ModelKind::mlp, 4, 3, 5};
  const auto params = random_params(spec, rng, 1.0);
  LabeledDataset data;
  data.dim = 4;
  data.class_count = 3;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.normal();
    data.features.insert(data.features.end(), x.begin(), x.end());
    const auto scores = class_scores(spec, params, x.data());
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (scores[static_cast<std::size_t>(k)] > scores[static_cast<std::size_t>(best)]) best = k;
    data.labels.push_back(best);
  }
  CHECK(evaluate_accuracy(spec, params, data) == 1.0);
}

TEST_CASE("a separating hyperplane classifies a separable set perfectly") {
  // points with margin around the plane x0 + x1 = 0
  LabeledDataset data;
  data.dim = 2;
  data.class_count = 2;
  Rng rng(37);
  int brute_force_positive = 0;
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(-3.0, 3.0);
    const double b = rng.uniform(0.5, 3.0);
    const bool positive = i % 2 == 0;
    const double x0 = a;
    const double x1 = (positive ? b : -b) - a;  // x0 + x1 = ±b
    data.features.insert(data.features.end(), {x0, x1});
    data.labels.push_back(positive ? 1 : 0);
    if (x0 + x1 > 0.0) ++brute_force_positive;
  }
  CHECK(brute_force_positive == 50);  // the construction itself, checked by brute force

  const ModelSpec spec{ModelKind::logistic, 2, 2, 0};
  // class-1 row = (1,1), class-0 row = (-1,-1): argmax is the sign of x0+x1
  ParamVector params{-1.0, -1.0, 1.0, 1.0, 0.0, 0.0};
  CHECK(evaluate_accuracy(spec, params, data) == 1.0);
}

TEST_CASE("dimension and range errors are configuration errors") {
  Rng rng(41);
  const ModelSpec spec{ModelKind::logistic, 3, 4, 0};
  const auto batch = random_batch(spec, 2, rng);
  ParamVector short_params(param_count(spec) - 1, 0.0);
  CHECK_THROWS_AS(loss_and_gradient(spec, short_params, batch), ConfigError);

  ParamVector params(param_count(spec), 0.0);
  auto bad_dim = batch;
  bad_dim.dim = 2;
  CHECK_THROWS_AS(loss_and_gradient(spec, params, bad_dim), ConfigError);

  auto bad_label = batch;
  bad_label.labels[0] = 4;
  CHECK_THROWS_AS(loss_and_gradient(spec, params, bad_label), ConfigError);
}

TEST_CASE("non-finite intermediates raise numeric errors naming the layer") {
  Rng rng(43);
  const ModelSpec logistic{ModelKind::logistic, 3, 4, 0};
  auto batch = random_batch(logistic, 2, rng);
  ParamVector params(param_count(logistic), 0.0);
  params[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(loss_and_gradient(logistic, params, batch),
                       "model: non-finite value in output layer", NumericError);

  const ModelSpec mlp{ModelKind::mlp, 3, 4, 5};
  MiniBatch batch2;  // positive first feature so the infinite weight reaches ReLU
  batch2.dim = 3;
  batch2.features = {1.0, 0.5, 0.5};
  batch2.labels = {0};
  ParamVector params2(param_count(mlp), 0.1);
  params2[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(loss_and_gradient(mlp, params2, batch2),
                       "model: non-finite value in hidden layer", NumericError);
}

TEST_CASE("empty dataset is a usage error") {
  const ModelSpec spec{ModelKind::logistic, 2, 2, 0};
  ParamVector params(param_count(spec), 0.0);
  LabeledDataset empty;
  empty.dim = 2;
  empty.class_count = 2;
  CHECK_THROWS_AS(evaluate_accuracy(spec, params, empty), UsageError);
}
