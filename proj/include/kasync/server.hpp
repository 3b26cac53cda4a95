#pragma once

#include <vector>

#include "kasync/vec.hpp"

namespace kasync {

struct GradientReport;

/// What a server step tells the metrics layer about itself.
struct StepResult {
  double eta = 0.0;
  int stage = 1;
  /// Per-report aggregation weight. Sums to 1 unless weights_fallback is set.
  std::vector<double> weights;
  bool weights_fallback = false;
};

/// Common surface of all aggregation algorithms; the simulator run loop is
/// variant-agnostic.
class ServerAlgorithm {
public:
  virtual ~ServerAlgorithm() = default;
  virtual const ParamVector& params() const = 0;
  virtual StepResult step(const std::vector<GradientReport>& reports) = 0;
};

}  // namespace kasync
