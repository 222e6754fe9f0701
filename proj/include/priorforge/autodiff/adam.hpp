#pragma once

#include "priorforge/autodiff/tensor.hpp"

#include <vector>

namespace priorforge::ad {

struct AdamOptions
{
  double lr = 0.008;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. Holds shallow handles to the parameters it updates.
class Adam
{
public:
  Adam(std::vector<Parameter> params, AdamOptions opts = {});

  /// Applies one update using the populated gradients, then zeroes them.
  void step();

  std::int64_t steps() const { return t_; }
  AdamOptions const &options() const { return opts_; }
  std::vector<Parameter> const &parameters() const { return params_; }

private:
  std::vector<Parameter> params_;
  AdamOptions opts_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
};

} // namespace priorforge::ad
