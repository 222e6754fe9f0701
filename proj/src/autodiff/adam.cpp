#include "priorforge/autodiff/adam.hpp"

#include "priorforge/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace priorforge::ad {

Adam::Adam(std::vector<Parameter> params, AdamOptions opts)
  : params_(std::move(params))
  , opts_(opts)
{
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (auto const &p : params_) {
    m_.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0);
    v_.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0);
  }
}

void Adam::step()
{
  for (auto const &p : params_) {
    if (!p.tensor.has_grad()) {
      throw Error(fmt::format("adam: parameter '{}' has no gradient", p.name));
    }
  }
  ++t_;
  double const c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  double const c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor t = params_[k].tensor;
    auto theta = t.data();
    auto g = t.grad();
    auto &m = m_[k];
    auto &v = v_[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g[i];
      v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g[i] * g[i];
      double const mhat = m[i] / c1;
      double const vhat = v[i] / c2;
      theta[i] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.eps);
    }
    t.zero_grad();
  }
}

} // namespace priorforge::ad
