#include "priorforge/recon/selfval.hpp"

#include "priorforge/data/sampling.hpp"
#include "priorforge/error.hpp"
#include "priorforge/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace priorforge::recon {

ValidationSplit split_self_validation(mri::SamplingMask const &mask, double fraction, std::uint64_t seed)
{
  if (!mask.column_structured()) {
    throw ConfigError("self-validation: mask must be column structured");
  }
  if (!(fraction >= 0.0) || fraction >= 0.5) {
    throw ConfigError(fmt::format("self-validation: holdout fraction must be in [0, 0.5), got {}", fraction));
  }
  auto const cols = mask.columns();
  std::vector<bool> val(cols.size(), false);
  if (fraction > 0.0) {
    auto const lines = mask.acquired_lines();
    auto const want = static_cast<mri::Index>(std::ceil(fraction * static_cast<double>(lines) - 1e-12));
    auto const [cb, ce] = data::detect_center_block(mask);
    std::vector<mri::Index> outer;
    for (mri::Index c = 0; c < mask.cols; ++c) {
      if (cols[static_cast<std::size_t>(c)] && (c < cb || c >= ce)) {
        outer.push_back(c);
      }
    }
    if (want < 1 || want > static_cast<mri::Index>(outer.size())) {
      throw ConfigError(fmt::format("self-validation: cannot hold out {} of {} outer lines (fraction {})", want,
                                    outer.size(), fraction));
    }
    // Partial Fisher-Yates: the first `want` slots become the validation set.
    SplitMix64 rng(seed);
    for (mri::Index i = 0; i < want; ++i) {
      auto const j = i + static_cast<mri::Index>(rng.below(static_cast<std::uint64_t>(outer.size()) - i));
      std::swap(outer[static_cast<std::size_t>(i)], outer[static_cast<std::size_t>(j)]);
      val[static_cast<std::size_t>(outer[static_cast<std::size_t>(i)])] = true;
    }
  }
  std::vector<bool> train(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    train[c] = cols[c] && !val[c];
  }
  return {mri::SamplingMask::from_columns(mask.rows, train), mri::SamplingMask::from_columns(mask.rows, val)};
}

EarlyStopper::EarlyStopper(int window)
  : window_(window)
{
  if (window < 1) {
    throw ConfigError(fmt::format("self-validation: window must be >= 1, got {}", window));
  }
}

EarlyStopper::Decision EarlyStopper::push(int iter, double value)
{
  values_.push_back(value);
  if (static_cast<int>(values_.size()) < window_) {
    return {};
  }
  double const mean =
    std::accumulate(values_.end() - window_, values_.end(), 0.0) / static_cast<double>(window_);
  means_.push_back(mean);
  Decision d;
  if (!best_iter_ || mean < best_mean_) {
    best_mean_ = mean;
    best_iter_ = iter;
    since_best_ = 0;
    d.new_best = true;
  } else if (++since_best_ >= window_) {
    d.stop = true;
  }
  return d;
}

} // namespace priorforge::recon
