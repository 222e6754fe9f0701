#pragma once

#include "priorforge/mri/images.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace priorforge::recon {

struct ValidationSplit
{
  mri::SamplingMask train;
  mri::SamplingMask val;
};

/// Holds out ceil(fraction * acquired lines) columns, drawn without
/// replacement from the acquired columns outside the center block.
/// fraction = 0 gives an empty validation mask.
ValidationSplit split_self_validation(mri::SamplingMask const &mask, double fraction, std::uint64_t seed);

/// Sliding-window early stopping on a validation series. The windowed mean
/// of the last `window` values must strictly undercut its running minimum;
/// `window` consecutive evaluations without that trigger a stop.
class EarlyStopper
{
public:
  explicit EarlyStopper(int window);

  struct Decision
  {
    bool new_best = false;
    bool stop = false;
  };

  Decision push(int iter, double value);

  int window() const { return window_; }
  std::optional<int> best_iter() const { return best_iter_; }
  double best_mean() const { return best_mean_; }
  std::vector<double> const &windowed_means() const { return means_; }

private:
  int window_;
  std::vector<double> values_;
  std::vector<double> means_;
  double best_mean_ = 0.0;
  std::optional<int> best_iter_;
  int since_best_ = 0;
};

} // namespace priorforge::recon
