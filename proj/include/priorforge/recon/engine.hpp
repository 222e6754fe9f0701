#pragma once

#include "priorforge/arch/network.hpp"
#include "priorforge/arch/spec.hpp"
#include "priorforge/autodiff/adam.hpp"
#include "priorforge/error.hpp"
#include "priorforge/mri/images.hpp"
#include "priorforge/reg/regularization.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace priorforge::recon {

struct SelfValConfig
{
  double fraction = 0.05;
  int window = 30;
};

struct ReconConfig
{
  arch::ArchSpec arch;
  reg::RegConfig reg;
  int iterations = 3000;
  double learning_rate = 0.008;
  std::optional<SelfValConfig> self_val;
  /// Master seed; overrides arch.seed and reg.seed.
  std::uint64_t seed = 0;
  int log_every = 10;

  void validate() const;
};

/// Measured data plus an optional complex ground truth used only for
/// diagnostics.
struct ReconData
{
  mri::KSpace kspace;
  mri::CoilSensitivities csm;
  mri::SamplingMask mask;
  std::optional<mri::ComplexImage> reference;

  void validate() const;
};

/// One logged evaluation. `iter` counts completed optimizer updates; image
/// metrics are NaN without a reference.
struct IterationLog
{
  int iter = 0;
  double train_mae = 0.0;
  std::optional<double> val_mae;
  double psnr_full = 0.0;
  double psnr_masked = 0.0;
  double ssim = 0.0;
  double low_band_err = 0.0;
  double high_band_err = 0.0;
  double penalty = 0.0;
};

inline constexpr char const *kLogHeader = "iter,train_mae,val_mae,psnr_full,psnr_masked,ssim,low_band_err,high_band_err";

void write_log_csv(std::ostream &os, std::vector<IterationLog> const &log);

struct ReconResult
{
  mri::ComplexImage final_complex;
  mri::RealImage final_image; ///< |G(z)| after the last update
  mri::ComplexImage best_complex;
  mri::RealImage best_image; ///< restored snapshot with self-validation, else the final image
  int stop_iter = 0;
  std::optional<int> best_iter;
  std::vector<IterationLog> log;
  std::optional<double> sigma;
  double elapsed_seconds = 0.0;
  std::int64_t params = 0;

  /// Metrics against the reference (NaN without one).
  double psnr_final = 0.0;
  double psnr_best = 0.0; ///< best full-image PSNR over the logged iterations
  double ssim_final = 0.0;
  double psnr_masked_final = 0.0;
  double psnr_masked_best_image = 0.0;
  double psnr_best_image = 0.0;
  double penalty_final = 0.0;
};

/// Raised on a non-finite loss; carries the log up to the failure.
class ReconAborted : public NumericError
{
public:
  ReconAborted(std::string const &what, std::vector<IterationLog> log)
    : NumericError(what)
    , log_(std::move(log))
  {
  }
  std::vector<IterationLog> const &log() const { return log_; }

private:
  std::vector<IterationLog> log_;
};

/// x (1, 2, N, N) -> F(S_i x) for every coil as (coils, 2, N, N). The
/// gradient is the adjoint sum_i conj(S_i) F^H g_i.
ad::Tensor sense_forward(ad::Tensor const &x, mri::CoilSensitivities const &csm);

/// (coils, 2, N, N) layouts of measured data and masks.
ad::Tensor kspace_tensor(mri::KSpace const &y);
ad::Tensor mask_tensor(mri::SamplingMask const &mask, std::int64_t coils);

mri::ComplexImage to_complex(ad::Tensor const &x);

/// Everything one optimization needs between steps.
struct TrainState
{
  std::unique_ptr<arch::Network> net;
  std::optional<reg::LipschitzState> lipschitz;
  std::unique_ptr<ad::Adam> optimizer;
  reg::RegConfig reg;
  mri::CoilSensitivities csm;
  ad::Tensor target;
  ad::Tensor train_mask;
  ad::Tensor val_mask; ///< undefined without self-validation
  std::optional<double> sigma;

  /// Network parameters followed by any Lipschitz constants.
  std::vector<ad::Parameter> trainable() const;
};

TrainState make_train_state(ReconConfig const &cfg, ReconData const &data);

struct StepLosses
{
  double data = 0.0;
  double penalty = 0.0;
  std::optional<double> val;
  ad::Tensor output; ///< G(z) before the update
};

/// Forward, masked MAE plus enabled penalties, backward, one Adam update.
StepLosses train_step(TrainState &state);

/// Losses and output for the current parameters without updating.
StepLosses evaluate(TrainState const &state);

ReconResult run_reconstruction(ReconConfig const &cfg, ReconData const &data);

} // namespace priorforge::recon
