#include "priorforge/recon/engine.hpp"

#include "priorforge/autodiff/ops.hpp"
#include "priorforge/metrics/metrics.hpp"
#include "priorforge/mri/sense.hpp"
#include "priorforge/recon/selfval.hpp"
#include "priorforge/rng.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace priorforge::recon {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void ReconConfig::validate() const
{
  arch.validate();
  reg.validate();
  if (iterations < 1) {
    throw ConfigError(fmt::format("iterations must be >= 1, got {}", iterations));
  }
  if (!(learning_rate > 0.0)) {
    throw ConfigError(fmt::format("learning-rate must be positive, got {}", learning_rate));
  }
  if (log_every < 1) {
    throw ConfigError(fmt::format("log-every must be >= 1, got {}", log_every));
  }
  if (self_val) {
    if (!(self_val->fraction > 0.0) || self_val->fraction >= 0.5) {
      throw ConfigError(fmt::format("self-val: holdout fraction must be in (0, 0.5), got {}", self_val->fraction));
    }
    if (self_val->window < 1) {
      throw ConfigError(fmt::format("self-val: window must be >= 1, got {}", self_val->window));
    }
  }
}

void ReconData::validate() const
{
  csm.validate();
  if (kspace.count() != csm.count()) {
    throw ShapeError(fmt::format("k-space has {} coils but the sensitivity maps have {}", kspace.count(), csm.count()));
  }
  for (auto const &k : kspace.coils) {
    if (k.rows != csm.rows() || k.cols != csm.cols()) {
      throw ShapeError(fmt::format("k-space extent {}x{} does not match maps {}x{}", k.rows, k.cols, csm.rows(),
                                   csm.cols()));
    }
  }
  if (mask.rows != csm.rows() || mask.cols != csm.cols()) {
    throw ShapeError(fmt::format("mask extent {}x{} does not match maps {}x{}", mask.rows, mask.cols, csm.rows(),
                                 csm.cols()));
  }
  if (csm.rows() != csm.cols()) {
    throw ShapeError(fmt::format("reconstruction needs a square grid, got {}x{}", csm.rows(), csm.cols()));
  }
  if (reference && (reference->rows != csm.rows() || reference->cols != csm.cols())) {
    throw ShapeError("reference extent does not match the data");
  }
}

void write_log_csv(std::ostream &os, std::vector<IterationLog> const &log)
{
  auto num = [](double v) { return std::isnan(v) ? std::string{} : fmt::format("{:.9g}", v); };
  os << kLogHeader << '\n';
  for (auto const &r : log) {
    os << r.iter << ',' << num(r.train_mae) << ',' << (r.val_mae ? num(*r.val_mae) : std::string{}) << ','
       << num(r.psnr_full) << ',' << num(r.psnr_masked) << ',' << num(r.ssim) << ',' << num(r.low_band_err) << ','
       << num(r.high_band_err) << '\n';
  }
}

ad::Tensor sense_forward(ad::Tensor const &x, mri::CoilSensitivities const &csm)
{
  csm.validate();
  auto const n = csm.rows(), m = csm.cols();
  if (x.rank() != 4 || x.dim(0) != 1 || x.dim(1) != 2 || x.dim(2) != n || x.dim(3) != m) {
    throw ShapeError(fmt::format("sense_forward: expected (1, 2, {}, {}), got {}", n, m, ad::to_string(x.shape())));
  }
  auto const plane = static_cast<std::size_t>(n * m);
  auto const coils = csm.count();
  auto const xv = x.data();
  std::vector<double> out(static_cast<std::size_t>(coils) * 2 * plane);
  for (mri::Index c = 0; c < coils; ++c) {
    auto const &s = csm.coils[static_cast<std::size_t>(c)];
    mri::ComplexImage img(n, m);
    for (std::size_t p = 0; p < plane; ++p) {
      img.re[p] = s.re[p] * xv[p] - s.im[p] * xv[plane + p];
      img.im[p] = s.re[p] * xv[plane + p] + s.im[p] * xv[p];
    }
    auto const k = mri::dft2_centered(img);
    std::copy(k.re.begin(), k.re.end(), out.begin() + static_cast<std::ptrdiff_t>(2 * c * plane));
    std::copy(k.im.begin(), k.im.end(), out.begin() + static_cast<std::ptrdiff_t>((2 * c + 1) * plane));
  }
  return ad::Tensor::make_result({coils, 2, n, m}, std::move(out), {x}, [csm, n, m, plane](ad::detail::Node &self) {
    auto &px = *self.parents[0];
    for (mri::Index c = 0; c < csm.count(); ++c) {
      mri::ComplexImage g(n, m);
      auto const off = static_cast<std::size_t>(2 * c) * plane;
      std::copy(self.grad.begin() + static_cast<std::ptrdiff_t>(off),
                self.grad.begin() + static_cast<std::ptrdiff_t>(off + plane), g.re.begin());
      std::copy(self.grad.begin() + static_cast<std::ptrdiff_t>(off + plane),
                self.grad.begin() + static_cast<std::ptrdiff_t>(off + 2 * plane), g.im.begin());
      auto const gi = mri::idft2_centered(g);
      auto const &s = csm.coils[static_cast<std::size_t>(c)];
      for (std::size_t p = 0; p < plane; ++p) {
        px.grad[p] += s.re[p] * gi.re[p] + s.im[p] * gi.im[p];
        px.grad[plane + p] += s.re[p] * gi.im[p] - s.im[p] * gi.re[p];
      }
    }
  });
}

ad::Tensor kspace_tensor(mri::KSpace const &y)
{
  if (y.coils.empty()) {
    throw ShapeError("k-space has no coils");
  }
  auto const n = y.coils.front().rows, m = y.coils.front().cols;
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(y.count() * 2 * n * m));
  for (auto const &k : y.coils) {
    v.insert(v.end(), k.re.begin(), k.re.end());
    v.insert(v.end(), k.im.begin(), k.im.end());
  }
  return ad::Tensor::from({y.count(), 2, n, m}, std::move(v));
}

ad::Tensor mask_tensor(mri::SamplingMask const &mask, std::int64_t coils)
{
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(coils * 2 * mask.rows * mask.cols));
  for (std::int64_t i = 0; i < 2 * coils; ++i) {
    for (auto b : mask.values) {
      v.push_back(b ? 1.0 : 0.0);
    }
  }
  return ad::Tensor::from({coils, 2, mask.rows, mask.cols}, std::move(v));
}

mri::ComplexImage to_complex(ad::Tensor const &x)
{
  if (x.rank() != 4 || x.dim(0) != 1 || x.dim(1) != 2) {
    throw ShapeError(fmt::format("expected a (1, 2, H, W) image tensor, got {}", ad::to_string(x.shape())));
  }
  mri::ComplexImage img(x.dim(2), x.dim(3));
  auto const v = x.data();
  auto const plane = static_cast<std::ptrdiff_t>(img.size());
  std::copy(v.begin(), v.begin() + plane, img.re.begin());
  std::copy(v.begin() + plane, v.begin() + 2 * plane, img.im.begin());
  return img;
}

std::vector<ad::Parameter> TrainState::trainable() const
{
  auto p = net->parameters();
  if (lipschitz) {
    p.insert(p.end(), lipschitz->constants.begin(), lipschitz->constants.end());
  }
  return p;
}

TrainState make_train_state(ReconConfig const &cfg, ReconData const &data)
{
  cfg.validate();
  data.validate();
  TrainState st;
  auto arch = cfg.arch;
  arch.seed = cfg.seed;
  arch.size = static_cast<int>(data.csm.rows());
  st.reg = cfg.reg;
  st.reg.seed = cfg.seed;
  st.net = arch::build_network(arch);
  if (st.reg.input_filter) {
    auto b = reg::bandlimit_input(st.net->input(), st.reg);
    st.net->set_input(b.z);
    st.sigma = b.sigma;
  }
  if (st.reg.lipschitz_lambda) {
    st.lipschitz = reg::attach_lipschitz(*st.net);
  }
  st.optimizer = std::make_unique<ad::Adam>(st.trainable(), ad::AdamOptions{.lr = cfg.learning_rate});
  st.csm = data.csm;
  st.target = kspace_tensor(data.kspace);
  auto const coils = data.csm.count();
  if (cfg.self_val) {
    auto const split = split_self_validation(data.mask, cfg.self_val->fraction, derive_seed(cfg.seed, 3));
    st.train_mask = mask_tensor(split.train, coils);
    st.val_mask = mask_tensor(split.val, coils);
  } else {
    st.train_mask = mask_tensor(data.mask, coils);
  }
  return st;
}

namespace {

struct Forward
{
  ad::Tensor loss;
  StepLosses losses;
};

double masked_mae(std::span<double const> a, std::span<double const> b, std::span<double const> m)
{
  double s = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (m[i] != 0.0) {
      s += std::abs(a[i] - b[i]);
      n += 1.0;
    }
  }
  return s / n;
}

Forward compute(TrainState const &st)
{
  Forward f;
  auto const out = st.net->forward();
  auto const pred = sense_forward(out, st.csm);
  auto const data_loss = ad::mae_loss(pred, st.target, st.train_mask);
  ad::Tensor penalty;
  auto add = [&penalty](ad::Tensor t) { penalty = penalty.defined() ? ad::add(penalty, t) : t; };
  if (st.lipschitz) {
    add(reg::lipschitz_penalty(*st.lipschitz, *st.reg.lipschitz_lambda));
  }
  if (st.reg.tv_lambda) {
    add(ad::scale(reg::tv_penalty(out), *st.reg.tv_lambda));
  }
  if (st.reg.l2_lambda) {
    std::vector<ad::Parameter> weights;
    for (auto const *c : st.net->conv_layers()) {
      weights.push_back(c->weight);
    }
    add(reg::l2_penalty(weights, *st.reg.l2_lambda));
  }
  f.loss = penalty.defined() ? ad::add(data_loss, penalty) : data_loss;
  f.losses.data = data_loss.item();
  f.losses.penalty = penalty.defined() ? penalty.item() : 0.0;
  if (st.val_mask.defined()) {
    f.losses.val = masked_mae(pred.data(), st.target.data(), st.val_mask.data());
  }
  f.losses.output = out;
  return f;
}

IterationLog log_row(int iter, StepLosses const &s, ReconData const &data)
{
  IterationLog r;
  r.iter = iter;
  r.train_mae = s.data;
  r.val_mae = s.val;
  r.penalty = s.penalty;
  r.psnr_full = r.psnr_masked = r.ssim = r.low_band_err = r.high_band_err = kNaN;
  if (data.reference) {
    auto const img = to_complex(s.output);
    auto const mag = img.magnitude();
    auto const ref = data.reference->magnitude();
    r.psnr_full = metrics::psnr(mag, ref);
    r.ssim = metrics::ssim(mag, ref);
    if (data.mask.acquired() < data.mask.rows * data.mask.cols) {
      r.psnr_masked = metrics::masked_region_psnr(img, *data.reference, data.mask);
    }
    auto const b = metrics::band_errors(img, *data.reference);
    r.low_band_err = b.low;
    r.high_band_err = b.high;
  }
  return r;
}

std::vector<std::vector<double>> snapshot(std::vector<ad::Parameter> const &params)
{
  std::vector<std::vector<double>> s;
  s.reserve(params.size());
  for (auto const &p : params) {
    auto const d = p.tensor.data();
    s.emplace_back(d.begin(), d.end());
  }
  return s;
}

void restore(std::vector<ad::Parameter> &params, std::vector<std::vector<double>> const &s)
{
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto d = params[i].tensor.data();
    std::copy(s[i].begin(), s[i].end(), d.begin());
  }
}

} // namespace

StepLosses train_step(TrainState &state)
{
  auto f = compute(state);
  if (!std::isfinite(f.loss.item())) {
    throw NumericError(fmt::format("non-finite loss {} at optimizer step {}", f.loss.item(),
                                   state.optimizer->steps() + 1));
  }
  ad::backward(f.loss);
  state.optimizer->step();
  return f.losses;
}

StepLosses evaluate(TrainState const &state) { return compute(state).losses; }

ReconResult run_reconstruction(ReconConfig const &cfg, ReconData const &data)
{
  auto const t0 = std::chrono::steady_clock::now();
  auto st = make_train_state(cfg, data);
  auto params = st.trainable();

  ReconResult res;
  res.sigma = st.sigma;
  res.params = arch::count_params(*st.net);

  std::optional<EarlyStopper> stopper;
  if (cfg.self_val) {
    stopper.emplace(cfg.self_val->window);
  }
  std::vector<std::vector<double>> best;
  StepLosses last;
  for (int t = 0;; ++t) {
    auto f = compute(st);
    if (!std::isfinite(f.loss.item())) {
      throw ReconAborted(fmt::format("non-finite loss at iteration {} (data {}, penalty {})", t, f.losses.data,
                                     f.losses.penalty),
                         res.log);
    }
    bool stop = false;
    if (stopper) {
      auto const d = stopper->push(t, *f.losses.val);
      if (d.new_best) {
        best = snapshot(params);
      }
      stop = d.stop;
    }
    bool const final = t == cfg.iterations || stop;
    if (t % cfg.log_every == 0 || final) {
      res.log.push_back(log_row(t, f.losses, data));
    }
    if (final) {
      res.stop_iter = t;
      last = f.losses;
      break;
    }
    ad::backward(f.loss);
    st.optimizer->step();
  }

  res.final_complex = to_complex(last.output);
  res.final_image = res.final_complex.magnitude();
  res.penalty_final = last.penalty;
  if (stopper && stopper->best_iter()) {
    res.best_iter = stopper->best_iter();
    restore(params, best);
    res.best_complex = to_complex(evaluate(st).output);
  } else {
    res.best_complex = res.final_complex;
  }
  res.best_image = res.best_complex.magnitude();

  res.psnr_final = res.psnr_best = res.ssim_final = kNaN;
  res.psnr_masked_final = res.psnr_masked_best_image = res.psnr_best_image = kNaN;
  if (data.reference) {
    auto const ref = data.reference->magnitude();
    res.psnr_final = metrics::psnr(res.final_image, ref);
    res.ssim_final = metrics::ssim(res.final_image, ref);
    res.psnr_best_image = metrics::psnr(res.best_image, ref);
    res.psnr_best = res.psnr_final;
    for (auto const &r : res.log) {
      res.psnr_best = std::max(res.psnr_best, r.psnr_full);
    }
    if (data.mask.acquired() < data.mask.rows * data.mask.cols) {
      res.psnr_masked_final = metrics::masked_region_psnr(res.final_complex, *data.reference, data.mask);
      res.psnr_masked_best_image = metrics::masked_region_psnr(res.best_complex, *data.reference, data.mask);
    }
  }
  res.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

} // namespace priorforge::recon
