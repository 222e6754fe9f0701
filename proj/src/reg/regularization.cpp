#include "priorforge/reg/regularization.hpp"

#include "priorforge/arch/network.hpp"
#include "priorforge/autodiff/ops.hpp"
#include "priorforge/error.hpp"
#include "priorforge/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace priorforge::reg {

void RegConfig::validate() const
{
  if (input_filter) {
    if (input_filter->size < 1 || input_filter->size % 2 == 0) {
      throw ConfigError(fmt::format("input-filter: size must be odd, got {}", input_filter->size));
    }
    if (!(input_filter->sigma_lo > 0.0) || input_filter->sigma_hi < input_filter->sigma_lo) {
      throw ConfigError(fmt::format("input-filter: sigma range [{}, {}] invalid", input_filter->sigma_lo,
                                    input_filter->sigma_hi));
    }
  }
  auto check = [](std::optional<double> const &v, char const *name) {
    if (v && !(*v >= 0.0)) {
      throw ConfigError(fmt::format("{}: lambda must be >= 0, got {}", name, *v));
    }
  };
  check(lipschitz_lambda, "lipschitz");
  check(tv_lambda, "tv");
  check(l2_lambda, "l2");
}

std::string RegConfig::label() const
{
  std::string s;
  auto add = [&s](char const *part) { s += s.empty() ? part : fmt::format("+{}", part); };
  if (input_filter) {
    add("gaussian");
  }
  if (lipschitz_lambda) {
    add("lipschitz");
  }
  if (tv_lambda) {
    add("tv");
  }
  if (l2_lambda) {
    add("l2");
  }
  return s.empty() ? "none" : s;
}

RegConfig RegConfig::from_label(std::string const &label)
{
  RegConfig cfg;
  if (label == "none") {
    return cfg;
  }
  std::size_t start = 0;
  while (start <= label.size()) {
    auto const pos = label.find('+', start);
    auto const part = label.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    if (part == "gaussian") {
      cfg.input_filter = GaussianFilter{3, 0.5, 2.0};
    } else if (part == "lipschitz") {
      cfg.lipschitz_lambda = 1.0;
    } else if (part == "tv") {
      cfg.tv_lambda = 1e-3;
    } else if (part == "l2") {
      cfg.l2_lambda = 1e-5;
    } else {
      throw ConfigError(fmt::format("regularizer: unknown component '{}' (gaussian|lipschitz|tv|l2|none)", part));
    }
    if (pos == std::string::npos) {
      break;
    }
    start = pos + 1;
  }
  return cfg;
}

std::vector<double> gaussian_kernel(int size, double sigma)
{
  if (size < 1 || size % 2 == 0) {
    throw ConfigError(fmt::format("gaussian_kernel: size must be odd, got {}", size));
  }
  if (!(sigma > 0.0)) {
    throw ConfigError(fmt::format("gaussian_kernel: sigma must be positive, got {}", sigma));
  }
  std::vector<double> taps(static_cast<std::size_t>(size));
  int const c = size / 2;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    double const d = i - c;
    taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += taps[static_cast<std::size_t>(i)];
  }
  for (auto &t : taps) {
    t /= total;
  }
  return taps;
}

double sample_sigma(GaussianFilter const &f, std::uint64_t seed)
{
  if (f.sigma_hi == f.sigma_lo) {
    return f.sigma_lo;
  }
  SplitMix64 rng(derive_seed(seed, 0x5167));
  return rng.uniform(f.sigma_lo, f.sigma_hi);
}

BandlimitedInput bandlimit_input(ad::Tensor const &z, RegConfig const &cfg)
{
  if (!cfg.input_filter) {
    throw ConfigError("bandlimit_input: input filter is off");
  }
  double const sigma = sample_sigma(*cfg.input_filter, cfg.seed);
  auto const taps = gaussian_kernel(cfg.input_filter->size, sigma);
  return {ad::fixed_lowpass_conv(z.detach(), taps).detach(), sigma};
}

double matrix_inf_norm(std::span<double const> w, std::int64_t rows, std::int64_t cols)
{
  if (rows <= 0 || cols <= 0 || static_cast<std::int64_t>(w.size()) != rows * cols) {
    throw ShapeError(fmt::format("matrix_inf_norm: {} values do not form a non-empty {}x{} matrix", w.size(), rows, cols));
  }
  double best = 0.0;
  for (std::int64_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) {
      s += std::abs(w[static_cast<std::size_t>(r * cols + c)]);
    }
    best = std::max(best, s);
  }
  return best;
}

namespace {
std::pair<double, std::int64_t> inf_norm_with_row(std::span<double const> w, std::int64_t rows, std::int64_t cols)
{
  double best = -1.0;
  std::int64_t arg = 0;
  for (std::int64_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) {
      s += std::abs(w[static_cast<std::size_t>(r * cols + c)]);
    }
    if (s > best) {
      best = s;
      arg = r;
    }
  }
  return {best, arg};
}
} // namespace

ad::Tensor lipschitz_normalize(ad::Tensor const &weight, ad::Tensor const &k)
{
  if (weight.rank() < 1 || k.numel() != 1) {
    throw ShapeError("lipschitz_normalize: need a weight with at least one axis and a scalar constant");
  }
  std::int64_t const rows = weight.dim(0);
  std::int64_t const cols = rows > 0 ? weight.numel() / rows : 0;
  auto const w = weight.data();
  auto const [norm, row] = inf_norm_with_row(w, rows, cols);
  double const kv = k.item();
  double const bound = ad::softplus_value(kv);
  bool const active = norm > bound;
  double const factor = active ? bound / norm : 1.0;

  std::vector<double> out(w.begin(), w.end());
  if (active) {
    for (auto &v : out) {
      v *= factor;
    }
  }
  return ad::Tensor::make_result(
    weight.shape(), std::move(out), {weight, k},
    [=, row = row, norm = norm](ad::detail::Node &self) {
      auto &pw = *self.parents[0];
      auto &pk = *self.parents[1];
      if (!active) {
        if (pw.requires_grad) {
          for (std::size_t i = 0; i < pw.grad.size(); ++i) {
            pw.grad[i] += self.grad[i];
          }
        }
        return;
      }
      double gw = 0.0; // sum g * W
      for (std::size_t i = 0; i < pw.value.size(); ++i) {
        gw += self.grad[i] * pw.value[i];
      }
      if (pw.requires_grad) {
        for (std::size_t i = 0; i < pw.grad.size(); ++i) {
          pw.grad[i] += factor * self.grad[i];
        }
        double const c = bound / (norm * norm) * gw;
        for (std::int64_t j = 0; j < cols; ++j) {
          auto const i = static_cast<std::size_t>(row * cols + j);
          double const v = pw.value[i];
          double const sgn = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
          pw.grad[i] -= c * sgn;
        }
      }
      if (pk.requires_grad) {
        pk.grad[0] += gw / norm * ad::sigmoid_value(kv);
      }
    });
}

LipschitzState attach_lipschitz(arch::Network &net)
{
  LipschitzState state;
  for (auto *conv : net.conv_layers()) {
    auto const &w = conv->weight.tensor;
    double const n = matrix_inf_norm(w.data(), w.dim(0), w.numel() / w.dim(0));
    // softplus^{-1}(n) = ln(e^n - 1) = n + ln(1 - e^{-n})
    double const k0 = n > 30.0 ? n + std::log1p(-std::exp(-n)) : std::log(std::expm1(std::max(n, 1e-12)));
    ad::Parameter p{conv->name + ".lipschitz_k", ad::Tensor::scalar(k0, true)};
    conv->lipschitz_k = p;
    state.constants.push_back(p);
  }
  return state;
}

ad::Tensor lipschitz_penalty(LipschitzState const &state, double lambda)
{
  if (!(lambda >= 0.0)) {
    throw ConfigError(fmt::format("lipschitz: lambda must be >= 0, got {}", lambda));
  }
  ad::Tensor total = ad::Tensor::scalar(0.0);
  for (auto const &k : state.constants) {
    total = ad::add(total, ad::square(ad::softplus(k.tensor)));
  }
  return ad::scale(total, lambda);
}

ad::Tensor tv_penalty(ad::Tensor const &x)
{
  if (x.rank() < 2) {
    throw ShapeError("tv_penalty: need at least two axes");
  }
  std::int64_t const h = x.dim(x.rank() - 2), w = x.dim(x.rank() - 1);
  if (h < 2 || w < 2) {
    throw ShapeError(fmt::format("tv_penalty: spatial extent {}x{} is degenerate", h, w));
  }
  std::int64_t const planes = x.numel() / (h * w);
  auto const v = x.data();
  double total = 0.0;
  for (std::int64_t p = 0; p < planes; ++p) {
    double const *a = v.data() + p * h * w;
    for (std::int64_t i = 0; i < h; ++i) {
      for (std::int64_t j = 0; j < w; ++j) {
        if (i + 1 < h) {
          total += std::abs(a[(i + 1) * w + j] - a[i * w + j]);
        }
        if (j + 1 < w) {
          total += std::abs(a[i * w + j + 1] - a[i * w + j]);
        }
      }
    }
  }
  return ad::Tensor::make_result({}, {total}, {x}, [=](ad::detail::Node &self) {
    auto &px = *self.parents[0];
    double const g = self.grad[0];
    auto sgn = [](double d) { return d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0); };
    for (std::int64_t p = 0; p < planes; ++p) {
      double const *a = px.value.data() + p * h * w;
      double *ga = px.grad.data() + p * h * w;
      for (std::int64_t i = 0; i < h; ++i) {
        for (std::int64_t j = 0; j < w; ++j) {
          if (i + 1 < h) {
            double const s = g * sgn(a[(i + 1) * w + j] - a[i * w + j]);
            ga[(i + 1) * w + j] += s;
            ga[i * w + j] -= s;
          }
          if (j + 1 < w) {
            double const s = g * sgn(a[i * w + j + 1] - a[i * w + j]);
            ga[i * w + j + 1] += s;
            ga[i * w + j] -= s;
          }
        }
      }
    }
  });
}

ad::Tensor l2_penalty(std::vector<ad::Parameter> const &params, double lambda)
{
  if (!(lambda >= 0.0)) {
    throw ConfigError(fmt::format("l2: lambda must be >= 0, got {}", lambda));
  }
  ad::Tensor total = ad::Tensor::scalar(0.0);
  for (auto const &p : params) {
    total = ad::add(total, ad::sum_squares(p.tensor));
  }
  return ad::scale(total, lambda);
}

} // namespace priorforge::reg
