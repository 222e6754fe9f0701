#include "priorforge/autodiff/ops.hpp"

#include "priorforge/error.hpp"

#include <Eigen/Core>
#include <fmt/format.h>

#include <cmath>

namespace priorforge::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<RowMat const>;
using Index = std::int64_t;

void require_rank(Tensor const &t, std::size_t rank, char const *what)
{
  if (t.rank() != rank) {
    throw ShapeError(fmt::format("{}: expected rank {}, got shape {}", what, rank, to_string(t.shape())));
  }
}

void require_same_shape(Tensor const &a, Tensor const &b, char const *what)
{
  if (a.shape() != b.shape()) {
    throw ShapeError(
      fmt::format("{}: shape mismatch {} vs {}", what, to_string(a.shape()), to_string(b.shape())));
  }
}

struct ConvGeom
{
  Index cin, h, w, kh, kw, stride, ho, wo;
  Padding pad;
  Index k() const { return cin * kh * kw; }
  Index p() const { return ho * wo; }
  bool direct() const
  {
    return kh == 1 && kw == 1 && stride == 1 && pad.top == 0 && pad.left == 0 && ho == h && wo == w;
  }
};

void im2col(double const *in, ConvGeom const &g, double *col)
{
  Index const P = g.p();
  for (Index c = 0; c < g.cin; ++c) {
    double const *plane = in + c * g.h * g.w;
    for (Index ki = 0; ki < g.kh; ++ki) {
      for (Index kj = 0; kj < g.kw; ++kj) {
        double *row = col + ((c * g.kh + ki) * g.kw + kj) * P;
        for (Index oy = 0; oy < g.ho; ++oy) {
          Index const iy = oy * g.stride + ki - g.pad.top;
          double *dst = row + oy * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(dst, dst + g.wo, 0.0);
            continue;
          }
          double const *src = plane + iy * g.w;
          for (Index ox = 0; ox < g.wo; ++ox) {
            Index const ix = ox * g.stride + kj - g.pad.left;
            dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(double const *col, ConvGeom const &g, double *in)
{
  Index const P = g.p();
  for (Index c = 0; c < g.cin; ++c) {
    double *plane = in + c * g.h * g.w;
    for (Index ki = 0; ki < g.kh; ++ki) {
      for (Index kj = 0; kj < g.kw; ++kj) {
        double const *row = col + ((c * g.kh + ki) * g.kw + kj) * P;
        for (Index oy = 0; oy < g.ho; ++oy) {
          Index const iy = oy * g.stride + ki - g.pad.top;
          if (iy < 0 || iy >= g.h) {
            continue;
          }
          double const *src = row + oy * g.wo;
          double *dst = plane + iy * g.w;
          for (Index ox = 0; ox < g.wo; ++ox) {
            Index const ix = ox * g.stride + kj - g.pad.left;
            if (ix >= 0 && ix < g.w) {
              dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }
}

// One separable pass of a cross-correlation along rows (axis=1) or columns
// (axis=0) of each H x W plane. `adjoint` applies the transposed operator.
void filter_axis(double const *src,
                 double *dst,
                 Index planes,
                 Index h,
                 Index w,
                 std::span<double const> taps,
                 int axis,
                 bool adjoint)
{
  Index const n = static_cast<Index>(taps.size());
  Index const before = n / 2;
  Index const len = axis == 1 ? w : h;
  Index const stride = axis == 1 ? 1 : w;
  Index const lines = axis == 1 ? h : w;
  Index const line_step = axis == 1 ? w : 1;
  for (Index p = 0; p < planes; ++p) {
    double const *sp = src + p * h * w;
    double *dp = dst + p * h * w;
    for (Index l = 0; l < lines; ++l) {
      double const *s = sp + l * line_step;
      double *d = dp + l * line_step;
      for (Index x = 0; x < len; ++x) {
        double acc = 0.0;
        for (Index t = 0; t < n; ++t) {
          // forward:  out[x] = sum_t taps[t] in[x + t - before]
          // adjoint:  out[x] = sum_t taps[t] in[x - t + before]
          Index const j = adjoint ? x - t + before : x + t - before;
          if (j >= 0 && j < len) {
            acc += taps[static_cast<std::size_t>(t)] * s[j * stride];
          }
        }
        d[x * stride] = acc;
      }
    }
  }
}

} // namespace

double softplus_value(double x)
{
  // ln(1 + e^x) = max(x, 0) + ln(1 + e^{-|x|})
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid_value(double x)
{
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double const e = std::exp(x);
  return e / (1.0 + e);
}

Tensor conv2d(Tensor const &input, Tensor const &weight, Tensor const &bias, int stride)
{
  require_rank(weight, 4, "conv2d weight");
  return conv2d(input, weight, bias, stride,
                Padding::same(static_cast<int>(weight.dim(2)), static_cast<int>(weight.dim(3))));
}

Tensor conv2d(Tensor const &input, Tensor const &weight, Tensor const &bias, int stride, Padding padding)
{
  require_rank(input, 4, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  Index const B = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  Index const cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  if (weight.dim(1) != cin) {
    throw ShapeError(
      fmt::format("conv2d: input channels {} do not match weight in-channels {}", cin, weight.dim(1)));
  }
  if (kh % 2 == 0 || kw % 2 == 0) {
    throw ShapeError(fmt::format("conv2d: kernel extents must be odd, got {}x{}", kh, kw));
  }
  if (stride != 1 && stride != 2) {
    throw ShapeError(fmt::format("conv2d: stride must be 1 or 2, got {}", stride));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout)) {
    throw ShapeError(fmt::format("conv2d: bias shape {} does not match out-channels {}",
                                 to_string(bias.shape()), cout));
  }
  Index const hp = h + padding.top + padding.bottom, wp = w + padding.left + padding.right;
  if (hp < kh || wp < kw) {
    throw ShapeError(fmt::format("conv2d: padded input {}x{} smaller than kernel {}x{}", hp, wp, kh, kw));
  }
  ConvGeom const g{cin, h, w, kh, kw, stride, (hp - kh) / stride + 1, (wp - kw) / stride + 1, padding};
  Index const K = g.k(), P = g.p();

  std::vector<double> out(static_cast<std::size_t>(B * cout * P));
  std::vector<double> col(g.direct() ? 0 : static_cast<std::size_t>(K * P));
  CMapMat Wm(weight.data().data(), cout, K);
  for (Index b = 0; b < B; ++b) {
    double const *in_b = input.data().data() + b * cin * h * w;
    double const *col_ptr = in_b;
    if (!g.direct()) {
      im2col(in_b, g, col.data());
      col_ptr = col.data();
    }
    MapMat O(out.data() + b * cout * P, cout, P);
    O.noalias() = Wm * CMapMat(col_ptr, K, P);
    if (bias.defined()) {
      O.colwise() += Eigen::Map<Eigen::VectorXd const>(bias.data().data(), cout);
    }
  }

  return Tensor::make_result(
    {B, cout, g.ho, g.wo}, std::move(out), {input, weight, bias.defined() ? bias : Tensor::scalar(0.0)},
    [g, B, cout, has_bias = bias.defined()](detail::Node &self) {
      auto &in = *self.parents[0];
      auto &wt = *self.parents[1];
      Index const K = g.k(), P = g.p();
      std::vector<double> col(g.direct() ? 0 : static_cast<std::size_t>(K * P));
      std::vector<double> dcol(in.requires_grad && !g.direct() ? static_cast<std::size_t>(K * P) : 0);
      for (Index b = 0; b < B; ++b) {
        CMapMat dO(self.grad.data() + b * cout * P, cout, P);
        double const *in_b = in.value.data() + b * g.cin * g.h * g.w;
        if (wt.requires_grad) {
          double const *col_ptr = in_b;
          if (!g.direct()) {
            im2col(in_b, g, col.data());
            col_ptr = col.data();
          }
          MapMat(wt.grad.data(), cout, K).noalias() += dO * CMapMat(col_ptr, K, P).transpose();
        }
        if (in.requires_grad) {
          CMapMat Wm(wt.value.data(), cout, K);
          double *din_b = in.grad.data() + b * g.cin * g.h * g.w;
          if (g.direct()) {
            MapMat(din_b, K, P).noalias() += Wm.transpose() * dO;
          } else {
            MapMat(dcol.data(), K, P).noalias() = Wm.transpose() * dO;
            col2im_add(dcol.data(), g, din_b);
          }
        }
        if (has_bias && self.parents[2]->requires_grad) {
          // Plain loop: Eigen's vectorized reduction peels by address, which
          // would make the sum order depend on allocation alignment.
          double *gb = self.parents[2]->grad.data();
          for (Index o = 0; o < cout; ++o) {
            double s = 0.0;
            for (Index p = 0; p < P; ++p) {
              s += dO(o, p);
            }
            gb[o] += s;
          }
        }
      }
    });
}

Tensor zero_insert_upsample(Tensor const &input, int upx, int upy, double gain)
{
  require_rank(input, 4, "zero_insert_upsample input");
  if (upx < 1 || upy < 1) {
    throw ShapeError(fmt::format("zero_insert_upsample: factors must be >= 1, got upx={} upy={}", upx, upy));
  }
  Index const planes = input.dim(0) * input.dim(1), h = input.dim(2), w = input.dim(3);
  Index const H = h * upy, W = w * upx;
  std::vector<double> out(static_cast<std::size_t>(planes * H * W), 0.0);
  auto const in = input.data();
  for (Index p = 0; p < planes; ++p) {
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        out[(p * H + i * upy) * W + j * upx] = gain * in[(p * h + i) * w + j];
      }
    }
  }
  return Tensor::make_result({input.dim(0), input.dim(1), H, W}, std::move(out), {input},
                             [=](detail::Node &self) {
                               auto &g = self.parents[0]->grad;
                               for (Index p = 0; p < planes; ++p) {
                                 for (Index i = 0; i < h; ++i) {
                                   for (Index j = 0; j < w; ++j) {
                                     g[(p * h + i) * w + j] += gain * self.grad[(p * H + i * upy) * W + j * upx];
                                   }
                                 }
                               }
                             });
}

Tensor fixed_lowpass_conv(Tensor const &input, std::span<double const> taps)
{
  require_rank(input, 4, "fixed_lowpass_conv input");
  if (taps.empty()) {
    throw ShapeError("fixed_lowpass_conv: taps must be non-empty");
  }
  Index const planes = input.dim(0) * input.dim(1), h = input.dim(2), w = input.dim(3);
  std::vector<double> kernel(taps.begin(), taps.end());
  std::vector<double> tmp(input.data().size()), out(input.data().size());
  filter_axis(input.data().data(), tmp.data(), planes, h, w, kernel, 1, false);
  filter_axis(tmp.data(), out.data(), planes, h, w, kernel, 0, false);
  return Tensor::make_result(input.shape(), std::move(out), {input},
                             [=, kernel = std::move(kernel)](detail::Node &self) {
                               std::vector<double> t1(self.grad.size()), t2(self.grad.size());
                               filter_axis(self.grad.data(), t1.data(), planes, h, w, kernel, 0, true);
                               filter_axis(t1.data(), t2.data(), planes, h, w, kernel, 1, true);
                               auto &g = self.parents[0]->grad;
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 g[i] += t2[i];
                               }
                             });
}

Tensor batchnorm2d(Tensor const &input, Tensor const &scale, Tensor const &shift, double eps)
{
  require_rank(input, 4, "batchnorm2d input");
  Index const B = input.dim(0), C = input.dim(1), S = input.dim(2) * input.dim(3);
  if (scale.numel() != C || shift.numel() != C) {
    throw ShapeError(fmt::format("batchnorm2d: input has {} channels but scale/shift have {}/{}", C,
                                 scale.numel(), shift.numel()));
  }
  if (!(eps > 0)) {
    throw ShapeError("batchnorm2d: eps must be positive");
  }
  auto const x = input.data();
  auto const gam = scale.data();
  auto const bet = shift.data();
  double const m = static_cast<double>(B * S);
  std::vector<double> xhat(x.size()), out(x.size()), invstd(static_cast<std::size_t>(C));
  for (Index c = 0; c < C; ++c) {
    double mean = 0.0;
    for (Index b = 0; b < B; ++b) {
      for (Index s = 0; s < S; ++s) {
        mean += x[(b * C + c) * S + s];
      }
    }
    mean /= m;
    double var = 0.0;
    for (Index b = 0; b < B; ++b) {
      for (Index s = 0; s < S; ++s) {
        double const d = x[(b * C + c) * S + s] - mean;
        var += d * d;
      }
    }
    var /= m;
    double const is = 1.0 / std::sqrt(var + eps);
    invstd[c] = is;
    for (Index b = 0; b < B; ++b) {
      for (Index s = 0; s < S; ++s) {
        auto const i = (b * C + c) * S + s;
        xhat[i] = (x[i] - mean) * is;
        out[i] = gam[c] * xhat[i] + bet[c];
      }
    }
  }
  return Tensor::make_result(
    input.shape(), std::move(out), {input, scale, shift},
    [=, xhat = std::move(xhat), invstd = std::move(invstd)](detail::Node &self) {
      auto &in = *self.parents[0];
      auto &sc = *self.parents[1];
      auto &sh = *self.parents[2];
      for (Index c = 0; c < C; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (Index b = 0; b < B; ++b) {
          for (Index s = 0; s < S; ++s) {
            auto const i = (b * C + c) * S + s;
            sum_dy += self.grad[i];
            sum_dy_xhat += self.grad[i] * xhat[i];
          }
        }
        if (sc.requires_grad) {
          sc.grad[c] += sum_dy_xhat;
        }
        if (sh.requires_grad) {
          sh.grad[c] += sum_dy;
        }
        if (in.requires_grad) {
          double const g = sc.value[c];
          double const k = g * invstd[c] / m;
          for (Index b = 0; b < B; ++b) {
            for (Index s = 0; s < S; ++s) {
              auto const i = (b * C + c) * S + s;
              in.grad[i] += k * (m * self.grad[i] - sum_dy - xhat[i] * sum_dy_xhat);
            }
          }
        }
      }
    });
}

namespace {
template <typename F, typename D>
Tensor unary(Tensor const &x, F f, D df)
{
  auto const v = x.data();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = f(v[i]);
  }
  return Tensor::make_result(x.shape(), std::move(out), {x}, [df](detail::Node &self) {
    auto &p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      p.grad[i] += self.grad[i] * df(p.value[i]);
    }
  });
}
} // namespace

Tensor relu(Tensor const &x)
{
  return unary(
    x, [](double v) { return v > 0 ? v : 0.0; }, [](double v) { return v > 0 ? 1.0 : 0.0; });
}

Tensor softplus(Tensor const &x) { return unary(x, softplus_value, sigmoid_value); }

Tensor scale(Tensor const &x, double c)
{
  return unary(
    x, [c](double v) { return c * v; }, [c](double) { return c; });
}

Tensor square(Tensor const &x)
{
  return unary(
    x, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Tensor add(Tensor const &a, Tensor const &b)
{
  require_same_shape(a, b, "add");
  auto const x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] + y[i];
  }
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](detail::Node &self) {
    for (auto &p : self.parents) {
      if (p->requires_grad) {
        for (std::size_t i = 0; i < p->grad.size(); ++i) {
          p->grad[i] += self.grad[i];
        }
      }
    }
  });
}

Tensor sum(Tensor const &x)
{
  double s = 0.0;
  for (double v : x.data()) {
    s += v;
  }
  return Tensor::make_result({}, {s}, {x}, [](detail::Node &self) {
    auto &p = *self.parents[0];
    for (auto &g : p.grad) {
      g += self.grad[0];
    }
  });
}

Tensor sum_squares(Tensor const &x)
{
  double s = 0.0;
  for (double v : x.data()) {
    s += v * v;
  }
  return Tensor::make_result({}, {s}, {x}, [](detail::Node &self) {
    auto &p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      p.grad[i] += 2.0 * p.value[i] * self.grad[0];
    }
  });
}

Tensor concat_channels(Tensor const &a, Tensor const &b)
{
  require_rank(a, 4, "concat_channels a");
  require_rank(b, 4, "concat_channels b");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw ShapeError(fmt::format("concat_channels: batch/spatial mismatch {} vs {}", to_string(a.shape()),
                                 to_string(b.shape())));
  }
  Index const B = a.dim(0), ca = a.dim(1), cb = b.dim(1), S = a.dim(2) * a.dim(3);
  std::vector<double> out(static_cast<std::size_t>(B * (ca + cb) * S));
  for (Index n = 0; n < B; ++n) {
    std::copy_n(a.data().data() + n * ca * S, ca * S, out.data() + n * (ca + cb) * S);
    std::copy_n(b.data().data() + n * cb * S, cb * S, out.data() + n * (ca + cb) * S + ca * S);
  }
  return Tensor::make_result({B, ca + cb, a.dim(2), a.dim(3)}, std::move(out), {a, b},
                             [=](detail::Node &self) {
                               auto &pa = *self.parents[0];
                               auto &pb = *self.parents[1];
                               for (Index n = 0; n < B; ++n) {
                                 double const *g = self.grad.data() + n * (ca + cb) * S;
                                 if (pa.requires_grad) {
                                   for (Index i = 0; i < ca * S; ++i) {
                                     pa.grad[n * ca * S + i] += g[i];
                                   }
                                 }
                                 if (pb.requires_grad) {
                                   for (Index i = 0; i < cb * S; ++i) {
                                     pb.grad[n * cb * S + i] += g[ca * S + i];
                                   }
                                 }
                               }
                             });
}

Tensor slice_channels(Tensor const &x, std::int64_t begin, std::int64_t count)
{
  require_rank(x, 4, "slice_channels input");
  Index const B = x.dim(0), C = x.dim(1), S = x.dim(2) * x.dim(3);
  if (begin < 0 || count < 0 || begin + count > C) {
    throw ShapeError(fmt::format("slice_channels: range [{}, {}) outside {} channels", begin, begin + count, C));
  }
  std::vector<double> out(static_cast<std::size_t>(B * count * S));
  for (Index n = 0; n < B; ++n) {
    std::copy_n(x.data().data() + (n * C + begin) * S, count * S, out.data() + n * count * S);
  }
  return Tensor::make_result({B, count, x.dim(2), x.dim(3)}, std::move(out), {x}, [=](detail::Node &self) {
    auto &p = *self.parents[0];
    for (Index n = 0; n < B; ++n) {
      for (Index i = 0; i < count * S; ++i) {
        p.grad[(n * C + begin) * S + i] += self.grad[n * count * S + i];
      }
    }
  });
}

Tensor mae_loss(Tensor const &pred, Tensor const &target, Tensor const &mask)
{
  require_same_shape(pred, target, "mae_loss");
  if (mask.defined()) {
    require_same_shape(pred, mask, "mae_loss mask");
  }
  auto const p = pred.data(), t = target.data();
  double total = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!mask.defined() || mask.data()[i] != 0.0) {
      total += std::abs(p[i] - t[i]);
      count += 1.0;
    }
  }
  if (count == 0.0) {
    throw ShapeError("mae_loss: mask selects no entries");
  }
  std::vector<double> sel;
  if (mask.defined()) {
    sel.assign(mask.data().begin(), mask.data().end());
  }
  return Tensor::make_result(
    {}, {total / count}, {pred, target}, [count, sel = std::move(sel)](detail::Node &self) {
      auto &pp = *self.parents[0];
      auto &pt = *self.parents[1];
      double const g = self.grad[0] / count;
      for (std::size_t i = 0; i < pp.value.size(); ++i) {
        if (!sel.empty() && sel[i] == 0.0) {
          continue;
        }
        double const d = pp.value[i] - pt.value[i];
        double const s = d > 0 ? g : (d < 0 ? -g : 0.0);
        if (pp.requires_grad) {
          pp.grad[i] += s;
        }
        if (pt.requires_grad) {
          pt.grad[i] -= s;
        }
      }
    });
}

} // namespace priorforge::ad
