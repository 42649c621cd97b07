#include "gaswarm/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace gaswarm::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw ShapeMismatch(std::string(what) + ": " + a.shape_string() + " vs " + b.shape_string());
}

struct ConvGeometry {
  int batch, cin, len, cout, k, pad_left, out_len;
};

ConvGeometry geometry(const Tensor& x, const Tensor& w, Padding pad) {
  require_rank3(x, "conv1d input");
  if (w.rank() != 3) throw ShapeMismatch("conv1d kernel must be (Cout, Cin, K)");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), w.dim(0), w.dim(2), 0, 0};
  if (w.dim(1) != g.cin)
    throw ShapeMismatch("conv1d: input has " + std::to_string(g.cin) + " channels, kernel expects " +
                        std::to_string(w.dim(1)));
  if (g.k < 1) throw ShapeMismatch("conv1d: empty kernel");
  if (pad == Padding::Same) {
    g.pad_left = (g.k - 1) / 2;
    g.out_len = g.len;
  } else {
    g.out_len = g.len - g.k + 1;
    if (g.out_len < 1) throw ShapeMismatch("conv1d: kernel longer than input");
  }
  return g;
}

// col[(c*K + j), t] = x[c, t + j - pad_left], zero outside
RowMat im2col(const double* x, const ConvGeometry& g) {
  RowMat col = RowMat::Zero(static_cast<Eigen::Index>(g.cin) * g.k, g.out_len);
  for (int c = 0; c < g.cin; ++c)
    for (int j = 0; j < g.k; ++j) {
      double* row = col.data() + (static_cast<std::size_t>(c) * g.k + j) * g.out_len;
      for (int t = 0; t < g.out_len; ++t) {
        const int s = t + j - g.pad_left;
        if (s >= 0 && s < g.len) row[t] = x[static_cast<std::size_t>(c) * g.len + s];
      }
    }
  return col;
}

void col2im_add(const RowMat& col, const ConvGeometry& g, double* dx) {
  for (int c = 0; c < g.cin; ++c)
    for (int j = 0; j < g.k; ++j) {
      const double* row = col.data() + (static_cast<std::size_t>(c) * g.k + j) * g.out_len;
      for (int t = 0; t < g.out_len; ++t) {
        const int s = t + j - g.pad_left;
        if (s >= 0 && s < g.len) dx[static_cast<std::size_t>(c) * g.len + s] += row[t];
      }
    }
}

// interleave so that channel c of stream s lands at 2c + s
Tensor interleave(const Tensor& a, const Tensor& b) {
  const int n = a.dim(0), c = a.dim(1), t = a.dim(2);
  Tensor out({n, 2 * c, t});
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch)
      for (int s = 0; s < t; ++s) {
        out.at(i, 2 * ch, s) = a.at(i, ch, s);
        out.at(i, 2 * ch + 1, s) = b.at(i, ch, s);
      }
  return out;
}

Tensor merge_kernel_as_conv(const Tensor& w) {
  if (w.rank() != 4 || w.dim(2) != 2) throw ShapeMismatch("merge kernel must be (Cout, C, 2, K)");
  return Tensor({w.dim(0), 2 * w.dim(1), w.dim(3)}, w.data());
}

}  // namespace

double relu(double x) { return x > 0.0 ? x : 0.0; }

double softplus(double x, double beta) {
  const double z = beta * x;
  // log(1 + e^z) = max(z, 0) + log1p(e^{-|z|})
  return (std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)))) / beta;
}

std::vector<double> softmax(const std::vector<double>& x, double temperature) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  double top = temperature * x[0];
  for (double v : x) top = std::max(top, temperature * v);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += y[i] = std::exp(temperature * x[i] - top);
  for (double& v : y) v /= sum;
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = relu(v);
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  require_same_shape(x, dy, "relu backward");
  Tensor dx = dy;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] > 0.0)) dx[i] = 0.0;
  return dx;
}

Tensor softplus(const Tensor& x, double beta) {
  Tensor y = x;
  for (double& v : y.data()) v = softplus(v, beta);
  return y;
}

Tensor softplus_backward(const Tensor& x, const Tensor& dy, double beta) {
  require_same_shape(x, dy, "softplus backward");
  Tensor dx = dy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = beta * x[i];
    const double sigma = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    dx[i] *= sigma;
  }
  return dx;
}

Tensor softmax_channels(const Tensor& x, double temperature) {
  require_rank3(x, "softmax");
  Tensor y(x.shape());
  std::vector<double> col(x.dim(1));
  for (int b = 0; b < x.dim(0); ++b)
    for (int t = 0; t < x.dim(2); ++t) {
      for (int c = 0; c < x.dim(1); ++c) col[c] = x.at(b, c, t);
      const std::vector<double> s = softmax(col, temperature);
      for (int c = 0; c < x.dim(1); ++c) y.at(b, c, t) = s[c];
    }
  return y;
}

Tensor softmax_channels_backward(const Tensor& y, const Tensor& dy, double temperature) {
  require_same_shape(y, dy, "softmax backward");
  Tensor dx(y.shape());
  for (int b = 0; b < y.dim(0); ++b)
    for (int t = 0; t < y.dim(2); ++t) {
      double dot = 0.0;
      for (int c = 0; c < y.dim(1); ++c) dot += y.at(b, c, t) * dy.at(b, c, t);
      for (int c = 0; c < y.dim(1); ++c)
        dx.at(b, c, t) = temperature * y.at(b, c, t) * (dy.at(b, c, t) - dot);
    }
  return dx;
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, Padding pad) {
  const ConvGeometry g = geometry(x, w, pad);
  if (b.size() != static_cast<std::size_t>(g.cout)) throw ShapeMismatch("conv1d bias length");
  Tensor y({g.batch, g.cout, g.out_len});
  CMapMat wm(w.ptr(), g.cout, static_cast<Eigen::Index>(g.cin) * g.k);
  Eigen::Map<const Eigen::VectorXd> bias(b.ptr(), g.cout);
  for (int n = 0; n < g.batch; ++n) {
    const RowMat col = im2col(x.ptr() + static_cast<std::size_t>(n) * g.cin * g.len, g);
    MapMat out(y.ptr() + static_cast<std::size_t>(n) * g.cout * g.out_len, g.cout, g.out_len);
    out.noalias() = wm * col;
    out.colwise() += bias;
  }
  return y;
}

Tensor conv1d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Padding pad,
                       Tensor& dw, Tensor& db) {
  const ConvGeometry g = geometry(x, w, pad);
  if (dy.shape() != std::vector<int>{g.batch, g.cout, g.out_len})
    throw ShapeMismatch("conv1d backward: output gradient " + dy.shape_string());
  require_same_shape(w, dw, "conv1d kernel gradient");
  Tensor dx(x.shape());
  CMapMat wm(w.ptr(), g.cout, static_cast<Eigen::Index>(g.cin) * g.k);
  MapMat dwm(dw.ptr(), g.cout, static_cast<Eigen::Index>(g.cin) * g.k);
  Eigen::Map<Eigen::VectorXd> dbv(db.ptr(), g.cout);
  for (int n = 0; n < g.batch; ++n) {
    const RowMat col = im2col(x.ptr() + static_cast<std::size_t>(n) * g.cin * g.len, g);
    CMapMat d(dy.ptr() + static_cast<std::size_t>(n) * g.cout * g.out_len, g.cout, g.out_len);
    dwm.noalias() += d * col.transpose();
    dbv += d.rowwise().sum();
    const RowMat dcol = wm.transpose() * d;
    col2im_add(dcol, g, dx.ptr() + static_cast<std::size_t>(n) * g.cin * g.len);
  }
  return dx;
}

Tensor merge_streams(const Tensor& a, const Tensor& b, const Tensor& w, const Tensor& bias) {
  require_rank3(a, "merge input");
  require_same_shape(a, b, "merge_streams");
  const Tensor kernel = merge_kernel_as_conv(w);
  return conv1d(interleave(a, b), kernel, bias, Padding::Same);
}

std::pair<Tensor, Tensor> merge_streams_backward(const Tensor& a, const Tensor& b, const Tensor& w,
                                                 const Tensor& dy, Tensor& dw, Tensor& dbias) {
  require_same_shape(a, b, "merge_streams backward");
  const Tensor kernel = merge_kernel_as_conv(w);
  Tensor dkernel(kernel.shape());
  const Tensor dx = conv1d_backward(interleave(a, b), kernel, dy, Padding::Same, dkernel, dbias);
  for (std::size_t i = 0; i < dw.size(); ++i) dw[i] += dkernel[i];
  Tensor da(a.shape()), db(b.shape());
  for (int n = 0; n < a.dim(0); ++n)
    for (int c = 0; c < a.dim(1); ++c)
      for (int t = 0; t < a.dim(2); ++t) {
        da.at(n, c, t) = dx.at(n, 2 * c, t);
        db.at(n, c, t) = dx.at(n, 2 * c + 1, t);
      }
  return {da, db};
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat of nothing");
  const int n = parts[0]->dim(0), t = parts[0]->dim(2);
  int channels = 0;
  for (const Tensor* p : parts) {
    require_rank3(*p, "concat");
    if (p->dim(0) != n || p->dim(2) != t) throw ShapeMismatch("concat: batch or time differs");
    channels += p->dim(1);
  }
  Tensor out({n, channels, t});
  for (int b = 0; b < n; ++b) {
    int c0 = 0;
    for (const Tensor* p : parts) {
      const std::size_t len = static_cast<std::size_t>(p->dim(1)) * t;
      std::copy_n(p->ptr() + b * len, len, out.ptr() + (static_cast<std::size_t>(b) * channels + c0) * t);
      c0 += p->dim(1);
    }
  }
  return out;
}

Tensor slice_channels(const Tensor& x, int c0, int n) {
  require_rank3(x, "slice");
  if (c0 < 0 || n < 0 || c0 + n > x.dim(1)) throw ShapeMismatch("channel slice out of range");
  Tensor out({x.dim(0), n, x.dim(2)});
  const std::size_t t = x.dim(2);
  for (int b = 0; b < x.dim(0); ++b)
    std::copy_n(x.ptr() + (static_cast<std::size_t>(b) * x.dim(1) + c0) * t, n * t,
                out.ptr() + static_cast<std::size_t>(b) * n * t);
  return out;
}

std::vector<int> argmax_channels(const Tensor& probs, int b) {
  require_rank3(probs, "argmax");
  std::vector<int> out(probs.dim(2), 0);
  for (int t = 0; t < probs.dim(2); ++t)
    for (int c = 1; c < probs.dim(1); ++c)
      if (probs.at(b, c, t) > probs.at(b, out[t], t)) out[t] = c;
  return out;
}

Tensor round_to_one_hot(const Tensor& probs) {
  Tensor out(probs.shape());
  for (int b = 0; b < probs.dim(0); ++b) {
    const std::vector<int> idx = argmax_channels(probs, b);
    for (int t = 0; t < probs.dim(2); ++t) out.at(b, idx[t], t) = 1.0;
  }
  return out;
}

}  // namespace gaswarm::nn
