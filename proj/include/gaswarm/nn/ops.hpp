#pragma once

#include <utility>
#include <vector>

#include "gaswarm/nn/tensor.hpp"

namespace gaswarm::nn {

enum class Padding { Same, Valid };

// Scalar activations.
[[nodiscard]] double relu(double x);
/// (1 / beta) log(1 + exp(beta x)), evaluated without overflow.
[[nodiscard]] double softplus(double x, double beta);
/// exp(T x_i) / sum_j exp(T x_j), max-shifted.
[[nodiscard]] std::vector<double> softmax(const std::vector<double>& x, double temperature);

// Elementwise and axis activations on tensors, with their backward passes.
[[nodiscard]] Tensor relu(const Tensor& x);
[[nodiscard]] Tensor relu_backward(const Tensor& x, const Tensor& dy);
[[nodiscard]] Tensor softplus(const Tensor& x, double beta);
[[nodiscard]] Tensor softplus_backward(const Tensor& x, const Tensor& dy, double beta);
/// Softmax over the channel axis of a (batch, channels, time) tensor.
[[nodiscard]] Tensor softmax_channels(const Tensor& x, double temperature);
[[nodiscard]] Tensor softmax_channels_backward(const Tensor& y, const Tensor& dy,
                                               double temperature);

/// Cross-correlation along time. x (B, Cin, T), w (Cout, Cin, K), b (Cout).
[[nodiscard]] Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, Padding pad);
/// Returns dx and adds into dw, db.
[[nodiscard]] Tensor conv1d_backward(const Tensor& x, const Tensor& w, const Tensor& dy,
                                     Padding pad, Tensor& dw, Tensor& db);

/// Stacks a and b (B, C, T) along a new axis of size 2 and applies a 2-D
/// convolution whose kernel w (Cout, C, 2, K) spans that axis completely and
/// K steps of time ("same" padding), so the result is (B, Cout, T).
[[nodiscard]] Tensor merge_streams(const Tensor& a, const Tensor& b, const Tensor& w,
                                   const Tensor& bias);
/// Returns {da, db} and adds into dw, dbias.
[[nodiscard]] std::pair<Tensor, Tensor> merge_streams_backward(const Tensor& a, const Tensor& b,
                                                               const Tensor& w, const Tensor& dy,
                                                               Tensor& dw, Tensor& dbias);

/// Concatenates along channels.
[[nodiscard]] Tensor concat_channels(const std::vector<const Tensor*>& parts);
/// Channel slice [c0, c0 + n).
[[nodiscard]] Tensor slice_channels(const Tensor& x, int c0, int n);

/// Per time step, 1 at the largest probability (lowest index on ties).
/// Input (channels, time) slice of batch element `b`.
[[nodiscard]] std::vector<int> argmax_channels(const Tensor& probs, int b);
[[nodiscard]] Tensor round_to_one_hot(const Tensor& probs);

}  // namespace gaswarm::nn
