#pragma once

#include <cstddef>
#include <vector>

#include "stpen/autograd.hpp"
#include "stpen/geometry.hpp"

// Differentiable operations. Feature sequences are laid out as
// [T x C x H x W] with the time axis acting as the batch axis.
namespace stpen::ops {

/// Cross-correlation of every frame; kernel [Co x Ci x k x k], bias [Co].
Var conv2d(const Var& input, const Var& kernel, const Var& bias, std::size_t stride, std::size_t pad);

Var relu(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Elementwise product of equal shapes.
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
/// Sum of equally shaped tensors, accumulated left to right.
Var add_n(const std::vector<Var>& terms);

/// out[t,c,h,w] = features[t,c,h,w] * gate[t,0,h,w].
Var broadcast_mul(const Var& features, const Var& gate);

/// out[t] = seq[t+1] - seq[t]; requires T >= 2.
Var temporal_difference(const Var& seq);
/// Inserts one all-zero frame in front of the time axis.
Var prepend_zero_frame(const Var& seq);
/// Frames start, start+stride, ... (count of them) along axis 0.
Var select_frames(const Var& seq, std::size_t start, std::size_t stride, std::size_t count);

/// [T x C x H x W] -> [T x C]. Gradient goes to the first maximum in row-major order.
Var spatial_max_pool(const Var& x);

/// Bilinear crop of every frame and channel to [T x C x P x P]. One sample at
/// each output cell centre; pixel centres sit at integer coordinates.
Var roi_align(const Var& map, const Box& box, std::size_t out_size);

/// weight [Do x Di] times x [Di] plus bias [Do].
Var linear(const Var& x, const Var& weight, const Var& bias);

/// [T x C x H x W] -> [C], mean over time and space.
Var channel_mean(const Var& x);
/// [T x C] -> [C].
Var time_mean(const Var& seq);
/// Row t of a [T x C] matrix as a [C] vector.
Var row(const Var& matrix, std::size_t t);
/// Concatenation of two vectors.
Var concat(const Var& a, const Var& b);
/// Sum of all elements as a [1] tensor.
Var sum(const Var& x);

inline constexpr double kBceClamp = 1e-7;

/// Mean binary cross-entropy over K post-sigmoid scores; targets must be 0 or 1.
Var bce_multilabel_loss(const Var& scores, const Tensor& targets);

}  // namespace stpen::ops
