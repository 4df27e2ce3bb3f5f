#include "stpen/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stpen/errors.hpp"

namespace stpen::ops {
namespace {

void require_rank(const Var& x, std::size_t rank, const char* op) {
  if (x.value().rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_to_string(x.shape()));
  }
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()) + " differ");
  }
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

std::ptrdiff_t sd(std::size_t v) { return static_cast<std::ptrdiff_t>(v); }

// Elementwise unary op given value and derivative as a function of (x, y).
template <class F, class D>
Var unary(const Var& x, F f, D dfdx) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.numel(); ++i) out[i] = f(in[i]);
  return make_op(std::move(out), {x}, [dfdx](Node& self) {
    Node& p = parent(self, 0);
    Tensor& g = p.grad_buffer();
    const Tensor& xin = p.value;
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * dfdx(xin[i], self.value[i]);
  });
}

double stable_sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Var conv2d(const Var& input, const Var& kernel, const Var& bias, std::size_t stride, std::size_t pad) {
  require_rank(input, 4, "conv2d");
  require_rank(kernel, 4, "conv2d");
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  if (ks[1] != is[1] || ks[2] != ks[3]) {
    throw ShapeError("conv2d: input " + shape_to_string(is) + " incompatible with kernel " + shape_to_string(ks));
  }
  if (bias.value().rank() != 1 || bias.shape()[0] != ks[0]) {
    throw ShapeError("conv2d: bias " + shape_to_string(bias.shape()) + " for kernel " + shape_to_string(ks));
  }
  if (stride < 1) throw ArgumentError("conv2d: stride must be >= 1");
  const std::size_t T = is[0], Ci = is[1], H = is[2], W = is[3];
  const std::size_t Co = ks[0], K = ks[2];
  if (H + 2 * pad < K || W + 2 * pad < K) {
    throw ShapeError("conv2d: kernel " + shape_to_string(ks) + " larger than padded input " + shape_to_string(is));
  }
  const std::size_t Ho = (H + 2 * pad - K) / stride + 1;
  const std::size_t Wo = (W + 2 * pad - K) / stride + 1;

  // Valid output range [lo, hi) along one axis for kernel offset k.
  struct Range {
    std::size_t lo, hi;
  };
  auto valid = [stride, pad](std::size_t k, std::size_t in_extent, std::size_t out_extent) {
    const long shift = static_cast<long>(k) - static_cast<long>(pad);
    long lo = 0;
    if (shift < 0) lo = (-shift + static_cast<long>(stride) - 1) / static_cast<long>(stride);
    long hi = (static_cast<long>(in_extent) - 1 - shift) / static_cast<long>(stride) + 1;
    if (static_cast<long>(in_extent) - 1 - shift < 0) hi = 0;
    hi = std::min<long>(hi, static_cast<long>(out_extent));
    if (hi < lo) hi = lo;
    return Range{static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  };
  // Flat input index of output row oh, column 0, for kernel tap (kh, kw).
  auto offset = [stride, pad, W](std::size_t oh, std::size_t kh, std::size_t kw) {
    return static_cast<std::ptrdiff_t>((oh * stride + kh - pad) * W) + static_cast<std::ptrdiff_t>(kw) -
           static_cast<std::ptrdiff_t>(pad);
  };
  std::vector<Range> rows(K), cols(K);
  for (std::size_t k = 0; k < K; ++k) {
    rows[k] = valid(k, H, Ho);
    cols[k] = valid(k, W, Wo);
  }

  Tensor out({T, Co, Ho, Wo});
  const double* x = input.value().data().data();
  const double* w = kernel.value().data().data();
  const double* b = bias.value().data().data();
  double* y = out.data().data();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t co = 0; co < Co; ++co) {
      double* yp = y + (t * Co + co) * Ho * Wo;
      std::fill(yp, yp + Ho * Wo, b[co]);
      for (std::size_t ci = 0; ci < Ci; ++ci) {
        const double* xp = x + (t * Ci + ci) * H * W;
        const double* wp = w + (co * Ci + ci) * K * K;
        for (std::size_t kh = 0; kh < K; ++kh) {
          for (std::size_t kw = 0; kw < K; ++kw) {
            const double wv = wp[kh * K + kw];
            const auto [r0, r1] = rows[kh];
            const auto [c0, c1] = cols[kw];
            for (std::size_t oh = r0; oh < r1; ++oh) {
              const std::ptrdiff_t xoff = offset(oh, kh, kw);
              double* yr = yp + oh * Wo;
              if (stride == 1) {
                for (std::size_t ow = c0; ow < c1; ++ow) yr[ow] += wv * xp[xoff + sd(ow)];
              } else {
                for (std::size_t ow = c0; ow < c1; ++ow) yr[ow] += wv * xp[xoff + sd(ow * stride)];
              }
            }
          }
        }
      }
    }
  }

  return make_op(std::move(out), {input, kernel, bias},
                 [=, rows = std::move(rows), cols = std::move(cols)](Node& self) {
                   Node& in_node = parent(self, 0);
                   Node& k_node = parent(self, 1);
                   Node& b_node = parent(self, 2);
                   const double* gy = self.grad.data().data();
                   const double* xv = in_node.value.data().data();
                   const double* wv = k_node.value.data().data();
                   double* gx = in_node.requires_grad ? in_node.grad_buffer().data().data() : nullptr;
                   double* gw = k_node.requires_grad ? k_node.grad_buffer().data().data() : nullptr;
                   double* gb = b_node.requires_grad ? b_node.grad_buffer().data().data() : nullptr;
                   for (std::size_t t = 0; t < T; ++t) {
                     for (std::size_t co = 0; co < Co; ++co) {
                       const double* gp = gy + (t * Co + co) * Ho * Wo;
                       if (gb) {
                         double acc = 0.0;
                         for (std::size_t i = 0; i < Ho * Wo; ++i) acc += gp[i];
                         gb[co] += acc;
                       }
                       for (std::size_t ci = 0; ci < Ci; ++ci) {
                         const double* xp = xv + (t * Ci + ci) * H * W;
                         double* gxp = gx ? gx + (t * Ci + ci) * H * W : nullptr;
                         const std::size_t wbase = (co * Ci + ci) * K * K;
                         for (std::size_t kh = 0; kh < K; ++kh) {
                           for (std::size_t kw = 0; kw < K; ++kw) {
                             const double wval = wv[wbase + kh * K + kw];
                             const auto [r0, r1] = rows[kh];
                             const auto [c0, c1] = cols[kw];
                             double acc = 0.0;
                             for (std::size_t oh = r0; oh < r1; ++oh) {
                               const std::ptrdiff_t xoff = offset(oh, kh, kw);
                               const double* gr = gp + oh * Wo;
                               if (stride == 1) {
                                 for (std::size_t ow = c0; ow < c1; ++ow) acc += gr[ow] * xp[xoff + sd(ow)];
                                 if (gxp) {
                                   for (std::size_t ow = c0; ow < c1; ++ow) gxp[xoff + sd(ow)] += wval * gr[ow];
                                 }
                               } else {
                                 for (std::size_t ow = c0; ow < c1; ++ow) acc += gr[ow] * xp[xoff + sd(ow * stride)];
                                 if (gxp) {
                                   for (std::size_t ow = c0; ow < c1; ++ow) gxp[xoff + sd(ow * stride)] += wval * gr[ow];
                                 }
                               }
                             }
                             if (gw) gw[wbase + kh * K + kw] += acc;
                           }
                         }
                       }
                     }
                   }
                 });
}

Var relu(const Var& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& x) {
  return unary(x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node& p = parent(self, k);
      if (!p.requires_grad) continue;
      Tensor& g = p.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node& p = parent(self, k);
      if (!p.requires_grad) continue;
      const double sign = k == 0 ? 1.0 : -1.0;
      Tensor& g = p.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += sign * self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * pa.value[i];
    }
  });
}

Var scale(const Var& x, double factor) {
  Tensor out = x.value();
  for (auto& v : out.storage()) v *= factor;
  return make_op(std::move(out), {x}, [factor](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += factor * self.grad[i];
  });
}

Var add_n(const std::vector<Var>& terms) {
  if (terms.empty()) throw ArgumentError("add_n: no terms");
  Tensor out = terms.front().value();
  for (std::size_t k = 1; k < terms.size(); ++k) {
    require_same_shape(terms.front(), terms[k], "add_n");
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += terms[k].value()[i];
  }
  return make_op(std::move(out), terms, [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      Tensor& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
  });
}

Var broadcast_mul(const Var& features, const Var& gate) {
  require_rank(features, 4, "broadcast_mul");
  require_rank(gate, 4, "broadcast_mul");
  const Shape& fs = features.shape();
  const Shape& gs = gate.shape();
  if (gs[0] != fs[0] || gs[1] != 1 || gs[2] != fs[2] || gs[3] != fs[3]) {
    throw ShapeError("broadcast_mul: gate " + shape_to_string(gs) + " does not broadcast over " +
                     shape_to_string(fs));
  }
  const std::size_t T = fs[0], C = fs[1], HW = fs[2] * fs[3];
  Tensor out(fs);
  const Tensor& f = features.value();
  const Tensor& g = gate.value();
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < HW; ++i) out[(t * C + c) * HW + i] = f[(t * C + c) * HW + i] * g[t * HW + i];
  return make_op(std::move(out), {features, gate}, [T, C, HW](Node& self) {
    Node& pf = parent(self, 0);
    Node& pg = parent(self, 1);
    if (pf.requires_grad) {
      Tensor& gf = pf.grad_buffer();
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t i = 0; i < HW; ++i) {
            const std::size_t k = (t * C + c) * HW + i;
            gf[k] += self.grad[k] * pg.value[t * HW + i];
          }
    }
    if (pg.requires_grad) {
      Tensor& gg = pg.grad_buffer();
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t i = 0; i < HW; ++i) {
            const std::size_t k = (t * C + c) * HW + i;
            gg[t * HW + i] += self.grad[k] * pf.value[k];
          }
    }
  });
}

Var temporal_difference(const Var& seq) {
  if (seq.value().rank() < 1 || seq.shape()[0] < 2) {
    throw ArgumentError("temporal_difference: need at least 2 frames, got " + shape_to_string(seq.shape()));
  }
  Shape os = seq.shape();
  const std::size_t T = os[0];
  const std::size_t frame = seq.value().numel() / T;
  os[0] = T - 1;
  Tensor out(os);
  const Tensor& s = seq.value();
  for (std::size_t t = 0; t + 1 < T; ++t)
    for (std::size_t i = 0; i < frame; ++i) out[t * frame + i] = s[(t + 1) * frame + i] - s[t * frame + i];
  return make_op(std::move(out), {seq}, [T, frame](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t t = 0; t + 1 < T; ++t)
      for (std::size_t i = 0; i < frame; ++i) {
        const double d = self.grad[t * frame + i];
        g[(t + 1) * frame + i] += d;
        g[t * frame + i] -= d;
      }
  });
}

Var prepend_zero_frame(const Var& seq) {
  Shape os = seq.shape();
  const std::size_t frame = seq.value().numel() / os[0];
  os[0] += 1;
  Tensor out(os);
  std::copy(seq.value().storage().begin(), seq.value().storage().end(), out.storage().begin() + frame);
  return make_op(std::move(out), {seq}, [frame](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[frame + i];
  });
}

Var select_frames(const Var& seq, std::size_t start, std::size_t stride, std::size_t count) {
  const Shape& is = seq.shape();
  if (count == 0 || stride == 0 || start + (count - 1) * stride >= is[0]) {
    throw ShapeError("select_frames: cannot take " + std::to_string(count) + " frames from " + shape_to_string(is));
  }
  const std::size_t frame = seq.value().numel() / is[0];
  Shape os = is;
  os[0] = count;
  Tensor out(os);
  const Tensor& s = seq.value();
  for (std::size_t k = 0; k < count; ++k)
    std::copy_n(s.storage().begin() + (start + k * stride) * frame, frame, out.storage().begin() + k * frame);
  return make_op(std::move(out), {seq}, [=](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t i = 0; i < frame; ++i) g[(start + k * stride) * frame + i] += self.grad[k * frame + i];
  });
}

Var spatial_max_pool(const Var& x) {
  require_rank(x, 4, "spatial_max_pool");
  const Shape& s = x.shape();
  const std::size_t planes = s[0] * s[1], HW = s[2] * s[3];
  Tensor out({s[0], s[1]});
  std::vector<std::size_t> argmax(planes);
  const Tensor& v = x.value();
  for (std::size_t p = 0; p < planes; ++p) {
    std::size_t best = p * HW;
    for (std::size_t i = 1; i < HW; ++i) {
      if (v[p * HW + i] > v[best]) best = p * HW + i;
    }
    argmax[p] = best;
    out[p] = v[best];
  }
  return make_op(std::move(out), {x}, [argmax = std::move(argmax)](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t p = 0; p < argmax.size(); ++p) g[argmax[p]] += self.grad[p];
  });
}

Var roi_align(const Var& map, const Box& box, std::size_t out_size) {
  require_rank(map, 4, "roi_align");
  require_valid_box(box);
  if (out_size < 1) throw ArgumentError("roi_align: output size must be >= 1");
  const Shape& s = map.shape();
  const std::size_t planes = s[0] * s[1], H = s[2], W = s[3], P = out_size;

  // Four taps per output cell, shared by every frame and channel.
  struct Tap {
    std::size_t idx[4];
    double w[4];
  };
  auto axis = [](double norm, std::size_t extent, std::size_t& lo, std::size_t& hi, double& frac) {
    double u = norm * static_cast<double>(extent) - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(extent - 1));
    lo = static_cast<std::size_t>(std::floor(u));
    hi = std::min(lo + 1, extent - 1);
    frac = u - static_cast<double>(lo);
  };
  std::vector<Tap> taps(P * P);
  for (std::size_t i = 0; i < P; ++i) {
    const double ny = box.y1 + (static_cast<double>(i) + 0.5) / static_cast<double>(P) * box.height();
    std::size_t y0, y1;
    double fy;
    axis(ny, H, y0, y1, fy);
    for (std::size_t j = 0; j < P; ++j) {
      const double nx = box.x1 + (static_cast<double>(j) + 0.5) / static_cast<double>(P) * box.width();
      std::size_t x0, x1;
      double fx;
      axis(nx, W, x0, x1, fx);
      taps[i * P + j] = Tap{{y0 * W + x0, y0 * W + x1, y1 * W + x0, y1 * W + x1},
                            {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx}};
    }
  }

  Tensor out({s[0], s[1], P, P});
  const Tensor& v = map.value();
  for (std::size_t p = 0; p < planes; ++p) {
    const std::size_t base = p * H * W;
    for (std::size_t c = 0; c < P * P; ++c) {
      const Tap& tp = taps[c];
      out[p * P * P + c] = tp.w[0] * v[base + tp.idx[0]] + tp.w[1] * v[base + tp.idx[1]] +
                           tp.w[2] * v[base + tp.idx[2]] + tp.w[3] * v[base + tp.idx[3]];
    }
  }
  return make_op(std::move(out), {map}, [taps = std::move(taps), planes, H, W, P](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t p = 0; p < planes; ++p) {
      const std::size_t base = p * H * W;
      for (std::size_t c = 0; c < P * P; ++c) {
        const double d = self.grad[p * P * P + c];
        const Tap& tp = taps[c];
        for (int k = 0; k < 4; ++k) g[base + tp.idx[k]] += tp.w[k] * d;
      }
    }
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  require_rank(x, 1, "linear");
  require_rank(weight, 2, "linear");
  require_rank(bias, 1, "linear");
  const std::size_t Do = weight.shape()[0], Di = weight.shape()[1];
  if (x.shape()[0] != Di || bias.shape()[0] != Do) {
    throw ShapeError("linear: x " + shape_to_string(x.shape()) + ", weight " + shape_to_string(weight.shape()) +
                     ", bias " + shape_to_string(bias.shape()));
  }
  Tensor out = bias.value();
  const Tensor& w = weight.value();
  const Tensor& xv = x.value();
  for (std::size_t o = 0; o < Do; ++o) {
    double acc = out[o];
    for (std::size_t i = 0; i < Di; ++i) acc += w[o * Di + i] * xv[i];
    out[o] = acc;
  }
  return make_op(std::move(out), {x, weight, bias}, [Do, Di](Node& self) {
    Node& px = parent(self, 0);
    Node& pw = parent(self, 1);
    Node& pb = parent(self, 2);
    if (px.requires_grad) {
      Tensor& g = px.grad_buffer();
      for (std::size_t o = 0; o < Do; ++o)
        for (std::size_t i = 0; i < Di; ++i) g[i] += pw.value[o * Di + i] * self.grad[o];
    }
    if (pw.requires_grad) {
      Tensor& g = pw.grad_buffer();
      for (std::size_t o = 0; o < Do; ++o)
        for (std::size_t i = 0; i < Di; ++i) g[o * Di + i] += self.grad[o] * px.value[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::size_t o = 0; o < Do; ++o) g[o] += self.grad[o];
    }
  });
}

Var channel_mean(const Var& x) {
  require_rank(x, 4, "channel_mean");
  const Shape& s = x.shape();
  const std::size_t T = s[0], C = s[1], HW = s[2] * s[3];
  const double inv = 1.0 / static_cast<double>(T * HW);
  Tensor out({C});
  const Tensor& v = x.value();
  for (std::size_t c = 0; c < C; ++c) {
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < HW; ++i) acc += v[(t * C + c) * HW + i];
    out[c] = acc * inv;
  }
  return make_op(std::move(out), {x}, [T, C, HW, inv](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < HW; ++i) g[(t * C + c) * HW + i] += self.grad[c] * inv;
  });
}

Var time_mean(const Var& seq) {
  require_rank(seq, 2, "time_mean");
  const std::size_t T = seq.shape()[0], C = seq.shape()[1];
  const double inv = 1.0 / static_cast<double>(T);
  Tensor out({C});
  for (std::size_t c = 0; c < C; ++c) {
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) acc += seq.value()[t * C + c];
    out[c] = acc * inv;
  }
  return make_op(std::move(out), {seq}, [T, C, inv](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < C; ++c) g[t * C + c] += self.grad[c] * inv;
  });
}

Var row(const Var& matrix, std::size_t t) {
  require_rank(matrix, 2, "row");
  const std::size_t T = matrix.shape()[0], C = matrix.shape()[1];
  if (t >= T) throw ShapeError("row: index " + std::to_string(t) + " out of " + shape_to_string(matrix.shape()));
  Tensor out({C});
  std::copy_n(matrix.value().storage().begin() + t * C, C, out.storage().begin());
  return make_op(std::move(out), {matrix}, [t, C](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t c = 0; c < C; ++c) g[t * C + c] += self.grad[c];
  });
}

Var concat(const Var& a, const Var& b) {
  require_rank(a, 1, "concat");
  require_rank(b, 1, "concat");
  const std::size_t na = a.shape()[0], nb = b.shape()[0];
  Tensor out({na + nb});
  std::copy_n(a.value().storage().begin(), na, out.storage().begin());
  std::copy_n(b.value().storage().begin(), nb, out.storage().begin() + na);
  return make_op(std::move(out), {a, b}, [na, nb](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < na; ++i) g[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::size_t i = 0; i < nb; ++i) g[i] += self.grad[na + i];
    }
  });
}

Var sum(const Var& x) {
  double acc = 0.0;
  for (double v : x.value().storage()) acc += v;
  return make_op(Tensor::scalar(acc), {x}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[0];
  });
}

Var bce_multilabel_loss(const Var& scores, const Tensor& targets) {
  require_rank(scores, 1, "bce_multilabel_loss");
  if (targets.shape() != scores.shape()) {
    throw ShapeError("bce_multilabel_loss: scores " + shape_to_string(scores.shape()) + " vs targets " +
                     shape_to_string(targets.shape()));
  }
  for (std::size_t k = 0; k < targets.numel(); ++k) {
    if (targets[k] != 0.0 && targets[k] != 1.0) {
      throw LabelError("bce_multilabel_loss: target " + std::to_string(k) + " is " + std::to_string(targets[k]) +
                       ", expected 0 or 1");
    }
  }
  const std::size_t K = scores.shape()[0];
  const double inv = 1.0 / static_cast<double>(K);
  double loss = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double p = std::clamp(scores.value()[k], kBceClamp, 1.0 - kBceClamp);
    loss -= targets[k] * std::log(p) + (1.0 - targets[k]) * std::log(1.0 - p);
  }
  return make_op(Tensor::scalar(loss * inv), {scores}, [targets, K, inv](Node& self) {
    Node& ps = parent(self, 0);
    Tensor& g = ps.grad_buffer();
    for (std::size_t k = 0; k < K; ++k) {
      const double raw = ps.value[k];
      if (raw < kBceClamp || raw > 1.0 - kBceClamp) continue;
      const double y = targets[k];
      g[k] += self.grad[0] * inv * (-y / raw + (1.0 - y) / (1.0 - raw));
    }
  });
}

}  // namespace stpen::ops
