#include "relight/nn/ops.hpp"

#include <algorithm>
#include <cmath>

namespace relight::nn {

namespace {

template <typename T>
bool wants(const std::shared_ptr<Node<T>>& n) {
  return n->requires_grad;
}

template <typename T, typename F>
Tensor<T> unary(const Tensor<T>& x, F f, std::function<void(Node<T>&)> bw) {
  std::vector<T> out(x.numel());
  const T* in = x.ptr();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_result<T>(x.shape(), std::move(out), {x}, std::move(bw));
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.ptr()[i] + b.ptr()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& n) {
    for (auto& in : n.inputs) {
      if (!wants(in)) continue;
      auto& g = in->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.ptr()[i] - b.ptr()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& n) {
    if (wants(n.inputs[0])) {
      auto& g = n.inputs[0]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (wants(n.inputs[1])) {
      auto& g = n.inputs[1]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.ptr()[i] * b.ptr()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& n) {
    auto& A = n.inputs[0];
    auto& B = n.inputs[1];
    if (wants(A)) {
      auto& g = A->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * B->value[i];
    }
    if (wants(B)) {
      auto& g = B->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * A->value[i];
    }
  });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T c) {
  return unary<T>(x, [c](T v) { return v + c; }, [](Node<T>& n) {
    auto& g = n.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& x, T c) {
  return unary<T>(x, [c](T v) { return v * c; }, [c](Node<T>& n) {
    auto& g = n.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * c;
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary<T>(x, [](T v) { return v > T(0) ? v : T(0); }, [](Node<T>& n) {
    auto& in = n.inputs[0];
    auto& g = in->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in->value[i] > T(0)) g[i] += n.grad[i];
    }
  });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  return unary<T>(x, [slope](T v) { return v > T(0) ? v : v * slope; }, [slope](Node<T>& n) {
    auto& in = n.inputs[0];
    auto& g = in->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += in->value[i] > T(0) ? n.grad[i] : n.grad[i] * slope;
    }
  });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary<T>(x, [](T v) { return T(1) / (T(1) + std::exp(-v)); }, [](Node<T>& n) {
    auto& g = n.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T s = n.value[i];
      g[i] += n.grad[i] * s * (T(1) - s);
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T s = T(0);
  for (T v : x.data()) s += v;
  return make_result<T>({1}, {s}, {x}, [](Node<T>& n) {
    auto& g = n.inputs[0]->ensure_grad();
    for (T& v : g) v += n.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  T s = T(0);
  for (T v : x.data()) s += v;
  const T inv = T(1) / static_cast<T>(x.numel());
  return make_result<T>({1}, {s * inv}, {x}, [inv](Node<T>& n) {
    auto& g = n.inputs[0]->ensure_grad();
    for (T& v : g) v += n.grad[0] * inv;
  });
}

template <typename T>
Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mse");
  T s = T(0);
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const T d = a.ptr()[i] - b.ptr()[i];
    s += d * d;
  }
  const T inv = T(1) / static_cast<T>(a.numel());
  return make_result<T>({1}, {s * inv}, {a, b}, [inv](Node<T>& n) {
    auto& A = n.inputs[0];
    auto& B = n.inputs[1];
    const T k = T(2) * inv * n.grad[0];
    if (wants(A)) {
      auto& g = A->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += k * (A->value[i] - B->value[i]);
    }
    if (wants(B)) {
      auto& g = B->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= k * (A->value[i] - B->value[i]);
    }
  });
}

template <typename T>
Tensor<T> mse_const(const Tensor<T>& a, T c) {
  T s = T(0);
  for (T v : a.data()) s += (v - c) * (v - c);
  const T inv = T(1) / static_cast<T>(a.numel());
  return make_result<T>({1}, {s * inv}, {a}, [inv, c](Node<T>& n) {
    auto& A = n.inputs[0];
    auto& g = A->ensure_grad();
    const T k = T(2) * inv * n.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += k * (A->value[i] - c);
  });
}

template <typename T>
Tensor<T> max_merge(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "max_merge");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a.ptr()[i], b.ptr()[i]);
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& n) {
    auto& A = n.inputs[0];
    auto& B = n.inputs[1];
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      const bool to_a = A->value[i] >= B->value[i];
      auto& dst = to_a ? A : B;
      if (wants(dst)) dst->ensure_grad()[i] += n.grad[i];
    }
  });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs, int dim) {
  if (xs.empty()) throw ValidationError("concat of zero tensors");
  const Shape& s0 = xs[0].shape();
  const int r = static_cast<int>(s0.size());
  if (dim < 0) dim += r;
  if (dim < 0 || dim >= r) throw ValidationError("concat: bad dim for shape " + shape_str(s0));
  Shape out_shape = s0;
  out_shape[static_cast<std::size_t>(dim)] = 0;
  for (const auto& x : xs) {
    Shape a = x.shape();
    Shape b = s0;
    if (a.size() != b.size()) {
      throw ValidationError("concat: rank mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
    a[static_cast<std::size_t>(dim)] = b[static_cast<std::size_t>(dim)] = 0;
    if (a != b) {
      throw ValidationError("concat: shape mismatch " + shape_str(x.shape()) + " vs " +
                            shape_str(s0));
    }
    out_shape[static_cast<std::size_t>(dim)] += x.dim(dim);
  }
  std::size_t outer = 1;
  for (int i = 0; i < dim; ++i) outer *= static_cast<std::size_t>(s0[static_cast<std::size_t>(i)]);
  std::size_t inner = 1;
  for (int i = dim + 1; i < r; ++i) inner *= static_cast<std::size_t>(s0[static_cast<std::size_t>(i)]);
  const std::size_t total_d = static_cast<std::size_t>(out_shape[static_cast<std::size_t>(dim)]);

  std::vector<T> out(numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& x : xs) {
    offsets.push_back(off);
    const std::size_t chunk = static_cast<std::size_t>(x.dim(dim)) * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(x.ptr() + o * chunk, chunk, out.data() + (o * total_d * inner) + off * inner);
    }
    off += static_cast<std::size_t>(x.dim(dim));
  }
  return make_result<T>(out_shape, std::move(out), xs,
                        [offsets, outer, inner, total_d, dim](Node<T>& n) {
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      auto& in = n.inputs[k];
      if (!wants(in)) continue;
      auto& g = in->ensure_grad();
      const std::size_t chunk =
          static_cast<std::size_t>(in->shape[static_cast<std::size_t>(dim)]) * inner;
      for (std::size_t o = 0; o < outer; ++o) {
        const T* src = n.grad.data() + o * total_d * inner + offsets[k] * inner;
        T* dst = g.data() + o * chunk;
        for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
      }
    }
  });
}

template <typename T>
Tensor<T> detach(const Tensor<T>& x) {
  return Tensor<T>(x.shape(), x.data(), false);
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw ValidationError("reshape " + shape_str(x.shape()) + " -> " + shape_str(shape));
  }
  return make_result<T>(std::move(shape), x.data(), {x}, [](Node<T>& n) {
    auto& g = n.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

namespace {

struct Taps {
  int i0, i1;
  double w1;
};

std::vector<Taps> resize_taps(int in, int out) {
  std::vector<Taps> t(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int i0 = std::min(static_cast<int>(src), in - 1);
    const int i1 = std::min(i0 + 1, in - 1);
    t[static_cast<std::size_t>(o)] = {i0, i1, src - i0};
  }
  return t;
}

}  // namespace

template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, int out_h, int out_w) {
  if (x.rank() != 4) throw ValidationError("resize_bilinear expects NCHW, got " + shape_str(x.shape()));
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (out_h <= 0 || out_w <= 0) throw ValidationError("resize_bilinear: bad output size");
  const auto ty = resize_taps(h, out_h);
  const auto tx = resize_taps(w, out_w);
  const std::size_t planes = static_cast<std::size_t>(n) * c;
  std::vector<T> out(planes * out_h * out_w);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = x.ptr() + p * h * w;
    T* dst = out.data() + p * out_h * out_w;
    for (int oy = 0; oy < out_h; ++oy) {
      const Taps& a = ty[static_cast<std::size_t>(oy)];
      const T wy = static_cast<T>(a.w1);
      for (int ox = 0; ox < out_w; ++ox) {
        const Taps& b = tx[static_cast<std::size_t>(ox)];
        const T wx = static_cast<T>(b.w1);
        const T top = (T(1) - wx) * src[a.i0 * w + b.i0] + wx * src[a.i0 * w + b.i1];
        const T bot = (T(1) - wx) * src[a.i1 * w + b.i0] + wx * src[a.i1 * w + b.i1];
        dst[oy * out_w + ox] = (T(1) - wy) * top + wy * bot;
      }
    }
  }
  return make_result<T>({n, c, out_h, out_w}, std::move(out), {x},
                        [ty, tx, planes, h, w, out_h, out_w](Node<T>& nd) {
    auto& g = nd.inputs[0]->ensure_grad();
    for (std::size_t p = 0; p < planes; ++p) {
      T* dst = g.data() + p * h * w;
      const T* src = nd.grad.data() + p * out_h * out_w;
      for (int oy = 0; oy < out_h; ++oy) {
        const Taps& a = ty[static_cast<std::size_t>(oy)];
        const T wy = static_cast<T>(a.w1);
        for (int ox = 0; ox < out_w; ++ox) {
          const Taps& b = tx[static_cast<std::size_t>(ox)];
          const T wx = static_cast<T>(b.w1);
          const T go = src[oy * out_w + ox];
          dst[a.i0 * w + b.i0] += go * (T(1) - wy) * (T(1) - wx);
          dst[a.i0 * w + b.i1] += go * (T(1) - wy) * wx;
          dst[a.i1 * w + b.i0] += go * wy * (T(1) - wx);
          dst[a.i1 * w + b.i1] += go * wy * wx;
        }
      }
    }
  });
}

template <typename T>
Tensor<T> max_over(const Tensor<T>& x, int dim) {
  const int r = x.rank();
  if (dim < 0) dim += r;
  if (dim < 0 || dim >= r) throw ValidationError("max_over: bad dim for " + shape_str(x.shape()));
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < dim; ++i) outer *= static_cast<std::size_t>(x.dim(i));
  for (int i = dim + 1; i < r; ++i) inner *= static_cast<std::size_t>(x.dim(i));
  const std::size_t len = static_cast<std::size_t>(x.dim(dim));
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + dim);
  std::vector<T> out(outer * inner);
  std::vector<std::uint32_t> arg(outer * inner, 0);
  for (std::size_t o = 0; o < outer; ++o) {
    const T* base = x.ptr() + o * len * inner;
    for (std::size_t i = 0; i < inner; ++i) {
      T best = base[i];
      std::uint32_t bi = 0;
      for (std::size_t k = 1; k < len; ++k) {
        const T v = base[k * inner + i];
        if (v > best) {
          best = v;
          bi = static_cast<std::uint32_t>(k);
        }
      }
      out[o * inner + i] = best;
      arg[o * inner + i] = bi;
    }
  }
  return make_result<T>(out_shape, std::move(out), {x},
                        [arg = std::move(arg), outer, inner, len](Node<T>& n) {
    auto& g = n.inputs[0]->ensure_grad();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        g[o * len * inner + arg[o * inner + i] * inner + i] += n.grad[o * inner + i];
      }
    }
  });
}

template <typename T>
Tensor<T> linear_upsample(const Tensor<T>& x, int out_h, int out_w) {
  if (x.rank() != 5) throw ValidationError("linear_upsample expects NCDHW, got " + shape_str(x.shape()));
  return resize_bilinear(max_over(x, 2), out_h, out_w);
}

#define RELIGHT_OPS(T)                                                              \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                               \
  template Tensor<T> mul_scalar(const Tensor<T>&, T);                               \
  template Tensor<T> relu(const Tensor<T>&);                                        \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                               \
  template Tensor<T> sigmoid(const Tensor<T>&);                                     \
  template Tensor<T> sum(const Tensor<T>&);                                         \
  template Tensor<T> mean(const Tensor<T>&);                                        \
  template Tensor<T> mse(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> mse_const(const Tensor<T>&, T);                                \
  template Tensor<T> max_merge(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, int);                    \
  template Tensor<T> detach(const Tensor<T>&);                                      \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                              \
  template Tensor<T> resize_bilinear(const Tensor<T>&, int, int);                   \
  template Tensor<T> max_over(const Tensor<T>&, int);                               \
  template Tensor<T> linear_upsample(const Tensor<T>&, int, int);

RELIGHT_OPS(float)
RELIGHT_OPS(double)

}  // namespace relight::nn
