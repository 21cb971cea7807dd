#include "relight/nn/conv.hpp"

#include <Eigen/Core>
#include <algorithm>

namespace relight::nn {

int ConvGeom::out_size(int axis, int in) const {
  const auto a = static_cast<std::size_t>(axis);
  return (in + 2 * pad[a] - kernel[a]) / stride[a] + 1;
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<RowMat<T>>;
template <typename T>
using CMap = Eigen::Map<const RowMat<T>>;

struct Dims {
  int n, c, d, h, w;     // input
  int o, kd, kh, kw;     // weights
  int od, oh, ow;        // output
  bool is3d;

  std::size_t in_vol() const { return static_cast<std::size_t>(c) * d * h * w; }
  std::size_t k() const { return static_cast<std::size_t>(c) * kd * kh * kw; }
  std::size_t p() const { return static_cast<std::size_t>(od) * oh * ow; }
};

Dims resolve(const Shape& xs, const Shape& ws, const Shape& bs, const ConvGeom& g) {
  Dims d{};
  if (xs.size() == 4 && ws.size() == 4) {
    d = {xs[0], xs[1], 1, xs[2], xs[3], ws[0], 1, ws[2], ws[3], 0, 0, 0, false};
    if (g.kernel[0] != 1 || g.stride[0] != 1 || g.pad[0] != 0) {
      throw ValidationError("2D convolution with non-trivial depth geometry");
    }
  } else if (xs.size() == 5 && ws.size() == 5) {
    d = {xs[0], xs[1], xs[2], xs[3], xs[4], ws[0], ws[2], ws[3], ws[4], 0, 0, 0, true};
  } else {
    throw ValidationError("conv: unsupported ranks, input " + shape_str(xs) + " weight " +
                          shape_str(ws));
  }
  if (ws[1] != d.c) {
    throw ValidationError("conv: input channels " + shape_str(xs) + " vs weight " + shape_str(ws));
  }
  if (d.kd != g.kernel[0] || d.kh != g.kernel[1] || d.kw != g.kernel[2]) {
    throw ValidationError("conv: weight shape " + shape_str(ws) + " disagrees with kernel geometry");
  }
  if (bs.size() != 1 || bs[0] != d.o) {
    throw ValidationError("conv: bias shape " + shape_str(bs) + " vs weight " + shape_str(ws));
  }
  d.od = g.out_size(0, d.d);
  d.oh = g.out_size(1, d.h);
  d.ow = g.out_size(2, d.w);
  if (d.od <= 0 || d.oh <= 0 || d.ow <= 0) {
    throw ValidationError("conv: input " + shape_str(xs) + " smaller than kernel " + shape_str(ws));
  }
  return d;
}

bool is_pointwise(const ConvGeom& g) {
  return g.kernel == std::array<int, 3>{1, 1, 1} && g.stride == std::array<int, 3>{1, 1, 1} &&
         g.pad == std::array<int, 3>{0, 0, 0};
}

template <typename T>
void im2col(const T* x, const Dims& d, const ConvGeom& g, T* col) {
  const std::size_t P = d.p();
  T* dst = col;
  for (int c = 0; c < d.c; ++c) {
    for (int kz = 0; kz < d.kd; ++kz) {
      for (int ky = 0; ky < d.kh; ++ky) {
        for (int kx = 0; kx < d.kw; ++kx) {
          T* row = dst;
          for (int oz = 0; oz < d.od; ++oz) {
            const int iz = oz * g.stride[0] - g.pad[0] + kz;
            if (iz < 0 || iz >= d.d) {
              std::fill_n(row, static_cast<std::size_t>(d.oh) * d.ow, T(0));
              row += static_cast<std::size_t>(d.oh) * d.ow;
              continue;
            }
            for (int oy = 0; oy < d.oh; ++oy) {
              const int iy = oy * g.stride[1] - g.pad[1] + ky;
              if (iy < 0 || iy >= d.h) {
                std::fill_n(row, d.ow, T(0));
                row += d.ow;
                continue;
              }
              const T* src = x + ((static_cast<std::size_t>(c) * d.d + iz) * d.h + iy) * d.w;
              for (int ox = 0; ox < d.ow; ++ox) {
                const int ix = ox * g.stride[2] - g.pad[2] + kx;
                row[ox] = (ix >= 0 && ix < d.w) ? src[ix] : T(0);
              }
              row += d.ow;
            }
          }
          dst += P;
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const Dims& d, const ConvGeom& g, T* x) {
  const std::size_t P = d.p();
  const T* srcrow = col;
  for (int c = 0; c < d.c; ++c) {
    for (int kz = 0; kz < d.kd; ++kz) {
      for (int ky = 0; ky < d.kh; ++ky) {
        for (int kx = 0; kx < d.kw; ++kx) {
          const T* row = srcrow;
          for (int oz = 0; oz < d.od; ++oz) {
            const int iz = oz * g.stride[0] - g.pad[0] + kz;
            if (iz < 0 || iz >= d.d) {
              row += static_cast<std::size_t>(d.oh) * d.ow;
              continue;
            }
            for (int oy = 0; oy < d.oh; ++oy) {
              const int iy = oy * g.stride[1] - g.pad[1] + ky;
              if (iy < 0 || iy >= d.h) {
                row += d.ow;
                continue;
              }
              T* dst = x + ((static_cast<std::size_t>(c) * d.d + iz) * d.h + iy) * d.w;
              for (int ox = 0; ox < d.ow; ++ox) {
                const int ix = ox * g.stride[2] - g.pad[2] + kx;
                if (ix >= 0 && ix < d.w) dst[ix] += row[ox];
              }
              row += d.ow;
            }
          }
          srcrow += P;
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                       const ConvGeom& g) {
  const Dims d = resolve(x.shape(), w.shape(), bias.shape(), g);
  const std::size_t K = d.k(), P = d.p();
  const bool pointwise = is_pointwise(g);
  std::vector<T> out(static_cast<std::size_t>(d.n) * d.o * P);
  std::vector<T> col(pointwise ? 0 : K * P);
  CMap<T> W(w.ptr(), d.o, static_cast<Eigen::Index>(K));
  for (int n = 0; n < d.n; ++n) {
    const T* xn = x.ptr() + n * d.in_vol();
    if (!pointwise) im2col(xn, d, g, col.data());
    CMap<T> C(pointwise ? xn : col.data(), static_cast<Eigen::Index>(K),
              static_cast<Eigen::Index>(P));
    Map<T> Y(out.data() + static_cast<std::size_t>(n) * d.o * P, d.o, static_cast<Eigen::Index>(P));
    Y.noalias() = W * C;
    for (int o = 0; o < d.o; ++o) Y.row(o).array() += bias.ptr()[o];
  }
  Shape out_shape = d.is3d ? Shape{d.n, d.o, d.od, d.oh, d.ow} : Shape{d.n, d.o, d.oh, d.ow};
  return make_result<T>(std::move(out_shape), std::move(out), {x, w, bias},
                        [d, g, pointwise](Node<T>& nd) {
    auto& X = nd.inputs[0];
    auto& Wn = nd.inputs[1];
    auto& B = nd.inputs[2];
    const std::size_t K = d.k(), P = d.p();
    std::vector<T> col(pointwise ? 0 : K * P);
    std::vector<T> dcol(pointwise ? 0 : K * P);
    CMap<T> W(Wn->value.data(), d.o, static_cast<Eigen::Index>(K));
    for (int n = 0; n < d.n; ++n) {
      CMap<T> dY(nd.grad.data() + static_cast<std::size_t>(n) * d.o * P, d.o,
                 static_cast<Eigen::Index>(P));
      if (B->requires_grad) {
        auto& gb = B->ensure_grad();
        // Plain loop: Eigen's reductions peel by buffer alignment, which
        // would make the summation order vary between allocations.
        for (int o = 0; o < d.o; ++o) {
          const T* row = nd.grad.data() + (static_cast<std::size_t>(n) * d.o + o) * P;
          T acc = T(0);
          for (std::size_t i = 0; i < P; ++i) acc += row[i];
          gb[static_cast<std::size_t>(o)] += acc;
        }
      }
      const T* xn = X->value.data() + n * d.in_vol();
      if (Wn->requires_grad) {
        if (!pointwise) im2col(xn, d, g, col.data());
        CMap<T> C(pointwise ? xn : col.data(), static_cast<Eigen::Index>(K),
                  static_cast<Eigen::Index>(P));
        Map<T> dW(Wn->ensure_grad().data(), d.o, static_cast<Eigen::Index>(K));
        dW.noalias() += dY * C.transpose();
      }
      if (X->requires_grad) {
        T* dxn = X->ensure_grad().data() + n * d.in_vol();
        if (pointwise) {
          Map<T> dX(dxn, static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
          dX.noalias() += W.transpose() * dY;
        } else {
          Map<T> dC(dcol.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
          dC.noalias() = W.transpose() * dY;
          col2im(dcol.data(), d, g, dxn);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> conv_reference(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                         const ConvGeom& g) {
  const Dims d = resolve(x.shape(), w.shape(), bias.shape(), g);
  Shape out_shape = d.is3d ? Shape{d.n, d.o, d.od, d.oh, d.ow} : Shape{d.n, d.o, d.oh, d.ow};
  std::vector<T> out(numel(out_shape));
  std::size_t idx = 0;
  for (int n = 0; n < d.n; ++n)
    for (int o = 0; o < d.o; ++o)
      for (int oz = 0; oz < d.od; ++oz)
        for (int oy = 0; oy < d.oh; ++oy)
          for (int ox = 0; ox < d.ow; ++ox) {
            double acc = bias.ptr()[o];
            for (int c = 0; c < d.c; ++c)
              for (int kz = 0; kz < d.kd; ++kz)
                for (int ky = 0; ky < d.kh; ++ky)
                  for (int kx = 0; kx < d.kw; ++kx) {
                    const int iz = oz * g.stride[0] - g.pad[0] + kz;
                    const int iy = oy * g.stride[1] - g.pad[1] + ky;
                    const int ix = ox * g.stride[2] - g.pad[2] + kx;
                    if (iz < 0 || iz >= d.d || iy < 0 || iy >= d.h || ix < 0 || ix >= d.w) continue;
                    const double xv =
                        x.ptr()[(((static_cast<std::size_t>(n) * d.c + c) * d.d + iz) * d.h + iy) * d.w + ix];
                    const double wv =
                        w.ptr()[(((static_cast<std::size_t>(o) * d.c + c) * d.kd + kz) * d.kh + ky) * d.kw + kx];
                    acc += xv * wv;
                  }
            out[idx++] = static_cast<T>(acc);
          }
  return Tensor<T>(std::move(out_shape), std::move(out));
}

template Tensor<float> conv_forward(const Tensor<float>&, const Tensor<float>&,
                                    const Tensor<float>&, const ConvGeom&);
template Tensor<double> conv_forward(const Tensor<double>&, const Tensor<double>&,
                                     const Tensor<double>&, const ConvGeom&);
template Tensor<float> conv_reference(const Tensor<float>&, const Tensor<float>&,
                                      const Tensor<float>&, const ConvGeom&);
template Tensor<double> conv_reference(const Tensor<double>&, const Tensor<double>&,
                                       const Tensor<double>&, const ConvGeom&);

}  // namespace relight::nn
