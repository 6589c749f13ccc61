#include "vacgan/tape.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace vacgan {

namespace {

void require_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw NonFinite(std::string(op) + " produced NaN/Inf");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string(op) + ": " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
  }
}

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw DetachedOutput(std::string(op) + ": operands on different tapes");
  }
}

}  // namespace

Var Tape::leaf(Tensor value, bool requires_grad) {
  require_finite(value, "leaf");
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Tensor value, std::vector<int> inputs,
                 std::function<void(Tape&, int)> backward_rule) {
  Node node;
  node.value = std::move(value);
  node.inputs = std::move(inputs);
  node.backward_rule = std::move(backward_rule);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

int Tape::check(Var v) const {
  if (v.tape != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw DetachedOutput("variable not on this tape");
  }
  return v.id;
}

void Tape::backward(Var scalar_output) {
  const int out = check(scalar_output);
  if (nodes_[static_cast<std::size_t>(out)].value.size() != 1) {
    throw NotScalar("backward() requires a scalar output");
  }
  for (auto& node : nodes_) {
    node.grad = Tensor(node.value.shape());
  }
  nodes_[static_cast<std::size_t>(out)].grad[0] = 1.0;
  for (int id = out; id >= 0; --id) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (node.backward_rule) node.backward_rule(*this, id);
  }
}

void Tape::clear() { nodes_.clear(); }

namespace {

// Elementwise binary op with per-element backward weights.
template <typename Fwd, typename Bwd>
Var elementwise2(Var a, Var b, const char* name, Fwd fwd, Bwd bwd) {
  require_same_tape(a, b, name);
  Tape& tape = *a.tape;
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_shape(av, bv, name);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
  require_finite(out, name);
  const int ai = a.id, bi = b.id;
  return tape.record(std::move(out), {ai, bi}, [ai, bi, bwd](Tape& t, int self) {
    const Tensor& g = t.grad_ref(self);
    const Tensor& av2 = t.value_ref(ai);
    const Tensor& bv2 = t.value_ref(bi);
    Tensor& ga = t.grad_ref(ai);
    Tensor& gb = t.grad_ref(bi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto [da, db] = bwd(av2[i], bv2[i]);
      ga[i] += g[i] * da;
      gb[i] += g[i] * db;
    }
  });
}

template <typename Fwd, typename Bwd>
Var elementwise1(Var x, const char* name, Fwd fwd, Bwd bwd) {
  Tape& tape = *x.tape;
  const Tensor& xv = tape.value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
  require_finite(out, name);
  const int xi = x.id;
  return tape.record(std::move(out), {xi}, [xi, bwd](Tape& t, int self) {
    const Tensor& g = t.grad_ref(self);
    const Tensor& xv2 = t.value_ref(xi);
    const Tensor& yv = t.value_ref(self);
    Tensor& gx = t.grad_ref(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * bwd(xv2[i], yv[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  return elementwise2(a, b, "add", [](double x, double y) { return x + y; },
                      [](double, double) { return std::pair{1.0, 1.0}; });
}

Var sub(Var a, Var b) {
  return elementwise2(a, b, "sub", [](double x, double y) { return x - y; },
                      [](double, double) { return std::pair{1.0, -1.0}; });
}

Var mul(Var a, Var b) {
  return elementwise2(a, b, "mul", [](double x, double y) { return x * y; },
                      [](double x, double y) { return std::pair{y, x}; });
}

Var scale(Var a, double c) {
  return elementwise1(a, "scale", [c](double x) { return c * x; },
                      [c](double, double) { return c; });
}

Var add_const(Var a, double c) {
  return elementwise1(a, "add_const", [c](double x) { return x + c; },
                      [](double, double) { return 1.0; });
}

Var relu(Var x) {
  return elementwise1(x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
                      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var elu(Var x) {
  return elementwise1(x, "elu", [](double v) { return v > 0.0 ? v : std::expm1(v); },
                      [](double v, double y) { return v > 0.0 ? 1.0 : y + 1.0; });
}

Var sigmoid(Var x) {
  return elementwise1(x, "sigmoid",
                      [](double v) {
                        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                        : std::exp(v) / (1.0 + std::exp(v));
                      },
                      [](double, double y) { return y * (1.0 - y); });
}

Var tanh_(Var x) {
  return elementwise1(x, "tanh", [](double v) { return std::tanh(v); },
                      [](double, double y) { return 1.0 - y * y; });
}

Var abs_(Var x) {
  return elementwise1(x, "abs", [](double v) { return std::fabs(v); },
                      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var square(Var x) {
  return elementwise1(x, "square", [](double v) { return v * v; },
                      [](double v, double) { return 2.0 * v; });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  Tape& tape = *a.tape;
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.shape()[1] != bv.shape()[0]) {
    throw ShapeMismatch("matmul: " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
  }
  const std::size_t m = av.shape()[0], k = av.shape()[1], n = bv.shape()[1];
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av.at2(i, p);
      for (std::size_t j = 0; j < n; ++j) out.at2(i, j) += aip * bv.at2(p, j);
    }
  require_finite(out, "matmul");
  const int ai = a.id, bi = b.id;
  return tape.record(std::move(out), {ai, bi}, [ai, bi, m, k, n](Tape& t, int self) {
    const Tensor& g = t.grad_ref(self);
    const Tensor& av2 = t.value_ref(ai);
    const Tensor& bv2 = t.value_ref(bi);
    Tensor& ga = t.grad_ref(ai);
    Tensor& gb = t.grad_ref(bi);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double gij = g.at2(i, j);
        for (std::size_t p = 0; p < k; ++p) {
          ga.at2(i, p) += gij * bv2.at2(p, j);
          gb.at2(p, j) += gij * av2.at2(i, p);
        }
      }
  });
}

Var affine(Var x, Var w, Var b) {
  require_same_tape(x, w, "affine");
  require_same_tape(x, b, "affine");
  Tape& tape = *x.tape;
  const Tensor& xv = tape.value(x);
  const Tensor& wv = tape.value(w);
  const Tensor& bv = tape.value(b);
  if (xv.rank() != 2 || wv.rank() != 2 || bv.rank() != 1 || xv.shape()[1] != wv.shape()[0] ||
      bv.shape()[0] != wv.shape()[1]) {
    throw ShapeMismatch("affine: x" + shape_str(xv.shape()) + " w" + shape_str(wv.shape()) +
                        " b" + shape_str(bv.shape()));
  }
  const std::size_t n = xv.shape()[0], in = xv.shape()[1], out_dim = wv.shape()[1];
  Tensor out({n, out_dim});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < out_dim; ++j) {
      double acc = bv[j];
      for (std::size_t p = 0; p < in; ++p) acc += xv.at2(i, p) * wv.at2(p, j);
      out.at2(i, j) = acc;
    }
  require_finite(out, "affine");
  const int xi = x.id, wi = w.id, bi = b.id;
  return tape.record(std::move(out), {xi, wi, bi},
                     [xi, wi, bi, n, in, out_dim](Tape& t, int self) {
                       const Tensor& g = t.grad_ref(self);
                       const Tensor& xv2 = t.value_ref(xi);
                       const Tensor& wv2 = t.value_ref(wi);
                       Tensor& gx = t.grad_ref(xi);
                       Tensor& gw = t.grad_ref(wi);
                       Tensor& gb = t.grad_ref(bi);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t j = 0; j < out_dim; ++j) {
                           const double gij = g.at2(i, j);
                           gb[j] += gij;
                           for (std::size_t p = 0; p < in; ++p) {
                             gx.at2(i, p) += gij * wv2.at2(p, j);
                             gw.at2(p, j) += gij * xv2.at2(i, p);
                           }
                         }
                     });
}

namespace {

struct ConvDims {
  std::size_t n, cin, h, w, f, kh, kw, oh, ow;
  long pad_top, pad_left;
  int stride;
};

ConvDims conv_dims(const Tensor& x, const Tensor& k, int stride, Padding padding) {
  if (x.rank() != 4 || k.rank() != 4 || x.shape()[1] != k.shape()[1]) {
    throw ShapeMismatch("conv2d: x" + shape_str(x.shape()) + " w" + shape_str(k.shape()));
  }
  if (stride != 1 && stride != 2) throw ShapeMismatch("conv2d: stride must be 1 or 2");
  ConvDims d;
  d.n = x.shape()[0];
  d.cin = x.shape()[1];
  d.h = x.shape()[2];
  d.w = x.shape()[3];
  d.f = k.shape()[0];
  d.kh = k.shape()[2];
  d.kw = k.shape()[3];
  d.stride = stride;
  const auto s = static_cast<std::size_t>(stride);
  if (padding == Padding::same) {
    d.oh = (d.h + s - 1) / s;
    d.ow = (d.w + s - 1) / s;
    const long pad_h = std::max<long>(0, static_cast<long>((d.oh - 1) * s + d.kh) -
                                             static_cast<long>(d.h));
    const long pad_w = std::max<long>(0, static_cast<long>((d.ow - 1) * s + d.kw) -
                                             static_cast<long>(d.w));
    d.pad_top = pad_h / 2;
    d.pad_left = pad_w / 2;
  } else {
    if (d.h < d.kh || d.w < d.kw) throw ShapeMismatch("conv2d: kernel larger than input");
    d.oh = (d.h - d.kh) / s + 1;
    d.ow = (d.w - d.kw) / s + 1;
    d.pad_top = 0;
    d.pad_left = 0;
  }
  return d;
}

}  // namespace

Var conv2d(Var x, Var w, Var b, int stride, Padding padding) {
  require_same_tape(x, w, "conv2d");
  require_same_tape(x, b, "conv2d");
  Tape& tape = *x.tape;
  const Tensor& xv = tape.value(x);
  const Tensor& wv = tape.value(w);
  const Tensor& bv = tape.value(b);
  const ConvDims d = conv_dims(xv, wv, stride, padding);
  if (bv.rank() != 1 || bv.shape()[0] != d.f) {
    throw ShapeMismatch("conv2d: bias " + shape_str(bv.shape()));
  }
  Tensor out({d.n, d.f, d.oh, d.ow});
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t f = 0; f < d.f; ++f)
      for (std::size_t oy = 0; oy < d.oh; ++oy)
        for (std::size_t ox = 0; ox < d.ow; ++ox) {
          double acc = bv[f];
          for (std::size_t c = 0; c < d.cin; ++c)
            for (std::size_t ky = 0; ky < d.kh; ++ky) {
              const long iy = static_cast<long>(oy) * d.stride + static_cast<long>(ky) -
                              d.pad_top;
              if (iy < 0 || iy >= static_cast<long>(d.h)) continue;
              for (std::size_t kx = 0; kx < d.kw; ++kx) {
                const long ix = static_cast<long>(ox) * d.stride + static_cast<long>(kx) -
                                d.pad_left;
                if (ix < 0 || ix >= static_cast<long>(d.w)) continue;
                acc += xv.at4(n, c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) *
                       wv.at4(f, c, ky, kx);
              }
            }
          out.at4(n, f, oy, ox) = acc;
        }
  require_finite(out, "conv2d");
  const int xi = x.id, wi = w.id, bi = b.id;
  return tape.record(std::move(out), {xi, wi, bi}, [xi, wi, bi, d](Tape& t, int self) {
    const Tensor& g = t.grad_ref(self);
    const Tensor& xv2 = t.value_ref(xi);
    const Tensor& wv2 = t.value_ref(wi);
    Tensor& gx = t.grad_ref(xi);
    Tensor& gw = t.grad_ref(wi);
    Tensor& gb = t.grad_ref(bi);
    for (std::size_t n = 0; n < d.n; ++n)
      for (std::size_t f = 0; f < d.f; ++f)
        for (std::size_t oy = 0; oy < d.oh; ++oy)
          for (std::size_t ox = 0; ox < d.ow; ++ox) {
            const double go = g.at4(n, f, oy, ox);
            gb[f] += go;
            for (std::size_t c = 0; c < d.cin; ++c)
              for (std::size_t ky = 0; ky < d.kh; ++ky) {
                const long iy = static_cast<long>(oy) * d.stride + static_cast<long>(ky) -
                                d.pad_top;
                if (iy < 0 || iy >= static_cast<long>(d.h)) continue;
                for (std::size_t kx = 0; kx < d.kw; ++kx) {
                  const long ix = static_cast<long>(ox) * d.stride + static_cast<long>(kx) -
                                  d.pad_left;
                  if (ix < 0 || ix >= static_cast<long>(d.w)) continue;
                  const auto uy = static_cast<std::size_t>(iy);
                  const auto ux = static_cast<std::size_t>(ix);
                  gx.at4(n, c, uy, ux) += go * wv2.at4(f, c, ky, kx);
                  gw.at4(f, c, ky, kx) += go * xv2.at4(n, c, uy, ux);
                }
              }
          }
  });
}

Var maxpool2x2(Var x) {
  Tape& tape = *x.tape;
  const Tensor& xv = tape.value(x);
  if (xv.rank() != 4 || xv.shape()[2] % 2 != 0 || xv.shape()[3] % 2 != 0) {
    throw ShapeMismatch("maxpool2x2: need NCHW with even H,W, got " + shape_str(xv.shape()));
  }
  const std::size_t n = xv.shape()[0], c = xv.shape()[1], h = xv.shape()[2], w = xv.shape()[3];
  Tensor out({n, c, h / 2, w / 2});
  std::vector<std::size_t> argmax(out.size());
  std::size_t o = 0;
  for (std::size_t ni = 0; ni < n; ++ni)
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t y = 0; y < h; y += 2)
        for (std::size_t xw = 0; xw < w; xw += 2) {
          double best = xv.at4(ni, ci, y, xw);
          std::size_t best_idx = ((ni * c + ci) * h + y) * w + xw;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const double v = xv.at4(ni, ci, y + static_cast<std::size_t>(dy),
                                      xw + static_cast<std::size_t>(dx));
              if (v > best) {
                best = v;
                best_idx = ((ni * c + ci) * h + y + static_cast<std::size_t>(dy)) * w + xw +
                           static_cast<std::size_t>(dx);
              }
            }
          out[o] = best;
          argmax[o] = best_idx;
          ++o;
        }
  require_finite(out, "maxpool2x2");
  const int xi = x.id;
  return tape.record(std::move(out), {xi},
                     [xi, argmax = std::move(argmax)](Tape& t, int self) {
                       const Tensor& g = t.grad_ref(self);
                       Tensor& gx = t.grad_ref(xi);
                       for (std::size_t i = 0; i < g.size(); ++i) gx[argmax[i]] += g[i];
                     });
}

Var unpool2x2(Var x) {
  Tape& tape = *x.tape;
  const Tensor& xv = tape.value(x);
  if (xv.rank() != 4) throw ShapeMismatch("unpool2x2: need NCHW, got " + shape_str(xv.shape()));
  const std::size_t n = xv.shape()[0], c = xv.shape()[1], h = xv.shape()[2], w = xv.shape()[3];
  Tensor out({n, c, h * 2, w * 2});
  for (std::size_t ni = 0; ni < n; ++ni)
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xw = 0; xw < w; ++xw) {
          const double v = xv.at4(ni, ci, y, xw);
          out.at4(ni, ci, 2 * y, 2 * xw) = v;
          out.at4(ni, ci, 2 * y, 2 * xw + 1) = v;
          out.at4(ni, ci, 2 * y + 1, 2 * xw) = v;
          out.at4(ni, ci, 2 * y + 1, 2 * xw + 1) = v;
        }
  const int xi = x.id;
  return tape.record(std::move(out), {xi}, [xi, n, c, h, w](Tape& t, int self) {
    const Tensor& g = t.grad_ref(self);
    Tensor& gx = t.grad_ref(xi);
    for (std::size_t ni = 0; ni < n; ++ni)
      for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t xw = 0; xw < w; ++xw) {
            gx.at4(ni, ci, y, xw) += g.at4(ni, ci, 2 * y, 2 * xw) +
                                     g.at4(ni, ci, 2 * y, 2 * xw + 1) +
                                     g.at4(ni, ci, 2 * y + 1, 2 * xw) +
                                     g.at4(ni, ci, 2 * y + 1, 2 * xw + 1);
          }
  });
}

Var mean(Var x) {
  Tape& tape = *x.tape;
  const Tensor& xv = tape.value(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i];
  const double inv_n = 1.0 / static_cast<double>(xv.size());
  Tensor out = Tensor::scalar(acc * inv_n);
  require_finite(out, "mean");
  const int xi = x.id;
  return tape.record(std::move(out), {xi}, [xi, inv_n](Tape& t, int self) {
    const double g = t.grad_ref(self)[0];
    Tensor& gx = t.grad_ref(xi);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g * inv_n;
  });
}

Var sum(Var x) {
  Tape& tape = *x.tape;
  const Tensor& xv = tape.value(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i];
  Tensor out = Tensor::scalar(acc);
  require_finite(out, "sum");
  const int xi = x.id;
  return tape.record(std::move(out), {xi}, [xi](Tape& t, int self) {
    const double g = t.grad_ref(self)[0];
    Tensor& gx = t.grad_ref(xi);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Var concat(Var a, Var b, std::size_t axis) {
  require_same_tape(a, b, "concat");
  Tape& tape = *a.tape;
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  if (av.rank() != bv.rank() || axis >= av.rank()) {
    throw ShapeMismatch("concat: rank mismatch or bad axis");
  }
  for (std::size_t i = 0; i < av.rank(); ++i) {
    if (i != axis && av.shape()[i] != bv.shape()[i]) {
      throw ShapeMismatch("concat: " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()) +
                          " on axis " + std::to_string(axis));
    }
  }
  std::vector<std::size_t> out_shape = av.shape();
  out_shape[axis] += bv.shape()[axis];
  // Treat tensors as (outer, axis_extent, inner) blocks.
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= av.shape()[i];
  for (std::size_t i = axis + 1; i < av.rank(); ++i) inner *= av.shape()[i];
  const std::size_t a_axis = av.shape()[axis], b_axis = bv.shape()[axis];
  Tensor out(out_shape);
  for (std::size_t of = 0; of < outer; ++of) {
    double* dst = out.data() + of * (a_axis + b_axis) * inner;
    const double* sa = av.data() + of * a_axis * inner;
    const double* sb = bv.data() + of * b_axis * inner;
    std::copy(sa, sa + a_axis * inner, dst);
    std::copy(sb, sb + b_axis * inner, dst + a_axis * inner);
  }
  const int ai = a.id, bi = b.id;
  return tape.record(std::move(out), {ai, bi},
                     [ai, bi, outer, inner, a_axis, b_axis](Tape& t, int self) {
                       const Tensor& g = t.grad_ref(self);
                       Tensor& ga = t.grad_ref(ai);
                       Tensor& gb = t.grad_ref(bi);
                       for (std::size_t of = 0; of < outer; ++of) {
                         const double* src = g.data() + of * (a_axis + b_axis) * inner;
                         for (std::size_t i = 0; i < a_axis * inner; ++i)
                           ga[of * a_axis * inner + i] += src[i];
                         for (std::size_t i = 0; i < b_axis * inner; ++i)
                           gb[of * b_axis * inner + i] += src[a_axis * inner + i];
                       }
                     });
}

Var reshape(Var x, std::vector<std::size_t> shape) {
  Tape& tape = *x.tape;
  Tensor out = tape.value(x).reshaped(std::move(shape));
  const int xi = x.id;
  return tape.record(std::move(out), {xi}, [xi](Tape& t, int self) {
    const Tensor& g = t.grad_ref(self);
    Tensor& gx = t.grad_ref(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var bce(Var prediction, const Tensor& target, double eps) {
  Tape& tape = *prediction.tape;
  const Tensor& pv = tape.value(prediction);
  require_same_shape(pv, target, "bce");
  const std::size_t n = pv.size();
  double acc = 0.0;
  std::vector<double> clamped(n);
  for (std::size_t i = 0; i < n; ++i) {
    clamped[i] = std::clamp(pv[i], eps, 1.0 - eps);
    acc += -target[i] * std::log(clamped[i]) - (1.0 - target[i]) * std::log(1.0 - clamped[i]);
  }
  Tensor out = Tensor::scalar(acc / static_cast<double>(n));
  require_finite(out, "bce");
  const int pi = prediction.id;
  return tape.record(std::move(out), {pi},
                     [pi, target, clamped = std::move(clamped), eps, n](Tape& t, int self) {
                       const double g = t.grad_ref(self)[0] / static_cast<double>(n);
                       const Tensor& pv2 = t.value_ref(pi);
                       Tensor& gp = t.grad_ref(pi);
                       for (std::size_t i = 0; i < n; ++i) {
                         // Gradient is zero where the clamp is active.
                         if (pv2[i] <= eps || pv2[i] >= 1.0 - eps) continue;
                         gp[i] += g * (clamped[i] - target[i]) /
                                  (clamped[i] * (1.0 - clamped[i]));
                       }
                     });
}

Var mse_loss(Var v, Var reconstruction) {
  return mean(square(sub(v, reconstruction)));
}

GradCheckResult grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& point,
                           double step, double tol) {
  Tape tape;
  Var x = tape.leaf(point);
  Var y = f(tape, x);
  tape.backward(y);
  const Tensor analytic = tape.grad(x);

  GradCheckResult result;
  for (std::size_t i = 0; i < point.size(); ++i) {
    Tensor plus = point, minus = point;
    plus[i] += step;
    minus[i] -= step;
    Tape tp, tm;
    const double fp = tp.value(f(tp, tp.leaf(plus))).item();
    const double fm = tm.value(f(tm, tm.leaf(minus))).item();
    const double numeric = (fp - fm) / (2.0 * step);
    if (!std::isfinite(numeric) || !std::isfinite(analytic[i])) {
      throw NonFinite("grad_check: non-finite gradient estimate");
    }
    const double abs_err = std::fabs(numeric - analytic[i]);
    if (abs_err <= 1e-8) continue;  // absolute floor for near-zero entries
    const double denom = std::max(std::fabs(numeric), std::fabs(analytic[i]));
    result.max_rel_error = std::max(result.max_rel_error, abs_err / denom);
  }
  result.pass = result.max_rel_error <= tol;
  return result;
}

}  // namespace vacgan
