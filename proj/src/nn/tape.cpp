#include "holo/nn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "holo/core/error.hpp"

namespace holo::nn {

namespace {

void require_same(const Tensor4& a, const Tensor4& b, const char* op) {
  if (!a.same_shape(b))
    throw InvalidArgument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                          b.shape_string());
}

Tape& tape_of(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw InvalidArgument("ops on different tapes");
  return *a.tape;
}

// Elementwise unary op given f(x) and f'(x) expressed via x and y = f(x).
template <class F, class D>
Var unary(Var a, F f, D df) {
  Tape& t = *a.tape;
  const Tensor4& x = t.value(a.id);
  Tensor4 y = x;
  for (double& v : y.data()) v = f(v);
  const int ia = a.id;
  return t.record(std::move(y), [ia, df](Tape& tp, int self) {
    const Tensor4& x = tp.value(ia);
    const Tensor4& y = tp.value(self);
    const Tensor4& g = tp.grad(self);
    Tensor4& gx = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace

const Tensor4& Var::value() const { return tape->value(id); }
const Tensor4& Var::grad() const { return tape->grad(id); }

Var Tape::record(Tensor4 value, std::function<void(Tape&, int)> backward) {
  nodes_.push_back({std::move(value), {}, std::move(backward), nullptr});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor4 value) { return record(std::move(value), nullptr); }
Var Tape::input(Tensor4 value) { return record(std::move(value), nullptr); }

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  Var v = record(p.value, nullptr);
  nodes_[v.id].param = &p;
  param_nodes_[&p] = v.id;
  return v;
}

Tensor4& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) {
    const Tensor4& v = n.value;
    n.grad = Tensor4(v.n(), v.c(), v.h(), v.w());
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw InvalidArgument("backward: variable from another tape");
  if (nodes_[loss.id].value.size() != 1) throw InvalidArgument("backward: loss must be scalar");
  grad_buffer(loss.id)[0] += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
  for (Node& n : nodes_) {
    if (!n.param || n.grad.empty()) continue;
    if (!n.grad.all_finite())
      throw NumericalError("backward: non-finite gradient for " + n.param->name);
    if (!n.param->grad.same_shape(n.grad)) n.param->grad = Tensor4(n.grad.n(), n.grad.c(), n.grad.h(), n.grad.w());
    for (std::size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
  }
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "add");
  Tensor4 y = a.value();
  const Tensor4& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const int ia = a.id, ib = b.id;
  return t.record(std::move(y), [ia, ib](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    for (int id : {ia, ib}) {
      Tensor4& gx = tp.grad_buffer(id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "sub");
  Tensor4 y = a.value();
  const Tensor4& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  const int ia = a.id, ib = b.id;
  return t.record(std::move(y), [ia, ib](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    Tensor4& ga = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Tensor4& gb = tp.grad_buffer(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "mul");
  Tensor4 y = a.value();
  const Tensor4& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  const int ia = a.id, ib = b.id;
  return t.record(std::move(y), [ia, ib](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    const Tensor4& av = tp.value(ia);
    const Tensor4& bv = tp.value(ib);
    Tensor4& ga = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    Tensor4& gb = tp.grad_buffer(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var div(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "div");
  Tensor4 y = a.value();
  const Tensor4& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] /= bv[i];
  const int ia = a.id, ib = b.id;
  return t.record(std::move(y), [ia, ib](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    const Tensor4& bv = tp.value(ib);
    const Tensor4& yv = tp.value(self);
    Tensor4& ga = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
    Tensor4& gb = tp.grad_buffer(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * yv[i] / bv[i];
  });
}

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var one_minus(Var a) {
  return unary(a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var pow_clamped(Var a, double e) {
  return unary(
      a, [e](double x) { return x > 0 ? std::pow(x, e) : 0.0; },
      [e](double x, double) { return x > 0 ? e * std::pow(x, e - 1.0) : 0.0; });
}

Var leaky_relu(Var a, double slope) {
  return unary(
      a, [slope](double x) { return x > 0 ? x : slope * x; },
      [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var concat(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor4& av = a.value();
  const Tensor4& bv = b.value();
  if (av.n() != bv.n() || av.h() != bv.h() || av.w() != bv.w())
    throw InvalidArgument("concat: batch/spatial mismatch");
  Tensor4 y(av.n(), av.c() + bv.c(), av.h(), av.w());
  const std::size_t plane = static_cast<std::size_t>(av.h()) * av.w();
  for (int n = 0; n < av.n(); ++n) {
    std::copy_n(av.plane(n, 0), plane * av.c(), y.plane(n, 0));
    std::copy_n(bv.plane(n, 0), plane * bv.c(), y.plane(n, av.c()));
  }
  const int ia = a.id, ib = b.id, ca = av.c(), cb = bv.c();
  return t.record(std::move(y), [ia, ib, ca, cb, plane](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    Tensor4& ga = tp.grad_buffer(ia);
    Tensor4& gb = tp.grad_buffer(ib);
    for (int n = 0; n < g.n(); ++n) {
      const double* src = g.plane(n, 0);
      double* da = ga.plane(n, 0);
      for (std::size_t i = 0; i < plane * ca; ++i) da[i] += src[i];
      src = g.plane(n, ca);
      double* db = gb.plane(n, 0);
      for (std::size_t i = 0; i < plane * cb; ++i) db[i] += src[i];
    }
  });
}

Var channel(Var a, int c) {
  Tape& t = *a.tape;
  const Tensor4& av = a.value();
  if (c < 0 || c >= av.c()) throw InvalidArgument("channel: index out of range");
  Tensor4 y(av.n(), 1, av.h(), av.w());
  const std::size_t plane = static_cast<std::size_t>(av.h()) * av.w();
  for (int n = 0; n < av.n(); ++n) std::copy_n(av.plane(n, c), plane, y.plane(n, 0));
  const int ia = a.id;
  return t.record(std::move(y), [ia, c, plane](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    Tensor4& ga = tp.grad_buffer(ia);
    for (int n = 0; n < g.n(); ++n) {
      const double* src = g.plane(n, 0);
      double* dst = ga.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
    }
  });
}

Var conv2d(Var x, Var w, Var b, int dilation) {
  Tape& t = tape_of(x, w);
  tape_of(x, b);
  const Tensor4& xv = x.value();
  const Tensor4& wv = w.value();
  const Tensor4& bv = b.value();
  const int co_n = wv.n(), ci_n = wv.c(), k = wv.h();
  if (wv.w() != k || k % 2 == 0) throw InvalidArgument("conv2d: kernel must be square and odd");
  if (ci_n != xv.c())
    throw InvalidArgument("conv2d: input has " + std::to_string(xv.c()) + " channels, kernel expects " +
                          std::to_string(ci_n));
  if (bv.size() != static_cast<std::size_t>(co_n)) throw InvalidArgument("conv2d: bias size mismatch");
  if (dilation < 1) throw InvalidArgument("conv2d: dilation must be >= 1");
  const int H = xv.h(), W = xv.w(), half = k / 2;

  // Calls f(out_row, in_row, x0, x1, dx) for each tap's valid region.
  auto for_tap = [H, W, half, dilation](int ky, int kx, auto&& f) {
    const int dy = (ky - half) * dilation, dx = (kx - half) * dilation;
    const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
    const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
    for (int y = y0; y < y1; ++y) f(y, y + dy, x0, x1, dx);
  };

  Tensor4 out(xv.n(), co_n, H, W);
  for (int n = 0; n < xv.n(); ++n)
    for (int co = 0; co < co_n; ++co) {
      double* o = out.plane(n, co);
      std::fill_n(o, static_cast<std::size_t>(H) * W, bv[co]);
      for (int ci = 0; ci < ci_n; ++ci) {
        const double* in = xv.plane(n, ci);
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const double wt = wv(co, ci, ky, kx);
            if (wt == 0.0) continue;
            for_tap(ky, kx, [&](int y, int yi, int x0, int x1, int dx) {
              double* orow = o + static_cast<std::size_t>(y) * W;
              const double* irow = in + static_cast<std::size_t>(yi) * W + dx;
              for (int xx = x0; xx < x1; ++xx) orow[xx] += wt * irow[xx];
            });
          }
      }
    }

  const int ix = x.id, iw = w.id, ib = b.id;
  return t.record(std::move(out), [ix, iw, ib, k, H, W, for_tap](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    const Tensor4& xv = tp.value(ix);
    const Tensor4& wv = tp.value(iw);
    Tensor4& gx = tp.grad_buffer(ix);
    Tensor4& gw = tp.grad_buffer(iw);
    Tensor4& gb = tp.grad_buffer(ib);
    const int co_n = wv.n(), ci_n = wv.c();
    for (int n = 0; n < xv.n(); ++n)
      for (int co = 0; co < co_n; ++co) {
        const double* go = g.plane(n, co);
        double bsum = 0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i) bsum += go[i];
        gb[co] += bsum;
        for (int ci = 0; ci < ci_n; ++ci) {
          const double* in = xv.plane(n, ci);
          double* gin = gx.plane(n, ci);
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const double wt = wv(co, ci, ky, kx);
              double acc = 0;
              for_tap(ky, kx, [&](int y, int yi, int x0, int x1, int dx) {
                const double* grow = go + static_cast<std::size_t>(y) * W;
                const double* irow = in + static_cast<std::size_t>(yi) * W + dx;
                double* girow = gin + static_cast<std::size_t>(yi) * W + dx;
                for (int xx = x0; xx < x1; ++xx) {
                  acc += grow[xx] * irow[xx];
                  girow[xx] += wt * grow[xx];
                }
              });
              gw(co, ci, ky, kx) += acc;
            }
        }
      }
  });
}

Var avgpool2(Var x) {
  Tape& t = *x.tape;
  const Tensor4& xv = x.value();
  const int h = xv.h() / 2, w = xv.w() / 2;
  if (h < 1 || w < 1) throw InvalidArgument("avgpool2: input too small");
  Tensor4 y(xv.n(), xv.c(), h, w);
  for (int n = 0; n < xv.n(); ++n)
    for (int c = 0; c < xv.c(); ++c)
      for (int r = 0; r < h; ++r)
        for (int q = 0; q < w; ++q)
          y(n, c, r, q) = 0.25 * (xv(n, c, 2 * r, 2 * q) + xv(n, c, 2 * r + 1, 2 * q) +
                                  xv(n, c, 2 * r, 2 * q + 1) + xv(n, c, 2 * r + 1, 2 * q + 1));
  const int ix = x.id;
  return t.record(std::move(y), [ix](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    Tensor4& gx = tp.grad_buffer(ix);
    for (int n = 0; n < g.n(); ++n)
      for (int c = 0; c < g.c(); ++c)
        for (int r = 0; r < g.h(); ++r)
          for (int q = 0; q < g.w(); ++q) {
            const double v = 0.25 * g(n, c, r, q);
            gx(n, c, 2 * r, 2 * q) += v;
            gx(n, c, 2 * r + 1, 2 * q) += v;
            gx(n, c, 2 * r, 2 * q + 1) += v;
            gx(n, c, 2 * r + 1, 2 * q + 1) += v;
          }
  });
}

Var upsample2(Var x) {
  Tape& t = *x.tape;
  const Tensor4& xv = x.value();
  Tensor4 y(xv.n(), xv.c(), 2 * xv.h(), 2 * xv.w());
  for (int n = 0; n < y.n(); ++n)
    for (int c = 0; c < y.c(); ++c)
      for (int r = 0; r < y.h(); ++r)
        for (int q = 0; q < y.w(); ++q) y(n, c, r, q) = xv(n, c, r / 2, q / 2);
  const int ix = x.id;
  return t.record(std::move(y), [ix](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    Tensor4& gx = tp.grad_buffer(ix);
    for (int n = 0; n < g.n(); ++n)
      for (int c = 0; c < g.c(); ++c)
        for (int r = 0; r < g.h(); ++r)
          for (int q = 0; q < g.w(); ++q) gx(n, c, r / 2, q / 2) += g(n, c, r, q);
  });
}

Var dense(Var x, Var w, Var b) {
  Tape& t = tape_of(x, w);
  tape_of(x, b);
  const Tensor4& xv = x.value();
  const Tensor4& wv = w.value();
  const Tensor4& bv = b.value();
  const int batch = xv.n();
  const std::size_t features = xv.size() / batch;
  const int outs = wv.n();
  if (static_cast<std::size_t>(wv.c()) * wv.h() * wv.w() != features)
    throw InvalidArgument("dense: weight expects " + std::to_string(wv.size() / outs) +
                          " features, input has " + std::to_string(features));
  if (bv.size() != static_cast<std::size_t>(outs)) throw InvalidArgument("dense: bias size mismatch");
  Tensor4 y(batch, outs, 1, 1);
  for (int n = 0; n < batch; ++n)
    for (int o = 0; o < outs; ++o) {
      double s = bv[o];
      const double* xr = xv.data().data() + n * features;
      const double* wr = wv.data().data() + o * features;
      for (std::size_t f = 0; f < features; ++f) s += wr[f] * xr[f];
      y(n, o, 0, 0) = s;
    }
  const int ix = x.id, iw = w.id, ib = b.id;
  return t.record(std::move(y), [ix, iw, ib, features](Tape& tp, int self) {
    const Tensor4& g = tp.grad(self);
    const Tensor4& xv = tp.value(ix);
    const Tensor4& wv = tp.value(iw);
    Tensor4& gx = tp.grad_buffer(ix);
    Tensor4& gw = tp.grad_buffer(iw);
    Tensor4& gb = tp.grad_buffer(ib);
    for (int n = 0; n < g.n(); ++n)
      for (int o = 0; o < g.c(); ++o) {
        const double go = g(n, o, 0, 0);
        gb[o] += go;
        for (std::size_t f = 0; f < features; ++f) {
          gw[o * features + f] += go * xv[n * features + f];
          gx[n * features + f] += go * wv[o * features + f];
        }
      }
  });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  double s = 0;
  for (double v : a.value().data()) s += v;
  const int ia = a.id;
  return t.record(Tensor4(1, 1, 1, 1, s), [ia](Tape& tp, int self) {
    const double g = tp.grad(self)[0];
    Tensor4& ga = tp.grad_buffer(ia);
    for (double& v : ga.data()) v += g;
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var mae(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "mae");
  const Tensor4& av = a.value();
  const Tensor4& bv = b.value();
  double s = 0;
  for (std::size_t i = 0; i < av.size(); ++i) s += std::abs(av[i] - bv[i]);
  const double inv_n = 1.0 / static_cast<double>(av.size());
  const int ia = a.id, ib = b.id;
  return t.record(Tensor4(1, 1, 1, 1, s * inv_n), [ia, ib, inv_n](Tape& tp, int self) {
    const double g = tp.grad(self)[0] * inv_n;
    const Tensor4& av = tp.value(ia);
    const Tensor4& bv = tp.value(ib);
    Tensor4& ga = tp.grad_buffer(ia);
    Tensor4& gb = tp.grad_buffer(ib);
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double d = av[i] - bv[i];
      const double sgn = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
      ga[i] += g * sgn;
      gb[i] -= g * sgn;
    }
  });
}

namespace {

int reflect(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

// 1D correlation along rows (axis 1) or columns (axis 0) of every plane.
// Output index j reads source index src(j, t) with tap t.
Var filter_axis(Var x, const std::vector<double>& taps, int axis, bool same) {
  Tape& t = *x.tape;
  const Tensor4& xv = x.value();
  const int k = static_cast<int>(taps.size()), half = k / 2;
  const int len = axis == 1 ? xv.w() : xv.h();
  const int out_len = same ? len : len - k + 1;
  if (out_len < 1) throw InvalidArgument("filter: input smaller than the window");
  const int oh = axis == 1 ? xv.h() : out_len, ow = axis == 1 ? out_len : xv.w();
  auto src = [same, half, len](int j, int tap) { return same ? reflect(j + tap - half, len) : j + tap; };

  Tensor4 y(xv.n(), xv.c(), oh, ow);
  for (int n = 0; n < xv.n(); ++n)
    for (int c = 0; c < xv.c(); ++c)
      for (int r = 0; r < oh; ++r)
        for (int q = 0; q < ow; ++q) {
          double s = 0;
          for (int tp = 0; tp < k; ++tp)
            s += taps[tp] * (axis == 1 ? xv(n, c, r, src(q, tp)) : xv(n, c, src(r, tp), q));
          y(n, c, r, q) = s;
        }
  const int ix = x.id;
  return t.record(std::move(y), [ix, taps, axis, src](Tape& tape, int self) {
    const Tensor4& g = tape.grad(self);
    Tensor4& gx = tape.grad_buffer(ix);
    const int k = static_cast<int>(taps.size());
    for (int n = 0; n < g.n(); ++n)
      for (int c = 0; c < g.c(); ++c)
        for (int r = 0; r < g.h(); ++r)
          for (int q = 0; q < g.w(); ++q) {
            const double gv = g(n, c, r, q);
            for (int tp = 0; tp < k; ++tp) {
              if (axis == 1) gx(n, c, r, src(q, tp)) += taps[tp] * gv;
              else gx(n, c, src(r, tp), q) += taps[tp] * gv;
            }
          }
  });
}

}  // namespace

Var filter_valid(Var x, const std::vector<double>& taps) {
  return filter_axis(filter_axis(x, taps, 1, false), taps, 0, false);
}

Var filter_same_symmetric(Var x, const std::vector<double>& taps) {
  return filter_axis(filter_axis(x, taps, 1, true), taps, 0, true);
}

}  // namespace holo::nn
