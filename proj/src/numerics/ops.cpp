// Copyright 2026 The sidrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sidrec/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "sidrec/common/error.hpp"
#include "sidrec/numerics/kernels.hpp"

namespace sidrec::ops {
namespace {

template <typename Real>
void require_rank2(const Tensor<Real>& t, const char* op) {
  if (t.rank() != 2) {
    fail(ErrorKind::kDimension, std::string(op) + ": expected a matrix, got " + shape_string(t.shape));
  }
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  fail(ErrorKind::kDimension,
       std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

template <typename Real>
void add_into(Tensor<Real>& dst, const Tensor<Real>& src, Real factor = Real(1)) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += factor * src.data[i];
}

}  // namespace

template <typename Real>
Var<Real> matmul(Var<Real> a, Var<Real> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  if (av.shape[1] != bv.shape[0]) mismatch("matmul", av.shape, bv.shape);
  const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[1];
  Tensor<Real> out(Shape{m, n});
  kernels::gemm(av.data.data(), bv.data.data(), out.data.data(), m, k, n, false);
  return a.tape->record("matmul", std::move(out), {a, b},
                        [ai = a.id, bi = b.id, m, k, n](Tape<Real>& t, int self) {
                          const auto& g = t.grad(self);
                          if (t.requires_grad(ai)) {
                            kernels::gemm_nt(g.data.data(), t.value(bi).data.data(),
                                             t.grad(ai).data.data(), m, n, k, true);
                          }
                          if (t.requires_grad(bi)) {
                            kernels::gemm_tn(t.value(ai).data.data(), g.data.data(),
                                             t.grad(bi).data.data(), m, k, n, true);
                          }
                        });
}

template <typename Real>
Var<Real> matmul_nt(Var<Real> a, Var<Real> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  require_rank2(av, "matmul_nt");
  require_rank2(bv, "matmul_nt");
  if (av.shape[1] != bv.shape[1]) mismatch("matmul_nt", av.shape, bv.shape);
  const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[0];
  Tensor<Real> out(Shape{m, n});
  kernels::gemm_nt(av.data.data(), bv.data.data(), out.data.data(), m, k, n, false);
  return a.tape->record("matmul_nt", std::move(out), {a, b},
                        [ai = a.id, bi = b.id, m, k, n](Tape<Real>& t, int self) {
                          const auto& g = t.grad(self);
                          if (t.requires_grad(ai)) {
                            kernels::gemm(g.data.data(), t.value(bi).data.data(),
                                          t.grad(ai).data.data(), m, n, k, true);
                          }
                          if (t.requires_grad(bi)) {
                            kernels::gemm_tn(g.data.data(), t.value(ai).data.data(),
                                             t.grad(bi).data.data(), m, n, k, true);
                          }
                        });
}

template <typename Real>
Var<Real> add(Var<Real> a, Var<Real> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.shape != bv.shape) mismatch("add", av.shape, bv.shape);
  Tensor<Real> out = av;
  add_into(out, bv);
  return a.tape->record("add", std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape<Real>& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ai)) add_into(t.grad(ai), g);
    if (t.requires_grad(bi)) add_into(t.grad(bi), g);
  });
}

template <typename Real>
Var<Real> sub(Var<Real> a, Var<Real> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.shape != bv.shape) mismatch("sub", av.shape, bv.shape);
  Tensor<Real> out = av;
  add_into(out, bv, Real(-1));
  return a.tape->record("sub", std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape<Real>& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ai)) add_into(t.grad(ai), g);
    if (t.requires_grad(bi)) add_into(t.grad(bi), g, Real(-1));
  });
}

template <typename Real>
Var<Real> scale(Var<Real> a, Real factor) {
  Tensor<Real> out = a.value();
  for (auto& v : out.data) v *= factor;
  return a.tape->record("scale", std::move(out), {a}, [ai = a.id, factor](Tape<Real>& t, int self) {
    add_into(t.grad(ai), t.grad(self), factor);
  });
}

template <typename Real>
Var<Real> add_bias(Var<Real> x, Var<Real> bias) {
  const auto& xv = x.value();
  const auto& bv = bias.value();
  require_rank2(xv, "add_bias");
  if (bv.size() != xv.shape[1]) mismatch("add_bias", xv.shape, bv.shape);
  const std::size_t rows = xv.shape[0], cols = xv.shape[1];
  Tensor<Real> out = xv;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out.data[r * cols + c] += bv.data[c];
  }
  return x.tape->record("add_bias", std::move(out), {x, bias},
                        [xi = x.id, bi = bias.id, rows, cols](Tape<Real>& t, int self) {
                          const auto& g = t.grad(self);
                          if (t.requires_grad(xi)) add_into(t.grad(xi), g);
                          if (t.requires_grad(bi)) {
                            auto& gb = t.grad(bi);
                            for (std::size_t r = 0; r < rows; ++r) {
                              for (std::size_t c = 0; c < cols; ++c) gb.data[c] += g.data[r * cols + c];
                            }
                          }
                        });
}

template <typename Real>
Var<Real> relu(Var<Real> x) {
  Tensor<Real> out = x.value();
  for (auto& v : out.data) v = v > Real(0) ? v : Real(0);
  return x.tape->record("relu", std::move(out), {x}, [xi = x.id](Tape<Real>& t, int self) {
    const auto& g = t.grad(self);
    const auto& xv = t.value(xi);
    auto& gx = t.grad(xi);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      if (xv.data[i] > Real(0)) gx.data[i] += g.data[i];
    }
  });
}

template <typename Real>
Var<Real> gelu(Var<Real> x) {
  constexpr Real kC = Real(0.7978845608028654);  // sqrt(2/pi)
  constexpr Real kA = Real(0.044715);
  const auto& xv = x.value();
  Tensor<Real> out(xv.shape);
  for (std::size_t i = 0; i < xv.data.size(); ++i) {
    const Real v = xv.data[i];
    out.data[i] = Real(0.5) * v * (Real(1) + std::tanh(kC * (v + kA * v * v * v)));
  }
  return x.tape->record("gelu", std::move(out), {x}, [xi = x.id](Tape<Real>& t, int self) {
    const auto& g = t.grad(self);
    const auto& xv = t.value(xi);
    auto& gx = t.grad(xi);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const Real v = xv.data[i];
      const Real th = std::tanh(kC * (v + kA * v * v * v));
      const Real d = Real(0.5) * (Real(1) + th) +
                     Real(0.5) * v * (Real(1) - th * th) * kC * (Real(1) + Real(3) * kA * v * v);
      gx.data[i] += g.data[i] * d;
    }
  });
}

template <typename Real>
Var<Real> layer_norm(Var<Real> x, Var<Real> gain, Var<Real> bias, Real eps) {
  const auto& xv = x.value();
  require_rank2(xv, "layer_norm");
  const std::size_t rows = xv.shape[0], cols = xv.shape[1];
  if (gain.value().size() != cols) mismatch("layer_norm", xv.shape, gain.value().shape);
  if (bias.value().size() != cols) mismatch("layer_norm", xv.shape, bias.value().shape);
  auto normed = std::make_shared<Tensor<Real>>(xv.shape);
  auto rstd = std::make_shared<std::vector<Real>>(rows);
  Tensor<Real> out(xv.shape);
  const auto& gv = gain.value();
  const auto& bv = bias.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* xr = xv.data.data() + r * cols;
    Real mean = 0;
    for (std::size_t c = 0; c < cols; ++c) mean += xr[c];
    mean /= static_cast<Real>(cols);
    Real var = 0;
    for (std::size_t c = 0; c < cols; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= static_cast<Real>(cols);
    const Real inv = Real(1) / std::sqrt(var + eps);
    (*rstd)[r] = inv;
    for (std::size_t c = 0; c < cols; ++c) {
      const Real h = (xr[c] - mean) * inv;
      normed->data[r * cols + c] = h;
      out.data[r * cols + c] = h * gv.data[c] + bv.data[c];
    }
  }
  return x.tape->record(
      "layer_norm", std::move(out), {x, gain, bias},
      [xi = x.id, gi = gain.id, bi = bias.id, normed, rstd, rows, cols](Tape<Real>& t, int self) {
        const auto& g = t.grad(self);
        const auto& gv = t.value(gi);
        if (t.requires_grad(gi)) {
          auto& gg = t.grad(gi);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) gg.data[c] += g.data[r * cols + c] * normed->data[r * cols + c];
          }
        }
        if (t.requires_grad(bi)) {
          auto& gb = t.grad(bi);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) gb.data[c] += g.data[r * cols + c];
          }
        }
        if (t.requires_grad(xi)) {
          auto& gx = t.grad(xi);
          std::vector<Real> dh(cols);
          for (std::size_t r = 0; r < rows; ++r) {
            Real mean_dh = 0, mean_dh_h = 0;
            for (std::size_t c = 0; c < cols; ++c) {
              dh[c] = g.data[r * cols + c] * gv.data[c];
              mean_dh += dh[c];
              mean_dh_h += dh[c] * normed->data[r * cols + c];
            }
            mean_dh /= static_cast<Real>(cols);
            mean_dh_h /= static_cast<Real>(cols);
            for (std::size_t c = 0; c < cols; ++c) {
              gx.data[r * cols + c] +=
                  (*rstd)[r] * (dh[c] - mean_dh - normed->data[r * cols + c] * mean_dh_h);
            }
          }
        }
      });
}

template <typename Real>
Var<Real> concat_cols(std::span<const Var<Real>> parts) {
  if (parts.empty()) fail(ErrorKind::kDimension, "concat_cols: no inputs");
  Tape<Real>* tape = parts[0].tape;
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::vector<int> ids;
  bool needs = false;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank2(p.value(), "concat_cols");
    if (p.value().rows() != rows) mismatch("concat_cols", parts[0].shape(), p.shape());
    widths.push_back(p.value().shape[1]);
    ids.push_back(p.id);
    needs = needs || tape->requires_grad(p.id);
    total += widths.back();
  }
  Tensor<Real> out(Shape{rows, total});
  std::size_t col = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.data.data() + r * widths[k], widths[k], out.data.data() + r * total + col);
    }
    col += widths[k];
  }
  return tape->record("concat_cols", std::move(out), needs,
                      [ids, widths, rows, total](Tape<Real>& t, int self) {
                        const auto& g = t.grad(self);
                        std::size_t col = 0;
                        for (std::size_t k = 0; k < ids.size(); ++k) {
                          if (t.requires_grad(ids[k])) {
                            auto& gk = t.grad(ids[k]);
                            for (std::size_t r = 0; r < rows; ++r) {
                              for (std::size_t c = 0; c < widths[k]; ++c) {
                                gk.data[r * widths[k] + c] += g.data[r * total + col + c];
                              }
                            }
                          }
                          col += widths[k];
                        }
                      });
}

template <typename Real>
Var<Real> gather_rows(Var<Real> table, std::span<const std::size_t> rows) {
  const auto& tv = table.value();
  const std::size_t n_rows = tv.rows();
  const std::size_t cols = tv.cols();
  Tensor<Real> out(Shape{rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n_rows) {
      fail(ErrorKind::kIndex, "gather_rows: row " + std::to_string(rows[i]) + " out of range for " +
                                  shape_string(tv.shape));
    }
    std::copy_n(tv.data.data() + rows[i] * cols, cols, out.data.data() + i * cols);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return table.tape->record("gather_rows", std::move(out), {table},
                            [ti = table.id, idx = std::move(idx), cols](Tape<Real>& t, int self) {
                              const auto& g = t.grad(self);
                              auto& gt = t.grad(ti);
                              for (std::size_t i = 0; i < idx.size(); ++i) {
                                for (std::size_t c = 0; c < cols; ++c) {
                                  gt.data[idx[i] * cols + c] += g.data[i * cols + c];
                                }
                              }
                            });
}

template <typename Real>
Var<Real> sum_squares(Var<Real> x) {
  Real s = 0;
  for (Real v : x.value().data) s += v * v;
  return x.tape->record("sum_squares", Tensor<Real>::scalar(s), {x}, [xi = x.id](Tape<Real>& t, int self) {
    const Real g = t.grad(self).data[0];
    const auto& xv = t.value(xi);
    auto& gx = t.grad(xi);
    for (std::size_t i = 0; i < xv.data.size(); ++i) gx.data[i] += Real(2) * g * xv.data[i];
  });
}

template <typename Real>
Var<Real> weighted_sum(std::span<const Var<Real>> scalars, std::span<const Real> weights) {
  if (scalars.empty() || scalars.size() != weights.size()) {
    fail(ErrorKind::kDimension, "weighted_sum: need one weight per scalar");
  }
  Tape<Real>* tape = scalars[0].tape;
  Real s = 0;
  bool needs = false;
  std::vector<int> ids;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    s += weights[i] * scalars[i].value().item();
    needs = needs || tape->requires_grad(scalars[i].id);
    ids.push_back(scalars[i].id);
  }
  std::vector<Real> w(weights.begin(), weights.end());
  return tape->record("weighted_sum", Tensor<Real>::scalar(s), needs,
                      [ids = std::move(ids), w = std::move(w)](Tape<Real>& t, int self) {
                        const Real g = t.grad(self).data[0];
                        for (std::size_t i = 0; i < ids.size(); ++i) {
                          if (t.requires_grad(ids[i])) t.grad(ids[i]).data[0] += w[i] * g;
                        }
                      });
}

template <typename Real>
Var<Real> stop_gradient(Var<Real> x) {
  return x.tape->record("stop_gradient", x.value(), false, nullptr);
}

template <typename Real>
Var<Real> causal_attention(Var<Real> qkv, std::span<const std::size_t> offsets, std::size_t heads) {
  const auto& qv = qkv.value();
  require_rank2(qv, "causal_attention");
  if (qv.shape[1] % 3 != 0 || heads == 0 || (qv.shape[1] / 3) % heads != 0) {
    fail(ErrorKind::kDimension, "causal_attention: width " + std::to_string(qv.shape[1]) +
                                    " not divisible into 3 x heads=" + std::to_string(heads));
  }
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != qv.shape[0]) {
    fail(ErrorKind::kDimension, "causal_attention: sequence offsets do not cover " + shape_string(qv.shape));
  }
  const std::size_t dim = qv.shape[1] / 3;
  Tensor<Real> out(Shape{qv.shape[0], dim});
  auto probs = std::make_shared<std::vector<Real>>();
  kernels::attention_forward(qv.data.data(), offsets, dim, heads, out.data.data(), *probs);
  std::vector<std::size_t> offs(offsets.begin(), offsets.end());
  return qkv.tape->record("causal_attention", std::move(out), {qkv},
                          [qi = qkv.id, offs = std::move(offs), dim, heads, probs](Tape<Real>& t, int self) {
                            kernels::attention_backward(t.value(qi).data.data(),
                                                        std::span<const std::size_t>(offs), dim, heads,
                                                        *probs, t.grad(self).data.data(),
                                                        t.grad(qi).data.data());
                          });
}

namespace {

template <typename Real>
Var<Real> cross_entropy_impl(Var<Real> logits, std::span<const std::size_t> targets,
                             std::span<const std::size_t> excluded) {
  const auto& lv = logits.value();
  require_rank2(lv, "softmax_cross_entropy");
  const std::size_t rows = lv.shape[0], cols = lv.shape[1];
  if (targets.size() != rows) {
    fail(ErrorKind::kDimension, "softmax_cross_entropy: " + std::to_string(targets.size()) +
                                    " targets for " + shape_string(lv.shape));
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> excl(rows, kNone);
  if (!excluded.empty()) std::copy(excluded.begin(), excluded.end(), excl.begin());
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] >= cols) {
      fail(ErrorKind::kIndex, "softmax_cross_entropy: target " + std::to_string(targets[r]) +
                                  " out of range for " + std::to_string(cols) + " classes");
    }
    if (targets[r] == excl[r]) fail(ErrorKind::kIndex, "softmax_cross_entropy: target is excluded");
  }
  // Per-row log-partition, saved for backward.
  auto lse = std::make_shared<std::vector<Real>>(rows);
  Real total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* lr = lv.data.data() + r * cols;
    Real mx = -std::numeric_limits<Real>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      if (c != excl[r]) mx = std::max(mx, lr[c]);
    }
    Real z = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (c != excl[r]) z += std::exp(lr[c] - mx);
    }
    (*lse)[r] = mx + std::log(z);
    total += (*lse)[r] - lr[targets[r]];
  }
  const Real loss = total / static_cast<Real>(rows);
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return logits.tape->record(
      "softmax_cross_entropy", Tensor<Real>::scalar(loss), {logits},
      [li = logits.id, tgt = std::move(tgt), excl = std::move(excl), lse, rows, cols](Tape<Real>& t, int self) {
        const Real g = t.grad(self).data[0] / static_cast<Real>(rows);
        const auto& lv = t.value(li);
        auto& gl = t.grad(li);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            if (c == excl[r]) continue;
            gl.data[r * cols + c] += g * std::exp(lv.data[r * cols + c] - (*lse)[r]);
          }
          gl.data[r * cols + tgt[r]] -= g;
        }
      });
}

}  // namespace

template <typename Real>
Var<Real> softmax_cross_entropy(Var<Real> logits, std::span<const std::size_t> targets) {
  return cross_entropy_impl(logits, targets, {});
}

template <typename Real>
Var<Real> softmax_cross_entropy(Var<Real> logits, std::span<const std::size_t> targets,
                                std::span<const std::size_t> excluded) {
  if (excluded.size() != targets.size()) {
    fail(ErrorKind::kDimension, "softmax_cross_entropy: one excluded column per row required");
  }
  return cross_entropy_impl(logits, targets, excluded);
}

#define SIDREC_INSTANTIATE_OPS(Real)                                                          \
  template Var<Real> matmul<Real>(Var<Real>, Var<Real>);                                      \
  template Var<Real> matmul_nt<Real>(Var<Real>, Var<Real>);                                   \
  template Var<Real> add<Real>(Var<Real>, Var<Real>);                                         \
  template Var<Real> sub<Real>(Var<Real>, Var<Real>);                                         \
  template Var<Real> scale<Real>(Var<Real>, Real);                                            \
  template Var<Real> add_bias<Real>(Var<Real>, Var<Real>);                                    \
  template Var<Real> relu<Real>(Var<Real>);                                                   \
  template Var<Real> gelu<Real>(Var<Real>);                                                   \
  template Var<Real> layer_norm<Real>(Var<Real>, Var<Real>, Var<Real>, Real);                 \
  template Var<Real> concat_cols<Real>(std::span<const Var<Real>>);                           \
  template Var<Real> gather_rows<Real>(Var<Real>, std::span<const std::size_t>);              \
  template Var<Real> sum_squares<Real>(Var<Real>);                                            \
  template Var<Real> weighted_sum<Real>(std::span<const Var<Real>>, std::span<const Real>);   \
  template Var<Real> stop_gradient<Real>(Var<Real>);                                          \
  template Var<Real> causal_attention<Real>(Var<Real>, std::span<const std::size_t>,          \
                                            std::size_t);                                     \
  template Var<Real> softmax_cross_entropy<Real>(Var<Real>, std::span<const std::size_t>);    \
  template Var<Real> softmax_cross_entropy<Real>(Var<Real>, std::span<const std::size_t>,     \
                                                 std::span<const std::size_t>);

SIDREC_INSTANTIATE_OPS(float)
SIDREC_INSTANTIATE_OPS(double)

}  // namespace sidrec::ops
