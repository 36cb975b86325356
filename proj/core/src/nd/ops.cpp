// Copyright 2026 The TrajLab Authors.
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
#include "trajlab/nd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trajlab/common/errors.hpp"

namespace trajlab::nd {

using detail::grad_of;
using detail::make_result;

namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_string(t.shape()));
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

// C[MxN] += A[MxK] * B[KxN]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// C[MxK] += G[MxN] * B[KxN]^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    double* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
      ci[p] += acc;
    }
  }
}

// C[KxN] += A[MxK]^T * G[MxN]
void gemm_tn(const double* a, const double* g, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * gi[j];
    }
  }
}

template <class F, class DF>
Var unary(const Var& a, F f, DF df) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return make_result(std::move(y), {a}, [df](Node& self) {
    Tensor* ga = grad_of(self, 0);
    if (!ga) return;
    const Tensor& x = self.parents[0]->value;
    const Tensor& y = self.value;
    const Tensor& g = self.grad;
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace

double sigmoid_scalar(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double log_sum_exp(std::span<const double> x) noexcept {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_matrix(A, "matmul");
  require_matrix(B, "matmul");
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ " +
                         shape_string(A.shape()) + " x " +
                         shape_string(B.shape()));
  }
  Tensor C = Tensor::matrix(m, n);
  gemm_nn(A.data(), B.data(), C.data(), m, k, n);
  return make_result(std::move(C), {a, b}, [m, k, n](Node& self) {
    const Tensor& G = self.grad;
    if (Tensor* ga = grad_of(self, 0)) {
      gemm_nt(G.data(), self.parents[1]->value.data(), ga->data(), m, n, k);
    }
    if (Tensor* gb = grad_of(self, 1)) {
      gemm_tn(self.parents[0]->value.data(), G.data(), gb->data(), m, k, n);
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same(a.value(), b.value(), "add");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return make_result(std::move(y), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (Tensor* gp = grad_of(self, p)) {
        for (std::size_t i = 0; i < gp->size(); ++i) (*gp)[i] += self.grad[i];
      }
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a.value(), b.value(), "sub");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return make_result(std::move(y), {a, b}, [](Node& self) {
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += self.grad[i];
    }
    if (Tensor* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < gb->size(); ++i) (*gb)[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a.value(), b.value(), "mul");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return make_result(std::move(y), {a, b}, [](Node& self) {
    const Tensor& av = self.parents[0]->value;
    const Tensor& bv = self.parents[1]->value;
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += self.grad[i] * bv[i];
    }
    if (Tensor* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < gb->size(); ++i) (*gb)[i] += self.grad[i] * av[i];
    }
  });
}

Var add_row(const Var& a, const Var& row) {
  const Tensor& A = a.value();
  const Tensor& r = row.value();
  require_matrix(A, "add_row");
  if (r.size() != A.cols()) {
    throw DimensionError("add_row: row of shape " + shape_string(r.shape()) +
                         " cannot broadcast over " + shape_string(A.shape()));
  }
  Tensor y = A;
  const std::size_t m = A.rows(), n = A.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] += r[j];
  }
  return make_result(std::move(y), {a, row}, [m, n](Node& self) {
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += self.grad[i];
    }
    if (Tensor* gr = grad_of(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*gr)[j] += self.grad[i * n + j];
      }
    }
  });
}

Var affine(const Var& a, double s, double b) {
  return unary(
      a, [s, b](double x) { return s * x + b; },
      [s](double, double) { return s; });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](double x) { return sigmoid_scalar(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var exp(const Var& a) {
  return unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var square(const Var& a) {
  return unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_matrix(p.value(), "concat_cols");
    if (p.rows() != m) throw DimensionError("concat_cols: row counts differ");
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor y = Tensor::matrix(m, total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(v.data() + i * widths[k], widths[k], y.data() + i * total + off);
    }
    off += widths[k];
  }
  return make_result(std::move(y), {parts.begin(), parts.end()},
                     [m, total, widths](Node& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         if (Tensor* g = grad_of(self, k)) {
                           for (std::size_t i = 0; i < m; ++i) {
                             for (std::size_t j = 0; j < widths[k]; ++j) {
                               (*g)[i * widths[k] + j] +=
                                   self.grad[i * total + off + j];
                             }
                           }
                         }
                         off += widths[k];
                       }
                     });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::size_t total = 0;
  std::vector<std::size_t> heights;
  for (const Var& p : parts) {
    require_matrix(p.value(), "concat_rows");
    if (p.cols() != n) throw DimensionError("concat_rows: column counts differ");
    heights.push_back(p.rows());
    total += p.rows();
  }
  Tensor y = Tensor::matrix(total, n);
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy_n(p.value().data(), p.value().size(), y.data() + off * n);
    off += p.rows();
  }
  return make_result(std::move(y), {parts.begin(), parts.end()},
                     [n, heights](Node& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < heights.size(); ++k) {
                         if (Tensor* g = grad_of(self, k)) {
                           const double* src = self.grad.data() + off * n;
                           for (std::size_t i = 0; i < heights[k] * n; ++i) {
                             (*g)[i] += src[i];
                           }
                         }
                         off += heights[k];
                       }
                     });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t count) {
  const Tensor& A = a.value();
  require_matrix(A, "slice_cols");
  const std::size_t m = A.rows(), n = A.cols();
  if (count == 0 || begin + count > n) {
    throw DimensionError("slice_cols: range out of bounds");
  }
  Tensor y = Tensor::matrix(m, count);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(A.data() + i * n + begin, count, y.data() + i * count);
  }
  return make_result(std::move(y), {a}, [m, n, begin, count](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
          (*g)[i * n + begin + j] += self.grad[i * count + j];
        }
      }
    }
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t count) {
  const Tensor& A = a.value();
  require_matrix(A, "slice_rows");
  const std::size_t n = A.cols();
  if (count == 0 || begin + count > A.rows()) {
    throw DimensionError("slice_rows: range out of bounds");
  }
  Tensor y = Tensor::matrix(count, n);
  std::copy_n(A.data() + begin * n, count * n, y.data());
  return make_result(std::move(y), {a}, [n, begin, count](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      double* dst = g->data() + begin * n;
      for (std::size_t i = 0; i < count * n; ++i) dst[i] += self.grad[i];
    }
  });
}

Var gather_rows(const Var& a, std::span<const std::size_t> idx) {
  const Tensor& A = a.value();
  require_matrix(A, "gather_rows");
  const std::size_t n = A.cols();
  if (idx.empty()) throw DimensionError("gather_rows: empty index list");
  Tensor y = Tensor::matrix(idx.size(), n);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= A.rows()) throw DimensionError("gather_rows: index out of range");
    std::copy_n(A.data() + idx[i] * n, n, y.data() + i * n);
  }
  std::vector<std::size_t> index(idx.begin(), idx.end());
  return make_result(std::move(y), {a}, [n, index = std::move(index)](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < index.size(); ++i) {
        double* dst = g->data() + index[i] * n;
        const double* src = self.grad.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
      }
    }
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return make_result(Tensor::scalar(s), {a}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      const double gv = self.grad[0];
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += gv;
    }
  });
}

Var mean(const Var& a) {
  return affine(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var weighted_sum(const Var& a, const Tensor& w) {
  require_same(a.value(), w, "weighted_sum");
  double s = 0.0;
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (w[i] != 0.0) s += w[i] * x[i];
  }
  return make_result(Tensor::scalar(s), {a}, [w](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      const double gv = self.grad[0];
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += gv * w[i];
    }
  });
}

Var masked_log_softmax(const Var& logits, const Mask& mask) {
  const Tensor& x = logits.value();
  require_matrix(x, "masked_log_softmax");
  const std::size_t m = x.rows(), n = x.cols();
  if (mask.rows != m || mask.cols != n) {
    throw DimensionError("masked_log_softmax: mask shape mismatch");
  }
  Tensor y = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      const double z = x[i * n + j] + (mask(i, j) ? 0.0 : kMaskedLogit);
      y[i * n + j] = z;
      if (mask(i, j)) {
        any = true;
        mx = std::max(mx, z);
      }
    }
    if (!any) throw ContractError("masked_log_softmax: row has no admissible entry");
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(y[i * n + j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] -= lse;
  }
  return make_result(std::move(y), {logits}, [m, n](Node& self) {
    Tensor* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < m; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < n; ++j) gs += self.grad[i * n + j];
      for (std::size_t j = 0; j < n; ++j) {
        const double p = std::exp(self.value[i * n + j]);
        (*g)[i * n + j] += self.grad[i * n + j] - p * gs;
      }
    }
  });
}

Var masked_entropy(const Var& log_probs, const Mask& mask) {
  const Tensor& lp = log_probs.value();
  require_matrix(lp, "masked_entropy");
  const std::size_t m = lp.rows(), n = lp.cols();
  if (mask.rows != m || mask.cols != n) {
    throw DimensionError("masked_entropy: mask shape mismatch");
  }
  Tensor h = Tensor::matrix(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask(i, j)) continue;
      const double l = lp[i * n + j];
      acc -= std::exp(l) * l;
    }
    h[i] = acc;
  }
  return make_result(std::move(h), {log_probs}, [m, n, mask](Node& self) {
    Tensor* g = grad_of(self, 0);
    if (!g) return;
    const Tensor& lp = self.parents[0]->value;
    for (std::size_t i = 0; i < m; ++i) {
      const double gi = self.grad[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (!mask(i, j)) continue;
        const double l = lp[i * n + j];
        (*g)[i * n + j] -= gi * std::exp(l) * (l + 1.0);
      }
    }
  });
}

Var softmax_cross_entropy(const Var& logits, std::span<const std::size_t> labels,
                          const Mask* mask) {
  const std::size_t m = logits.rows(), n = logits.cols();
  if (labels.size() != m) {
    throw DimensionError("softmax_cross_entropy: one label per row required");
  }
  const Mask full(m, n, true);
  const Mask& mk = mask ? *mask : full;
  Tensor w = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] >= n) throw DimensionError("softmax_cross_entropy: label out of range");
    if (!mk(i, labels[i])) {
      throw ContractError("softmax_cross_entropy: label points at a masked entry");
    }
    w[i * n + labels[i]] = -1.0 / static_cast<double>(m);
  }
  return weighted_sum(masked_log_softmax(logits, mk), w);
}

Var bce_with_logits(const Var& logits, const Tensor& targets, const Tensor& weights) {
  const Tensor& x = logits.value();
  require_same(x, targets, "bce_with_logits");
  require_same(x, weights, "bce_with_logits");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (weights[i] == 0.0) continue;
    s += weights[i] * (softplus_scalar(x[i]) - targets[i] * x[i]);
  }
  return make_result(Tensor::scalar(s), {logits}, [targets, weights](Node& self) {
    Tensor* g = grad_of(self, 0);
    if (!g) return;
    const Tensor& x = self.parents[0]->value;
    const double gv = self.grad[0];
    for (std::size_t i = 0; i < x.size(); ++i) {
      (*g)[i] += gv * weights[i] * (sigmoid_scalar(x[i]) - targets[i]);
    }
  });
}

AttentionResult additive_attention(const Var& query, const Var& keys,
                                   const Var& values, const Var& w,
                                   std::span<const std::size_t> ctx,
                                   std::size_t n) {
  const Tensor& Q = query.value();
  const Tensor& K = keys.value();
  const Tensor& V = values.value();
  const Tensor& W = w.value();
  require_matrix(Q, "additive_attention");
  require_matrix(K, "additive_attention");
  require_matrix(V, "additive_attention");
  const std::size_t b = Q.rows(), a = Q.cols(), vd = V.cols();
  if (K.cols() != a || W.size() != a || ctx.size() != b || n == 0 ||
      K.rows() != V.rows() || K.rows() % n != 0) {
    throw DimensionError("additive_attention: inconsistent shapes");
  }
  for (std::size_t c : ctx) {
    if ((c + 1) * n > K.rows()) throw DimensionError("additive_attention: context out of range");
  }
  // u[b][j][:] = tanh(q_b + k_j) is kept for the backward pass.
  std::vector<double> u(b * n * a);
  Tensor alpha = Tensor::matrix(b, n);
  Tensor out = Tensor::matrix(b, vd);
  std::vector<double> score(n);
  for (std::size_t r = 0; r < b; ++r) {
    const double* q = Q.data() + r * a;
    for (std::size_t j = 0; j < n; ++j) {
      const double* k = K.data() + (ctx[r] * n + j) * a;
      double* ur = u.data() + (r * n + j) * a;
      double e = 0.0;
      for (std::size_t d = 0; d < a; ++d) {
        ur[d] = std::tanh(q[d] + k[d]);
        e += ur[d] * W[d];
      }
      score[j] = e;
    }
    const double lse = log_sum_exp(score);
    for (std::size_t j = 0; j < n; ++j) {
      const double al = std::exp(score[j] - lse);
      alpha[r * n + j] = al;
      const double* v = V.data() + (ctx[r] * n + j) * vd;
      for (std::size_t d = 0; d < vd; ++d) out[r * vd + d] += al * v[d];
    }
  }
  std::vector<std::size_t> cidx(ctx.begin(), ctx.end());
  Var context = make_result(
      std::move(out), {query, keys, values, w},
      [b, a, vd, n, alpha, u = std::move(u), cidx = std::move(cidx)](Node& self) {
        const Tensor& V = self.parents[2]->value;
        const Tensor& W = self.parents[3]->value;
        Tensor* gq = grad_of(self, 0);
        Tensor* gk = grad_of(self, 1);
        Tensor* gv = grad_of(self, 2);
        Tensor* gw = grad_of(self, 3);
        std::vector<double> dalpha(n);
        for (std::size_t r = 0; r < b; ++r) {
          const double* go = self.grad.data() + r * vd;
          double dot = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t row = cidx[r] * n + j;
            const double* v = V.data() + row * vd;
            double da = 0.0;
            for (std::size_t d = 0; d < vd; ++d) da += go[d] * v[d];
            dalpha[j] = da;
            dot += alpha[r * n + j] * da;
            if (gv) {
              double* dv = gv->data() + row * vd;
              const double al = alpha[r * n + j];
              for (std::size_t d = 0; d < vd; ++d) dv[d] += al * go[d];
            }
          }
          for (std::size_t j = 0; j < n; ++j) {
            const double de = alpha[r * n + j] * (dalpha[j] - dot);
            if (de == 0.0) continue;
            const std::size_t row = cidx[r] * n + j;
            const double* ur = u.data() + (r * n + j) * a;
            for (std::size_t d = 0; d < a; ++d) {
              if (gw) (*gw)[d] += de * ur[d];
              const double dpre = de * W[d] * (1.0 - ur[d] * ur[d]);
              if (gq) (*gq)[r * a + d] += dpre;
              if (gk) (*gk)[row * a + d] += dpre;
            }
          }
        }
      });
  return {std::move(context), std::move(alpha)};
}

}  // namespace trajlab::nd
