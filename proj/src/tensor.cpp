#include "augcl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "augcl/errors.hpp"

namespace augcl {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size())
    throw InvalidShape("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                       shape_str(shape));
  node_ = std::make_shared<TensorNode>();
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return Tensor({rows, cols}, std::vector<double>(rows * cols, 0.0), requires_grad);
}
Tensor Tensor::ones(std::size_t rows, std::size_t cols) { return full(rows, cols, 1.0); }
Tensor Tensor::full(std::size_t rows, std::size_t cols, double value) {
  return Tensor({rows, cols}, std::vector<double>(rows * cols, value));
}
Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({1, 1}, {value}, requires_grad); }
Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data, bool requires_grad) {
  return Tensor({rows, cols}, std::move(data), requires_grad);
}
Tensor Tensor::row(std::vector<double> data, bool requires_grad) {
  auto n = data.size();
  return Tensor({1, n}, std::move(data), requires_grad);
}
Tensor Tensor::column(std::vector<double> data, bool requires_grad) {
  auto n = data.size();
  return Tensor({n, 1}, std::move(data), requires_grad);
}
Tensor Tensor::eye(std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  return Tensor({n, n}, std::move(d));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw InvalidShape("expected rank-2 tensor, got " + shape_str(shape()));
  return node_->shape[0];
}
std::size_t Tensor::cols() const {
  if (rank() != 2) throw InvalidShape("expected rank-2 tensor, got " + shape_str(shape()));
  return node_->shape[1];
}

double Tensor::item() const {
  if (numel() != 1) throw ContractViolation("item() on non-scalar tensor " + shape_str(shape()));
  return node_->data[0];
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(node_->data.size(), 0.0);
  return node_->grad;
}

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->data, false); }
Tensor Tensor::clone(bool requires_grad) const { return Tensor(node_->shape, node_->data, requires_grad); }

void Tensor::backward() const {
  if (!is_scalar()) throw ContractViolation("backward() requires a scalar loss, got " + shape_str(shape()));
  if (!std::isfinite(node_->data[0]))
    throw TrainingDivergence("loss is not finite (" + std::to_string(node_->data[0]) + ")");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS for a topological order.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      TensorNode* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->accumulate(0, 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

namespace {

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw InvalidShape(std::string(op) + ": expected rank-2 tensor, got " + shape_str(t.shape()));
}

struct Broadcast {
  std::size_t rows, cols;
  std::size_t ar, ac, br, bc;
};

Broadcast broadcast_shape(const Tensor& a, const Tensor& b, const char* op) {
  require_rank2(a, op);
  require_rank2(b, op);
  Broadcast s{};
  s.ar = a.rows();
  s.ac = a.cols();
  s.br = b.rows();
  s.bc = b.cols();
  auto merge = [&](std::size_t x, std::size_t y) {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    throw InvalidShape(std::string(op) + ": cannot broadcast " + shape_str(a.shape()) + " with " +
                       shape_str(b.shape()));
  };
  s.rows = merge(s.ar, s.br);
  s.cols = merge(s.ac, s.bc);
  return s;
}

// Elementwise binary op with broadcasting. `df` returns (d/da, d/db) given a, b.
template <typename F, typename DF>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, F f, DF df) {
  Broadcast s = broadcast_shape(a, b, name);
  std::vector<double> out(s.rows * s.cols);
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      double x = ad[(s.ar == 1 ? 0 : r) * s.ac + (s.ac == 1 ? 0 : c)];
      double y = bd[(s.br == 1 ? 0 : r) * s.bc + (s.bc == 1 ? 0 : c)];
      out[r * s.cols + c] = f(x, y);
    }
  }
  return make_result({s.rows, s.cols}, std::move(out), {a, b}, [s, df](TensorNode& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t c = 0; c < s.cols; ++c) {
        std::size_t ia = (s.ar == 1 ? 0 : r) * s.ac + (s.ac == 1 ? 0 : c);
        std::size_t ib = (s.br == 1 ? 0 : r) * s.bc + (s.bc == 1 ? 0 : c);
        double g = self.grad[r * s.cols + c];
        auto [da, db] = df(na.data[ia], nb.data[ib]);
        if (na.requires_grad) na.accumulate(ia, g * da);
        if (nb.requires_grad) nb.accumulate(ib, g * db);
      }
    }
  });
}

// Elementwise unary op; `df` returns the derivative given (input, output).
template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df) {
  auto ad = a.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < ad.size(); ++i) out[i] = f(ad[i]);
  return make_result(a.shape(), std::move(out), {a}, [df](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < self.data.size(); ++i) na.grad[i] += self.grad[i] * df(na.data[i], self.data[i]);
  });
}

double softplus_value(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(a, b, "add", [](double x, double y) { return x + y; },
                [](double, double) { return std::pair{1.0, 1.0}; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(a, b, "sub", [](double x, double y) { return x - y; },
                [](double, double) { return std::pair{1.0, -1.0}; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(a, b, "mul", [](double x, double y) { return x * y; },
                [](double x, double y) { return std::pair{y, x}; });
}
Tensor div(const Tensor& a, const Tensor& b) {
  return binary(a, b, "div", [](double x, double y) { return x / y; },
                [](double x, double y) { return std::pair{1.0 / y, -x / (y * y)}; });
}

Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}
Tensor mul_scalar(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}
Tensor pow_scalar(const Tensor& a, double p) {
  return unary(a, [p](double x) { return std::pow(x, p); },
               [p](double x, double) { return p * std::pow(x, p - 1.0); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw InvalidShape("matmul: inner dims differ " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  std::vector<double> out(m * n, 0.0);
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double av = ad[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &bd[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](TensorNode& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    const double* g = self.grad.data();
    if (na.requires_grad) {
      na.ensure_grad();
      // dA = G B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * nb.data[p * n + j];
          na.grad[i * k + p] += acc;
        }
    }
    if (nb.requires_grad) {
      nb.ensure_grad();
      // dB = A^T G
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double av = na.data[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) nb.grad[p * n + j] += av * g[i * n + j];
        }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  auto ad = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = ad[i * c + j];
  return make_result({c, r}, std::move(out), {a}, [r, c](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) na.grad[i * c + j] += self.grad[j * r + i];
  });
}

Tensor reshape(const Tensor& a, std::size_t rows, std::size_t cols) {
  if (rows * cols != a.numel())
    throw InvalidShape("reshape: " + shape_str(a.shape()) + " to (" + std::to_string(rows) + "," +
                       std::to_string(cols) + ")");
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result({rows, cols}, std::move(out), {a}, [](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) na.grad[i] += self.grad[i];
  });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}
Tensor sigmoid(const Tensor& a) {
  return unary(a, sigmoid_value, [](double, double y) { return y * (1.0 - y); });
}
Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}
Tensor softplus(const Tensor& a) {
  return unary(a, softplus_value, [](double x, double) { return sigmoid_value(x); });
}
Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}
Tensor log(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make_result({1, 1}, {s}, {a}, [](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (auto& g : na.grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ContractViolation("mean of empty tensor");
  return mul_scalar(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor sum(const Tensor& a, int axis) {
  require_rank2(a, "sum");
  std::size_t r = a.rows(), c = a.cols();
  auto ad = a.data();
  if (axis == 0) {
    std::vector<double> out(c, 0.0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) out[j] += ad[i * c + j];
    return make_result({1, c}, std::move(out), {a}, [r, c](TensorNode& self) {
      auto& na = *self.inputs[0];
      na.ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) na.grad[i * c + j] += self.grad[j];
    });
  }
  if (axis == 1) {
    std::vector<double> out(r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) out[i] += ad[i * c + j];
    return make_result({r, 1}, std::move(out), {a}, [r, c](TensorNode& self) {
      auto& na = *self.inputs[0];
      na.ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) na.grad[i * c + j] += self.grad[i];
    });
  }
  throw ContractViolation("sum: axis must be 0 or 1");
}

Tensor mean(const Tensor& a, int axis) {
  require_rank2(a, "mean");
  std::size_t n = axis == 0 ? a.rows() : a.cols();
  if (n == 0) throw ContractViolation("mean over empty axis");
  return mul_scalar(sum(a, axis), 1.0 / static_cast<double>(n));
}

Tensor softmax(const Tensor& a, int axis) {
  require_rank2(a, "softmax");
  if (axis != 0 && axis != 1) throw ContractViolation("softmax: axis must be 0 or 1");
  std::size_t r = a.rows(), c = a.cols();
  // Normalize along `axis`: groups are columns for axis 0, rows for axis 1.
  std::size_t groups = axis == 0 ? c : r;
  std::size_t len = axis == 0 ? r : c;
  auto idx = [=](std::size_t g, std::size_t k) { return axis == 0 ? k * c + g : g * c + k; };
  auto ad = a.data();
  std::vector<double> out(r * c);
  for (std::size_t g = 0; g < groups; ++g) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k) mx = std::max(mx, ad[idx(g, k)]);
    double z = 0.0;
    for (std::size_t k = 0; k < len; ++k) z += (out[idx(g, k)] = std::exp(ad[idx(g, k)] - mx));
    for (std::size_t k = 0; k < len; ++k) out[idx(g, k)] /= z;
  }
  return make_result({r, c}, std::move(out), {a}, [=](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t g = 0; g < groups; ++g) {
      double dot = 0.0;
      for (std::size_t k = 0; k < len; ++k) dot += self.grad[idx(g, k)] * self.data[idx(g, k)];
      for (std::size_t k = 0; k < len; ++k) {
        auto i = idx(g, k);
        na.grad[i] += self.data[i] * (self.grad[i] - dot);
      }
    }
  });
}

Tensor logsumexp(const Tensor& a, int axis) {
  require_rank2(a, "logsumexp");
  if (axis != 0 && axis != 1) throw ContractViolation("logsumexp: axis must be 0 or 1");
  std::size_t r = a.rows(), c = a.cols();
  std::size_t groups = axis == 0 ? c : r;
  std::size_t len = axis == 0 ? r : c;
  if (len == 0) throw ContractViolation("logsumexp over empty axis");
  auto idx = [=](std::size_t g, std::size_t k) { return axis == 0 ? k * c + g : g * c + k; };
  auto ad = a.data();
  std::vector<double> out(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k) mx = std::max(mx, ad[idx(g, k)]);
    double z = 0.0;
    for (std::size_t k = 0; k < len; ++k) z += std::exp(ad[idx(g, k)] - mx);
    out[g] = mx + std::log(z);
  }
  Shape shape = axis == 0 ? Shape{1, c} : Shape{r, 1};
  return make_result(shape, std::move(out), {a}, [=](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t g = 0; g < groups; ++g)
      for (std::size_t k = 0; k < len; ++k) {
        auto i = idx(g, k);
        na.grad[i] += self.grad[g] * std::exp(na.data[i] - self.data[g]);
      }
  });
}

Tensor l2_norm_rows(const Tensor& a) {
  require_rank2(a, "l2_norm_rows");
  std::size_t r = a.rows(), c = a.cols();
  auto ad = a.data();
  std::vector<double> out(r);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += ad[i * c + j] * ad[i * c + j];
    out[i] = std::sqrt(s);
  }
  return make_result({r, 1}, std::move(out), {a}, [r, c](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      double n = self.data[i];
      if (n == 0.0) continue;  // subgradient 0 at the origin
      for (std::size_t j = 0; j < c; ++j) na.grad[i * c + j] += self.grad[i] * na.data[i * c + j] / n;
    }
  });
}

Tensor normalize_rows(const Tensor& a) {
  require_rank2(a, "normalize_rows");
  std::size_t r = a.rows(), c = a.cols();
  auto ad = a.data();
  std::vector<double> norms(r), out(r * c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += ad[i * c + j] * ad[i * c + j];
    norms[i] = std::sqrt(s);
    if (norms[i] > 0)
      for (std::size_t j = 0; j < c; ++j) out[i * c + j] = ad[i * c + j] / norms[i];
  }
  return make_result({r, c}, std::move(out), {a}, [r, c, norms](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      double n = norms[i];
      if (n == 0.0) continue;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += self.grad[i * c + j] * self.data[i * c + j];
      for (std::size_t j = 0; j < c; ++j)
        na.grad[i * c + j] += (self.grad[i * c + j] - self.data[i * c + j] * dot) / n;
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: no inputs");
  std::size_t r = parts[0].rows(), c = 0;
  std::vector<std::size_t> widths;
  for (auto& p : parts) {
    if (p.rows() != r) throw InvalidShape("concat_cols: row counts differ");
    widths.push_back(p.cols());
    c += p.cols();
  }
  std::vector<double> out(r * c);
  std::size_t off = 0;
  for (auto& p : parts) {
    auto pd = p.data();
    std::size_t w = p.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) out[i * c + off + j] = pd[i * w + j];
    off += w;
  }
  return make_result({r, c}, std::move(out), parts, [r, c, widths](TensorNode& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      auto& nk = *self.inputs[k];
      std::size_t w = widths[k];
      if (nk.requires_grad) {
        nk.ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < w; ++j) nk.grad[i * w + j] += self.grad[i * c + off + j];
      }
      off += w;
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractViolation("concat_rows: no inputs");
  std::size_t c = parts[0].cols(), r = 0;
  std::vector<std::size_t> sizes;
  for (auto& p : parts) {
    if (p.cols() != c) throw InvalidShape("concat_rows: column counts differ");
    sizes.push_back(p.numel());
    r += p.rows();
  }
  std::vector<double> out;
  out.reserve(r * c);
  for (auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return make_result({r, c}, std::move(out), parts, [sizes](TensorNode& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      auto& nk = *self.inputs[k];
      if (nk.requires_grad) {
        nk.ensure_grad();
        for (std::size_t i = 0; i < sizes[k]; ++i) nk.grad[i] += self.grad[off + i];
      }
      off += sizes[k];
    }
  });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count) {
  require_rank2(a, "slice_rows");
  if (begin + count > a.rows()) throw InvalidShape("slice_rows out of range");
  std::size_t c = a.cols();
  std::vector<double> out(a.data().begin() + begin * c, a.data().begin() + (begin + count) * c);
  return make_result({count, c}, std::move(out), {a}, [begin, c](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) na.grad[begin * c + i] += self.grad[i];
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_rank2(a, "slice_cols");
  if (begin + count > a.cols()) throw InvalidShape("slice_cols out of range");
  std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * count);
  auto ad = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = ad[i * c + begin + j];
  return make_result({r, count}, std::move(out), {a}, [r, c, begin, count](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < count; ++j) na.grad[i * c + begin + j] += self.grad[i * count + j];
  });
}

Tensor gather_rows(const Tensor& a, std::span<const int> index) {
  require_rank2(a, "gather_rows");
  std::size_t r = a.rows(), c = a.cols();
  std::vector<int> idx(index.begin(), index.end());
  std::vector<double> out(idx.size() * c);
  auto ad = a.data();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= r) throw ContractViolation("gather_rows: index out of range");
    std::copy_n(&ad[idx[i] * c], c, &out[i * c]);
  }
  return make_result({idx.size(), c}, std::move(out), {a}, [c, idx](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) na.grad[idx[i] * c + j] += self.grad[i * c + j];
  });
}

Tensor scatter_add_rows(const Tensor& a, std::span<const int> index, std::size_t out_rows) {
  require_rank2(a, "scatter_add_rows");
  std::size_t c = a.cols();
  if (index.size() != a.rows()) throw InvalidShape("scatter_add_rows: index length must equal row count");
  std::vector<int> idx(index.begin(), index.end());
  std::vector<double> out(out_rows * c, 0.0);
  auto ad = a.data();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= out_rows)
      throw ContractViolation("scatter_add_rows: index out of range");
    for (std::size_t j = 0; j < c; ++j) out[idx[i] * c + j] += ad[i * c + j];
  }
  return make_result({out_rows, c}, std::move(out), {a}, [c, idx](TensorNode& self) {
    auto& na = *self.inputs[0];
    na.ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) na.grad[i * c + j] += self.grad[idx[i] * c + j];
  });
}

Tensor element(const Tensor& a, std::size_t r, std::size_t c) {
  require_rank2(a, "element");
  if (r >= a.rows() || c >= a.cols()) throw ContractViolation("element: index out of range");
  std::size_t i = r * a.cols() + c;
  return make_result({1, 1}, {a.data()[i]}, {a}, [i](TensorNode& self) { self.inputs[0]->accumulate(i, self.grad[0]); });
}

Tensor straight_through(const Tensor& hard, const Tensor& soft) {
  if (hard.shape() != soft.shape()) throw InvalidShape("straight_through: shapes differ");
  std::vector<double> out(hard.data().begin(), hard.data().end());
  return make_result(hard.shape(), std::move(out), {soft}, [](TensorNode& self) {
    auto& ns = *self.inputs[0];
    ns.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ns.grad[i] += self.grad[i];
  });
}

}  // namespace augcl
