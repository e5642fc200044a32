#pragma once

// Dense float64 tensors with a dynamic reverse-mode tape.
//
// A Tensor is a shared handle to a node of the computation graph. Operations
// that touch at least one tensor with requires_grad record a backward closure
// and their inputs; calling backward() on a scalar walks that graph in reverse
// topological order and accumulates gradients additively into every node.
// Most operations work on rank-2 tensors; vectors are 1xn or nx1 matrices.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace augcl {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> inputs;
  std::function<void(TensorNode&)> backward_fn;

  void accumulate(std::size_t i, double g) {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    grad[i] += g;
  }
  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor ones(std::size_t rows, std::size_t cols);
  static Tensor full(std::size_t rows, std::size_t cols, double value);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                       bool requires_grad = false);
  static Tensor row(std::vector<double> data, bool requires_grad = false);
  static Tensor column(std::vector<double> data, bool requires_grad = false);
  static Tensor eye(std::size_t n);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t numel() const { return node_->data.size(); }
  bool is_scalar() const { return numel() == 1; }

  std::span<const double> data() const { return node_->data; }
  std::span<double> mutable_data() { return node_->data; }
  double operator[](std::size_t i) const { return node_->data[i]; }
  double at(std::size_t r, std::size_t c) const { return node_->data[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient buffer; zeros if nothing has accumulated yet.
  std::vector<double> grad() const;
  void zero_grad() { node_->grad.clear(); }

  /// Copy of the values with no tape history.
  Tensor detach() const;
  Tensor clone(bool requires_grad) const;

  /// Reverse pass from a scalar. Throws TrainingDivergence on a NaN loss.
  void backward() const;

  const std::shared_ptr<TensorNode>& node() const { return node_; }
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  friend Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                            std::function<void(TensorNode&)> backward_fn);

  std::shared_ptr<TensorNode> node_;
};

/// Builds an op output; records the tape edge only if some input needs grad.
Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   std::function<void(TensorNode&)> backward_fn);

// ---- arithmetic (rank-2 broadcasting: each dim equal or 1) ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor pow_scalar(const Tensor& a, double p);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator*(const Tensor& a, double s) { return mul_scalar(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return mul_scalar(a, s); }
inline Tensor operator+(const Tensor& a, double s) { return add_scalar(a, s); }

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, std::size_t rows, std::size_t cols);

// ---- elementwise nonlinearities ----
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

// ---- reductions ----
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// axis 0 collapses rows (result 1xC); axis 1 collapses columns (result Rx1).
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a, int axis);
Tensor softmax(const Tensor& a, int axis);
Tensor logsumexp(const Tensor& a, int axis);
/// Per-row L2 norm (Rx1).
Tensor l2_norm_rows(const Tensor& a);
/// Rows scaled to unit L2 norm; all-zero rows stay zero.
Tensor normalize_rows(const Tensor& a);

// ---- structure ----
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor gather_rows(const Tensor& a, std::span<const int> index);
/// out[index[i]] += a[i] for out of `out_rows` rows; rows added in ascending i.
Tensor scatter_add_rows(const Tensor& a, std::span<const int> index, std::size_t out_rows);
Tensor element(const Tensor& a, std::size_t r, std::size_t c);

/// Forward value of `hard`, gradient routed to `soft` unchanged.
Tensor straight_through(const Tensor& hard, const Tensor& soft);

}  // namespace augcl
