#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ilnn/errors.hpp"

namespace ilnn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

/// Dense multi-dimensional array of 64-bit reals. Values are immutable;
/// copies share the underlying buffer. A tensor produced while a Tape is
/// active and fed from tracked inputs carries a handle into that tape, which
/// is what backward() walks.
class Tensor {
 public:
  Tensor() = default;

  static Tensor scalar(double v);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double v);
  static Tensor from_vector(std::vector<double> values);  // rank 1
  static Tensor from_data(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_ ? data_->size() : 0; }
  bool defined() const { return static_cast<bool>(data_); }

  const std::vector<double>& data() const;
  double at(std::size_t flat_index) const;
  /// Value of a rank-0 or single-element tensor.
  double item() const;

  bool all_finite() const;
  double max_abs() const;

  /// Drops the tape handle; the values are shared, gradients no longer flow.
  Tensor detach() const;

  bool tracked() const;
  int node() const { return node_; }
  std::uint64_t tape_serial() const { return tape_serial_; }

 private:
  friend class Tape;
  Tensor(Shape shape, std::shared_ptr<const std::vector<double>> data)
      : shape_(std::move(shape)), data_(std::move(data)) {}

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  int node_ = -1;
  std::uint64_t tape_serial_ = 0;
};

/// Gradients keyed by tape node, as returned by Tape::backward.
class GradMap {
 public:
  explicit GradMap(std::vector<Tensor> by_node) : by_node_(std::move(by_node)) {}

  /// Gradient of the loss with respect to `t`; zeros(t.shape) when the loss
  /// does not depend on it. `t` must be tracked on the tape that produced
  /// this map.
  Tensor at(const Tensor& t) const;
  bool contains(const Tensor& t) const;

 private:
  std::vector<Tensor> by_node_;
};

/// Reverse-mode tape. Nodes are appended in execution order (parents always
/// precede children), and backward() walks them in reverse, accumulating
/// gradients by addition at fan-in.
///
/// One tape may be active per execution context at a time; constructing a
/// second is a StateError. Distinct threads may each own their own tape.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers a leaf: returns a tracked tensor sharing `t`'s values.
  Tensor leaf(const Tensor& t);

  /// Reverse pass from a tracked scalar loss.
  GradMap backward(const Tensor& loss);

  static Tape* active();

  std::size_t node_count() const { return nodes_.size(); }
  std::uint64_t serial() const { return serial_; }

  // Used by the op layer: records a node computing `out` from `parents`.
  // `vjp` maps the incoming gradient to per-parent gradients.
  using Vjp = std::function<std::vector<Tensor>(const Tensor& grad_out)>;
  Tensor record(Tensor out, std::vector<int> parents, Vjp vjp);

 private:
  struct Node {
    std::vector<int> parents;
    Shape shape;
    Vjp vjp;  // empty for leaves
  };

  std::vector<Node> nodes_;
  std::uint64_t serial_ = 0;
};

// ---------------------------------------------------------------------------
// Primitive operations. All support tape recording when any input is tracked
// on the active tape. Binary arithmetic broadcasts trailing-aligned, numpy
// style. Domain violations raise NumericDomainError naming the primitive.
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);

/// Elementwise a^p for a real constant exponent.
Tensor pow(const Tensor& a, double p);

Tensor sqrt(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sinh(const Tensor& a);
Tensor cosh(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor asinh(const Tensor& a);
Tensor acosh(const Tensor& a);
/// acosh(a)^2, with the removable singularity of its derivative at a = 1
/// evaluated by series. acosh itself has an infinite slope there; the square
/// is smooth, which is what squared-distance objectives differentiate.
Tensor acosh_sq(const Tensor& a);
Tensor relu(const Tensor& a);
/// |a|, with subgradient 0 at 0.
Tensor abs(const Tensor& a);
/// sign(a) in {-1, 0, +1}. Constant during backprop: the result is untracked.
Tensor sign(const Tensor& a);

/// Elementwise max with broadcasting; ties route the gradient to `a`.
Tensor maximum(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& a);                       // full reduction -> scalar
Tensor sum_axis(const Tensor& a, std::size_t axis);
Tensor max_all(const Tensor& a);                   // gradient to first argmax
Tensor mean(const Tensor& a);

/// (p,q)x(q,r) matrix product; a rank-1 right operand is treated as a column
/// and yields a rank-1 result.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Rank-1 index selection; backward scatter-adds into the source positions.
Tensor gather(const Tensor& a, const std::vector<std::size_t>& indices);
/// Rank-1 concatenation.
Tensor concat(const std::vector<Tensor>& parts);
/// Rank-1 contiguous slice [start, start+len).
Tensor slice(const Tensor& a, std::size_t start, std::size_t len);
Tensor reshape(const Tensor& a, Shape shape);

// Convenience compositions.
Tensor dot(const Tensor& a, const Tensor& b);      // sum(a*b)
Tensor norm_sq(const Tensor& a);                   // sum(a*a)
Tensor norm(const Tensor& a);                      // sqrt(sum(a*a))

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator+(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
inline Tensor operator+(double a, const Tensor& b) { return add(Tensor::scalar(a), b); }
inline Tensor operator-(const Tensor& a, double b) { return sub(a, Tensor::scalar(b)); }
inline Tensor operator-(double a, const Tensor& b) { return sub(Tensor::scalar(a), b); }
inline Tensor operator*(const Tensor& a, double b) { return mul(a, Tensor::scalar(b)); }
inline Tensor operator*(double a, const Tensor& b) { return mul(Tensor::scalar(a), b); }
inline Tensor operator/(const Tensor& a, double b) { return div(a, Tensor::scalar(b)); }
inline Tensor operator/(double a, const Tensor& b) { return div(Tensor::scalar(a), b); }

}  // namespace ilnn
