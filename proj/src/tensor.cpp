#include "ilnn/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace ilnn {

namespace {

thread_local Tape* g_active_tape = nullptr;
thread_local bool g_recording = true;
std::atomic<std::uint64_t> g_tape_serial{0};

struct RecordingOff {
  RecordingOff() : prev(g_recording) { g_recording = false; }
  ~RecordingOff() { g_recording = prev; }
  bool prev;
};

std::shared_ptr<const std::vector<double>> share(std::vector<double> v) {
  return std::make_shared<const std::vector<double>>(std::move(v));
}

[[noreturn]] void domain_fail(const char* primitive, const char* what) {
  throw NumericDomainError(std::string(primitive) + ": " + what);
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

// --------------------------------------------------------------------------
// Tensor
// --------------------------------------------------------------------------

Tensor Tensor::scalar(double v) { return Tensor({}, share({v})); }

Tensor Tensor::zeros(Shape shape) {
  std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), share(std::vector<double>(n, 0.0)));
}

Tensor Tensor::full(Shape shape, double v) {
  std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), share(std::vector<double>(n, v)));
}

Tensor Tensor::from_vector(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), share(std::move(values)));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> values) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("from_data: shape " + shape_str(shape) + " does not match buffer of " +
                         std::to_string(values.size()) + " values");
  }
  return Tensor(std::move(shape), share(std::move(values)));
}

const std::vector<double>& Tensor::data() const {
  if (!data_) throw ContractError("tensor is empty");
  return *data_;
}

double Tensor::at(std::size_t flat_index) const { return data().at(flat_index); }

double Tensor::item() const {
  const auto& d = data();
  if (d.size() != 1) {
    throw ContractError("item(): tensor has " + std::to_string(d.size()) + " elements");
  }
  return d[0];
}

bool Tensor::all_finite() const {
  for (double v : data())
    if (!std::isfinite(v)) return false;
  return true;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data()) m = std::max(m, std::abs(v));
  return m;
}

Tensor Tensor::detach() const {
  Tensor t(shape_, data_);
  return t;
}

bool Tensor::tracked() const {
  return node_ >= 0 && g_active_tape != nullptr && tape_serial_ == g_active_tape->serial();
}

// --------------------------------------------------------------------------
// Tape
// --------------------------------------------------------------------------

Tape::Tape() {
  if (g_active_tape != nullptr) {
    throw StateError("a tape is already active in this execution context");
  }
  serial_ = ++g_tape_serial;
  g_active_tape = this;
}

Tape::~Tape() { g_active_tape = nullptr; }

Tape* Tape::active() { return g_active_tape; }

Tensor Tape::record(Tensor out, std::vector<int> parents, Vjp vjp) {
  out.node_ = static_cast<int>(nodes_.size());
  out.tape_serial_ = serial_;
  nodes_.push_back(Node{std::move(parents), out.shape(), std::move(vjp)});
  return out;
}

Tensor Tape::leaf(const Tensor& t) {
  return record(t.detach(), {}, nullptr);
}

GradMap Tape::backward(const Tensor& loss) {
  if (!loss.tracked() || loss.tape_serial() != serial_) {
    throw ContractError("backward: loss is not tracked on this tape");
  }
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " + shape_str(loss.shape()));
  }
  RecordingOff guard;  // gradient math must not append to the graph
  std::vector<Tensor> grads(nodes_.size());
  grads[static_cast<std::size_t>(loss.node())] = Tensor::full(loss.shape(), 1.0);

  for (int i = loss.node(); i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!grads[idx].defined()) continue;
    const Node& node = nodes_[idx];
    if (!node.vjp) continue;
    std::vector<Tensor> parent_grads = node.vjp(grads[idx]);
    if (parent_grads.size() != node.parents.size()) {
      throw InternalError("vjp returned wrong number of gradients");
    }
    for (std::size_t j = 0; j < node.parents.size(); ++j) {
      int p = node.parents[j];
      if (p < 0 || !parent_grads[j].defined()) continue;
      auto pi = static_cast<std::size_t>(p);
      if (!grads[pi].defined()) {
        grads[pi] = parent_grads[j];
      } else {
        grads[pi] = add(grads[pi], parent_grads[j]);
      }
    }
  }
  return GradMap(std::move(grads));
}

Tensor GradMap::at(const Tensor& t) const {
  if (t.node() < 0) throw ContractError("gradient requested for an untracked tensor");
  const auto idx = static_cast<std::size_t>(t.node());
  if (idx >= by_node_.size() || !by_node_[idx].defined()) return Tensor::zeros(t.shape());
  return by_node_[idx];
}

bool GradMap::contains(const Tensor& t) const {
  return t.node() >= 0 && static_cast<std::size_t>(t.node()) < by_node_.size() &&
         by_node_[static_cast<std::size_t>(t.node())].defined();
}

// --------------------------------------------------------------------------
// Recording helper
// --------------------------------------------------------------------------

namespace {

bool want_tracking(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = Tape::active();
  if (tape == nullptr || !g_recording) return false;
  for (const Tensor* t : inputs) {
    if (t->node() >= 0 && t->tape_serial() == tape->serial()) return true;
  }
  return false;
}

int parent_id(const Tensor& t) {
  Tape* tape = Tape::active();
  if (tape != nullptr && t.node() >= 0 && t.tape_serial() == tape->serial()) return t.node();
  return -1;
}

Tensor finish(Tensor out, std::initializer_list<const Tensor*> inputs, Tape::Vjp vjp) {
  if (!want_tracking(inputs)) return out;
  std::vector<int> parents;
  parents.reserve(inputs.size());
  for (const Tensor* t : inputs) parents.push_back(parent_id(*t));
  return Tape::active()->record(std::move(out), std::move(parents), std::move(vjp));
}

// ---- broadcasting ---------------------------------------------------------

Shape broadcast_shape(const Shape& a, const Shape& b, const char* opname) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError(std::string(opname) + ": shapes " + shape_str(a) + " and " +
                           shape_str(b) + " are not broadcastable");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

// Row-major strides with zeros on broadcast axes, aligned to `out` rank.
std::vector<std::size_t> broadcast_strides(const Shape& s, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t acc = 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t axis = s.size() - 1 - i;
    const std::size_t out_axis = out.size() - 1 - i;
    strides[out_axis] = (s[axis] == 1) ? 0 : acc;
    acc *= s[axis];
  }
  return strides;
}

template <typename F>
std::vector<double> broadcast_apply(const Tensor& a, const Tensor& b, const Shape& out, F f) {
  const std::size_t n = shape_size(out);
  std::vector<double> r(n);
  const auto& av = a.data();
  const auto& bv = b.data();
  if (a.shape() == b.shape()) {  // fast path, no odometer
    for (std::size_t i = 0; i < n; ++i) r[i] = f(av[i], bv[i]);
    return r;
  }
  const auto sa = broadcast_strides(a.shape(), out);
  const auto sb = broadcast_strides(b.shape(), out);
  std::vector<std::size_t> idx(out.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = f(av[ia], bv[ib]);
    for (std::size_t axis = out.size(); axis-- > 0;) {
      ++idx[axis];
      ia += sa[axis];
      ib += sb[axis];
      if (idx[axis] < out[axis]) break;
      ia -= sa[axis] * out[axis];
      ib -= sb[axis] * out[axis];
      idx[axis] = 0;
    }
  }
  return r;
}

// Sums `g` (shaped like the broadcast output) back down to `target`.
Tensor reduce_grad(const Tensor& g, const Shape& target) {
  if (g.shape() == target) return g;
  const Shape& gs = g.shape();
  const std::size_t n = g.size();
  std::vector<double> out(shape_size(target), 0.0);
  const auto strides = broadcast_strides(target, gs);
  const auto& gv = g.data();
  std::vector<std::size_t> idx(gs.size(), 0);
  std::size_t it = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[it] += gv[i];
    for (std::size_t axis = gs.size(); axis-- > 0;) {
      ++idx[axis];
      it += strides[axis];
      if (idx[axis] < gs[axis]) break;
      it -= strides[axis] * gs[axis];
      idx[axis] = 0;
    }
  }
  return Tensor::from_data(target, std::move(out));
}

template <typename FwdF, typename DerivF>
Tensor unary_elementwise(const Tensor& a, FwdF f, DerivF dfdx) {
  const auto& av = a.data();
  std::vector<double> r(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) r[i] = f(av[i]);
  Tensor out = Tensor::from_data(a.shape(), std::move(r));
  Tensor saved_in = a.detach();
  Tensor saved_out = out.detach();
  return finish(std::move(out), {&a}, [saved_in, saved_out, dfdx](const Tensor& g) {
    const auto& xv = saved_in.data();
    const auto& yv = saved_out.data();
    const auto& gv = g.data();
    std::vector<double> d(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) d[i] = gv[i] * dfdx(xv[i], yv[i]);
    return std::vector<Tensor>{Tensor::from_data(saved_in.shape(), std::move(d))};
  });
}

}  // namespace

// --------------------------------------------------------------------------
// Arithmetic
// --------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  Shape os = broadcast_shape(a.shape(), b.shape(), "add");
  Tensor out = Tensor::from_data(os, broadcast_apply(a, b, os, [](double x, double y) { return x + y; }));
  Shape as = a.shape(), bs = b.shape();
  return finish(std::move(out), {&a, &b}, [as, bs](const Tensor& g) {
    return std::vector<Tensor>{reduce_grad(g, as), reduce_grad(g, bs)};
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  Shape os = broadcast_shape(a.shape(), b.shape(), "sub");
  Tensor out = Tensor::from_data(os, broadcast_apply(a, b, os, [](double x, double y) { return x - y; }));
  Shape as = a.shape(), bs = b.shape();
  return finish(std::move(out), {&a, &b}, [as, bs](const Tensor& g) {
    return std::vector<Tensor>{reduce_grad(g, as), reduce_grad(neg(g), bs)};
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  Shape os = broadcast_shape(a.shape(), b.shape(), "mul");
  Tensor out = Tensor::from_data(os, broadcast_apply(a, b, os, [](double x, double y) { return x * y; }));
  Tensor sa = a.detach(), sb = b.detach();
  return finish(std::move(out), {&a, &b}, [sa, sb](const Tensor& g) {
    return std::vector<Tensor>{reduce_grad(mul(g, sb), sa.shape()),
                               reduce_grad(mul(g, sa), sb.shape())};
  });
}

Tensor div(const Tensor& a, const Tensor& b) {
  for (double v : b.data()) {
    if (v == 0.0) domain_fail("div", "zero divisor");
  }
  Shape os = broadcast_shape(a.shape(), b.shape(), "div");
  Tensor out = Tensor::from_data(os, broadcast_apply(a, b, os, [](double x, double y) { return x / y; }));
  Tensor sa = a.detach(), sb = b.detach(), so = out.detach();
  return finish(std::move(out), {&a, &b}, [sa, sb, so](const Tensor& g) {
    Tensor ga = reduce_grad(div(g, sb), sa.shape());
    Tensor gb = reduce_grad(neg(div(mul(g, so), sb)), sb.shape());
    return std::vector<Tensor>{std::move(ga), std::move(gb)};
  });
}

Tensor neg(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Tensor pow(const Tensor& a, double p) {
  for (double v : a.data()) {
    if (v < 0.0 && p != std::floor(p)) domain_fail("pow", "negative base with non-integer exponent");
    if (v == 0.0 && p < 0.0) domain_fail("pow", "zero base with negative exponent");
  }
  return unary_elementwise(
      a, [p](double x) { return std::pow(x, p); },
      [p](double x, double) { return p * std::pow(x, p - 1.0); });
}

Tensor sqrt(const Tensor& a) {
  for (double v : a.data()) {
    if (v < 0.0) domain_fail("sqrt", "negative input");
  }
  return unary_elementwise(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  for (double v : a.data()) {
    if (v <= 0.0) domain_fail("log", "non-positive input");
  }
  return unary_elementwise(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor sinh(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::sinh(x); }, [](double x, double) { return std::cosh(x); });
}

Tensor cosh(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::cosh(x); }, [](double x, double) { return std::sinh(x); });
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor asinh(const Tensor& a) {
  // std::asinh is the stable log1p-based formulation; the naive
  // log(x + sqrt(x^2+1)) loses digits for large |x|.
  return unary_elementwise(
      a, [](double x) { return std::asinh(x); },
      [](double x, double) { return 1.0 / std::sqrt(1.0 + x * x); });
}

Tensor acosh(const Tensor& a) {
  for (double v : a.data()) {
    if (v < 1.0) domain_fail("acosh", "input below 1");
  }
  return unary_elementwise(
      a, [](double x) { return std::acosh(x); },
      [](double x, double) { return 1.0 / std::sqrt(x * x - 1.0); });
}

Tensor acosh_sq(const Tensor& a) {
  for (double v : a.data()) {
    if (v < 1.0) domain_fail("acosh_sq", "input below 1");
  }
  return unary_elementwise(
      a,
      [](double x) {
        const double t = std::acosh(x);
        return t * t;
      },
      [](double x, double) {
        // d/dx acosh(x)^2 = 2 acosh(x)/sqrt(x^2-1) -> 2 as x -> 1+.
        const double u = x - 1.0;
        if (u < 1e-10) return 2.0 * (1.0 - u / 6.0);
        return 2.0 * std::acosh(x) / std::sqrt(x * x - 1.0);
      });
}

Tensor relu(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor abs(const Tensor& a) {
  // Subgradient 0 at 0.
  return unary_elementwise(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor sign(const Tensor& a) {
  const auto& av = a.data();
  std::vector<double> r(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) r[i] = av[i] > 0.0 ? 1.0 : (av[i] < 0.0 ? -1.0 : 0.0);
  // Intentionally untracked: sign is constant during backprop.
  return Tensor::from_data(a.shape(), std::move(r));
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  Shape os = broadcast_shape(a.shape(), b.shape(), "maximum");
  Tensor out = Tensor::from_data(os, broadcast_apply(a, b, os, [](double x, double y) { return x >= y ? x : y; }));
  Tensor sa = a.detach(), sb = b.detach();
  return finish(std::move(out), {&a, &b}, [sa, sb, os](const Tensor& g) {
    Tensor mask_a = Tensor::from_data(os, broadcast_apply(sa, sb, os, [](double x, double y) {
      return x >= y ? 1.0 : 0.0;
    }));
    Tensor mask_b = Tensor::from_data(os, broadcast_apply(sa, sb, os, [](double x, double y) {
      return y > x ? 1.0 : 0.0;
    }));
    return std::vector<Tensor>{reduce_grad(mul(g, mask_a), sa.shape()),
                               reduce_grad(mul(g, mask_b), sb.shape())};
  });
}

// --------------------------------------------------------------------------
// Reductions
// --------------------------------------------------------------------------

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  Shape as = a.shape();
  return finish(Tensor::scalar(s), {&a}, [as](const Tensor& g) {
    return std::vector<Tensor>{Tensor::full(as, g.item())};
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ContractError("mean of empty tensor");
  return sum(a) / static_cast<double>(a.size());
}

Tensor sum_axis(const Tensor& a, std::size_t axis) {
  if (axis >= a.rank()) throw ContractError("sum_axis: axis out of range");
  const Shape& s = a.shape();
  Shape os;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != axis) os.push_back(s[i]);
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t n_axis = s[axis];
  const auto& av = a.data();
  std::vector<double> r(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < n_axis; ++k)
      for (std::size_t in = 0; in < inner; ++in)
        r[o * inner + in] += av[(o * n_axis + k) * inner + in];
  Tensor out = Tensor::from_data(os, std::move(r));
  return finish(std::move(out), {&a}, [s, axis, outer, inner, n_axis](const Tensor& g) {
    const auto& gv = g.data();
    std::vector<double> d(shape_size(s));
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t k = 0; k < n_axis; ++k)
        for (std::size_t in = 0; in < inner; ++in)
          d[(o * n_axis + k) * inner + in] = gv[o * inner + in];
    return std::vector<Tensor>{Tensor::from_data(s, std::move(d))};
  });
}

Tensor max_all(const Tensor& a) {
  const auto& av = a.data();
  if (av.empty()) throw ContractError("max of empty tensor");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < av.size(); ++i)
    if (av[i] > av[arg]) arg = i;
  Shape as = a.shape();
  return finish(Tensor::scalar(av[arg]), {&a}, [as, arg](const Tensor& g) {
    std::vector<double> d(shape_size(as), 0.0);
    d[arg] = g.item();
    return std::vector<Tensor>{Tensor::from_data(as, std::move(d))};
  });
}

// --------------------------------------------------------------------------
// Linear algebra and structure
// --------------------------------------------------------------------------

namespace {

std::vector<double> matmul_values(const std::vector<double>& a, std::size_t p, std::size_t q,
                                  const std::vector<double>& b, std::size_t r) {
  std::vector<double> out(p * r, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < q; ++k) {
      const double aik = a[i * q + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < r; ++j) out[i * r + j] += aik * b[k * r + j];
    }
  return out;
}

std::vector<double> transpose_values(const std::vector<double>& a, std::size_t rows, std::size_t cols) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = a[i * cols + j];
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) throw DimensionError("matmul: left operand must have rank 2");
  const bool vec = b.rank() == 1;
  if (!vec && b.rank() != 2) throw DimensionError("matmul: right operand must have rank 1 or 2");
  const std::size_t p = a.shape()[0], q = a.shape()[1];
  const std::size_t r = vec ? 1 : b.shape()[1];
  const std::size_t q2 = b.shape()[0];
  if (q != q2) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<double> out = matmul_values(a.data(), p, q, b.data(), r);
  Shape os = vec ? Shape{p} : Shape{p, r};
  Tensor sa = a.detach(), sb = b.detach();
  return finish(Tensor::from_data(std::move(os), std::move(out)), {&a, &b},
                [sa, sb, p, q, r, vec](const Tensor& g) {
                  // dA = g . B^T, dB = A^T . g
                  std::vector<double> bt = transpose_values(sb.data(), q, r);
                  std::vector<double> da = matmul_values(g.data(), p, r, bt, q);
                  std::vector<double> at = transpose_values(sa.data(), p, q);
                  std::vector<double> db = matmul_values(at, q, p, g.data(), r);
                  Tensor ga = Tensor::from_data(sa.shape(), std::move(da));
                  Tensor gb = vec ? Tensor::from_data(Shape{q}, std::move(db))
                                  : Tensor::from_data(Shape{q, r}, std::move(db));
                  return std::vector<Tensor>{std::move(ga), std::move(gb)};
                });
}

Tensor gather(const Tensor& a, const std::vector<std::size_t>& indices) {
  if (a.rank() != 1) throw DimensionError("gather: rank-1 tensor expected");
  const auto& av = a.data();
  std::vector<double> r(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= av.size()) throw ContractError("gather: index out of range");
    r[i] = av[indices[i]];
  }
  Shape as = a.shape();
  return finish(Tensor::from_vector(std::move(r)), {&a}, [as, indices](const Tensor& g) {
    std::vector<double> d(shape_size(as), 0.0);
    const auto& gv = g.data();
    for (std::size_t i = 0; i < indices.size(); ++i) d[indices[i]] += gv[i];
    return std::vector<Tensor>{Tensor::from_data(as, std::move(d))};
  });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat: no operands");
  std::size_t total = 0;
  for (const Tensor& t : parts) {
    if (t.rank() != 1) throw DimensionError("concat: rank-1 tensors expected");
    total += t.size();
  }
  std::vector<double> r;
  r.reserve(total);
  for (const Tensor& t : parts) {
    const auto& v = t.data();
    r.insert(r.end(), v.begin(), v.end());
  }
  Tensor out = Tensor::from_vector(std::move(r));

  Tape* tape = Tape::active();
  bool tracked = false;
  if (tape != nullptr && g_recording) {
    for (const Tensor& t : parts)
      if (t.node() >= 0 && t.tape_serial() == tape->serial()) tracked = true;
  }
  if (!tracked) return out;

  std::vector<int> parents;
  std::vector<std::size_t> sizes;
  parents.reserve(parts.size());
  for (const Tensor& t : parts) {
    parents.push_back(parent_id(t));
    sizes.push_back(t.size());
  }
  return tape->record(std::move(out), std::move(parents), [sizes](const Tensor& g) {
    std::vector<Tensor> out_grads;
    std::size_t offset = 0;
    for (std::size_t sz : sizes) {
      out_grads.push_back(slice(g, offset, sz));
      offset += sz;
    }
    return out_grads;
  });
}

Tensor slice(const Tensor& a, std::size_t start, std::size_t len) {
  if (a.rank() != 1) throw DimensionError("slice: rank-1 tensor expected");
  if (start + len > a.size()) throw ContractError("slice: range out of bounds");
  const auto& av = a.data();
  std::vector<double> r(av.begin() + static_cast<std::ptrdiff_t>(start),
                        av.begin() + static_cast<std::ptrdiff_t>(start + len));
  std::size_t n = a.size();
  return finish(Tensor::from_vector(std::move(r)), {&a}, [n, start, len](const Tensor& g) {
    std::vector<double> d(n, 0.0);
    const auto& gv = g.data();
    for (std::size_t i = 0; i < len; ++i) d[start + i] = gv[i];
    return std::vector<Tensor>{Tensor::from_vector(std::move(d))};
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: size mismatch " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  Tensor out = Tensor::from_data(shape, a.data());
  Shape as = a.shape();
  return finish(std::move(out), {&a}, [as](const Tensor& g) {
    return std::vector<Tensor>{reshape(g, as)};
  });
}

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

Tensor norm_sq(const Tensor& a) { return sum(mul(a, a)); }

Tensor norm(const Tensor& a) { return sqrt(norm_sq(a)); }

}  // namespace ilnn
