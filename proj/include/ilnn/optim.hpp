#pragma once

#include <string>
#include <vector>

#include "ilnn/lorentz.hpp"

namespace ilnn {

/// Hyperboloid Riemannian gradient from an ambient Euclidean gradient:
/// metric flip h = diag(-1,1,...,1) g, then the tangent projection
/// h - K <x,h>_L x.
TangentVector riemannian_grad(const LorentzPoint& x, const Tensor& ambient_grad);

/// Post-step constraint applied to a parameter tensor.
enum class ParamConstraint {
  none,
  /// Rank-2: rows are rescaled away from zero norm (floor 1e-12).
  row_norm_floor,
  /// Scalars are floored at a small positive value.
  positive_floor,
};

/// SGD over mixed parameter groups: classic momentum with decoupled weight
/// decay for Euclidean parameters, and x <- exp_x(-lr * rgrad) for manifold
/// parameters (no manifold momentum; the flat parameters carry it).
class RsgdOptimizer {
 public:
  struct Options {
    double lr = 0.1;
    double momentum = 0.0;      // euclidean entries only
    double weight_decay = 0.0;  // applied only where enabled per entry
  };

  explicit RsgdOptimizer(Options options) : options_(options) {}

  /// Entries keep pointers into caller-owned storage; registration order
  /// defines the gradient order expected by step().
  void add_euclidean(std::string name, Tensor* value, bool decay,
                     ParamConstraint constraint = ParamConstraint::none);
  void add_lorentz(std::string name, LorentzPoint* value);

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].name; }

  double lr() const { return options_.lr; }
  void set_lr(double lr) { options_.lr = lr; }

  /// One update over all registered parameters; `grads[i]` pairs with the
  /// i-th registration. Non-finite gradients abort with the parameter name.
  void step(const std::vector<Tensor>& grads);

 private:
  struct Entry {
    std::string name;
    bool lorentz = false;
    Tensor* tensor = nullptr;
    LorentzPoint* point = nullptr;
    bool decay = false;
    ParamConstraint constraint = ParamConstraint::none;
    Tensor momentum_buf;
  };

  Options options_;
  std::vector<Entry> entries_;
};

}  // namespace ilnn
