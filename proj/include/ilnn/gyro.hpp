#pragma once

#include "ilnn/lorentz.hpp"

namespace ilnn {

/// Gyrovector operations on the hyperboloid, built from the exp/log maps and
/// parallel transport:
///
///   x (+) y = Exp_x( PT_{o->x}( Log_o(y) ) )
///   t (.) x = Exp_o( t Log_o(x) )
///   (-) x   = [x0, -x_s]            (equals (-1) (.) x)
///
/// where o is the pole. The pole is a left and right identity and (-)x a
/// left inverse; the gyration operator is not exposed, the axioms are
/// exercised through these three operations.

LorentzPoint gyro_add(const LorentzPoint& x, const LorentzPoint& y);

LorentzPoint gyro_scale(const Tensor& t, const LorentzPoint& x);
LorentzPoint gyro_scale(double t, const LorentzPoint& x);

LorentzPoint gyro_inverse(const LorentzPoint& x);

}  // namespace ilnn
