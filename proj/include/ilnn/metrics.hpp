#pragma once

#include <cstdint>
#include <vector>

namespace ilnn {

/// Fraction of positions where prediction equals label. Lengths must match
/// and be nonempty.
double accuracy(const std::vector<std::uint32_t>& predictions,
                const std::vector<std::uint32_t>& labels);

/// k x k counts, rows = true label, columns = predicted label.
std::vector<std::size_t> confusion_matrix(const std::vector<std::uint32_t>& predictions,
                                          const std::vector<std::uint32_t>& labels,
                                          std::size_t class_count);

/// Multiclass Matthews correlation coefficient in the covariance form
///   (c*s - sum_k p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2)),
/// in [-1, 1]; returns 0 when either denominator factor vanishes.
double mcc(const std::vector<std::uint32_t>& predictions,
           const std::vector<std::uint32_t>& labels);

}  // namespace ilnn
