#pragma once

#include <cstddef>
#include <string>

#include "inkrementa/numkit/matrix.hpp"
#include "inkrementa/numkit/ops.hpp"

namespace inkrementa {

namespace detail {
inline double mean_row_norm(const Matrix2D& head, std::size_t first, std::size_t count,
                            NormKind norm) {
  double total = 0.0;
  for (std::size_t r = first; r < first + count; ++r) total += vec_norm(head.row(r), norm);
  return total / static_cast<double>(count);
}
}  // namespace detail

/// Scale applied to the new rows: mean old-row norm over mean new-row norm.
inline double weight_align_gamma(const Matrix2D& head, std::size_t u, std::size_t v, NormKind norm) {
  if (u < 1 || v < 1) throw ArgumentError("weight_align: u and v must both be >= 1");
  if (head.rows() != u + v) {
    throw ShapeError("weight_align: head " + head.shape() + " does not have u+v = " +
                     std::to_string(u + v) + " rows");
  }
  const double old_mean = detail::mean_row_norm(head, 0, u, norm);
  const double new_mean = detail::mean_row_norm(head, u, v, norm);
  if (!(new_mean > 0.0)) {
    throw DegenerateHeadError("weight_align: every new-class weight row is zero");
  }
  return old_mean / new_mean;
}

/// Rescales rows u..u+v-1 by weight_align_gamma; rows 0..u-1 are copied untouched.
inline Matrix2D weight_align(const Matrix2D& head, std::size_t u, std::size_t v, NormKind norm) {
  const double gamma = weight_align_gamma(head, u, v, norm);
  Matrix2D out = head;
  for (std::size_t r = u; r < u + v; ++r)
    for (auto& w : out.row(r)) w *= gamma;
  return out;
}

}  // namespace inkrementa
