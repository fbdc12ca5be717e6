#pragma once

#include "favor/matrix.hpp"

namespace favor {

// a * b. Throws ShapeError naming both shapes when a.cols != b.rows and
// OverflowError if the product leaves the finite range.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// a * b^T without forming the transpose (row-by-row dot products).
DenseMatrix matmul_transposed(const DenseMatrix& a, const DenseMatrix& b);

// a^T * b without forming the transpose.
DenseMatrix matmul_lhs_transposed(const DenseMatrix& a, const DenseMatrix& b);

// Residual norm, relative to the row's own norm, at or below which a row is
// declared linearly dependent on its predecessors.
inline constexpr double kGramSchmidtPivotThreshold = 1e-12;

// Orthonormalizes the rows of g in order (modified Gram-Schmidt with one
// re-orthogonalization pass). Row i of the result spans the same space as
// rows 0..i of the input. Requires g.rows <= g.cols.
DenseMatrix gram_schmidt_directions(const DenseMatrix& g);

}  // namespace favor
