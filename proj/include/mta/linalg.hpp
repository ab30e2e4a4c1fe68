#pragma once

#include <vector>

namespace mta {

/**
 * Solve A x = b for dense square A (row-major, n*n) by LU with partial
 * pivoting. A and b are taken by value and clobbered internally.
 * Throws numerical_error if a pivot is exactly zero (singular matrix).
 */
std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b, int n);

/**
 * LDL^T factorization of a symmetric PSD matrix (row-major, n*n) with
 * semidefinite pivots allowed. On rank-deficient input the dependent columns
 * get a zero diagonal entry and a zero column in L.
 *
 * Returns unit-lower L (row-major) and the diagonal d, so A = L diag(d) L^T.
 * Throws validation_error if a pivot is negative beyond tolerance (not PSD).
 */
void ldlt_psd(const std::vector<double>& a, int n,
              std::vector<double>& l, std::vector<double>& d);

} // namespace mta
