#include "mta/linalg.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "mta/errors.hpp"

namespace mta {

std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b, int n) {
    if (static_cast<int>(a.size()) != n * n || static_cast<int>(b.size()) != n)
        throw validation_error("lu_solve: dimension mismatch");
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::fabs(a[k * n + k]);
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(a[i * n + k]);
            if (v > best) { best = v; piv = i; }
        }
        if (best == 0.0)
            throw numerical_error("lu_solve: singular matrix at column " + std::to_string(k));
        if (piv != k) {
            for (int j = k; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        const double inv = 1.0 / a[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            const double f = a[i * n + k] * inv;
            if (f == 0.0) continue;
            a[i * n + k] = 0.0;
            for (int j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
            b[i] -= f * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * b[j];
        b[i] = s / a[i * n + i];
    }
    return b;
}

void ldlt_psd(const std::vector<double>& a, int n,
              std::vector<double>& l, std::vector<double>& d) {
    if (static_cast<int>(a.size()) != n * n)
        throw validation_error("ldlt_psd: dimension mismatch");
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a[i * n + i]));
    const double zero_tol = 1e-12 * (scale > 0 ? scale : 1.0);
    const double neg_tol = 1e-10 * (scale > 0 ? scale : 1.0);

    l.assign(n * n, 0.0);
    d.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double dj = a[j * n + j];
        for (int k = 0; k < j; ++k) dj -= l[j * n + k] * l[j * n + k] * d[k];
        if (dj < -neg_tol)
            throw validation_error("ldlt_psd: matrix is not positive semidefinite (pivot "
                                   + std::to_string(dj) + " at " + std::to_string(j) + ")");
        l[j * n + j] = 1.0;
        if (dj <= zero_tol) {
            d[j] = 0.0; // dependent column; leave sub-diagonal of column j at zero
            continue;
        }
        d[j] = dj;
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k] * d[k];
            l[i * n + j] = s / dj;
        }
    }
}

} // namespace mta
