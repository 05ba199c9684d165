#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace spinnet {

template <typename Scalar>
struct ProjectedSpectrum {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambdas;              // ascending
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> proj;    // proj(j, r) = v_j . x_r
};

// Eigenvalues of the symmetric matrix A together with the projections of the columns
// of X on every eigenvector, without forming the eigenvectors. Tridiagonalize, then run
// implicit QL with Wilkinson shifts, applying each Givens rotation to Q^T X only.
template <typename DerivedA, typename DerivedX>
ProjectedSpectrum<typename DerivedA::Scalar> projected_eigensystem(const Eigen::MatrixBase<DerivedA>& A,
                                                                   const Eigen::MatrixBase<DerivedX>& X)
{
    using Scalar = typename DerivedA::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = A.rows();
    if (A.cols() != n || X.rows() != n)
        throw std::invalid_argument("projected_eigensystem: dimension mismatch");

    ProjectedSpectrum<Scalar> out;
    if (n == 0) {
        out.lambdas.resize(0);
        out.proj.resize(0, X.cols());
        return out;
    }
    Vec d(n), e = Vec::Zero(n);
    Mat W;
    if (n == 1) {
        d[0] = A(0, 0);
        W = X;
    } else {
        Eigen::Tridiagonalization<Mat> tri(A.eval());
        d = tri.diagonal();
        e.head(n - 1) = tri.subDiagonal();
        W = tri.matrixQ().adjoint() * X;
    }

    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    for (Eigen::Index l = 0; l < n; ++l) {
        int iter = 0;
        Eigen::Index m;
        do {
            for (m = l; m < n - 1; ++m) {
                const Scalar dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd)
                    break;
            }
            if (m == l)
                break;
            if (++iter > 60)
                throw std::runtime_error("projected_eigensystem: QL iteration did not converge");
            Scalar g = (d[l + 1] - d[l]) / (Scalar(2) * e[l]);
            Scalar r = std::hypot(g, Scalar(1));
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            Scalar s = 1, c = 1, p = 0;
            Eigen::Index i;
            bool underflow = false;
            for (i = m - 1; i >= l; --i) {
                const Scalar f = s * e[i];
                const Scalar b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == Scalar(0)) {
                    d[i + 1] -= p;
                    e[m] = 0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + Scalar(2) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row = W.row(i + 1);
                W.row(i + 1) = s * W.row(i) + c * row;
                W.row(i) = c * W.row(i) - s * row;
            }
            if (underflow)
                continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0;
        } while (m != l);
    }

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return d[a] < d[b]; });
    out.lambdas.resize(n);
    out.proj.resize(n, X.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
        out.lambdas[j] = d[order[j]];
        out.proj.row(j) = W.row(order[j]);
    }
    return out;
}

} // namespace spinnet
