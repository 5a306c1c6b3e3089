#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/CholmodSupport>

#include "epl/core.hpp"
#include "epl/sparse.hpp"

namespace epl {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct LanczosResult {
    double value = 0.0;
    std::vector<double> vector;
    int steps = 0;
    /// |beta_k * last component of the Ritz vector|, the residual norm of the Ritz pair.
    double residual_estimate = 0.0;
};

/// Symmetric Lanczos with full reorthogonalization. Returns the largest (or smallest) Ritz pair
/// after at most `max_steps` steps, stopping early once the Ritz residual drops below `tol`
/// (below `tol * |value|` when `relative` is set).
inline LanczosResult lanczos_extreme(const LinearMap& op, std::span<const double> start, int max_steps, bool largest,
                                     double tol = 0.0, bool relative = false)
{
    const std::size_t n = start.size();
    const int kmax = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(max_steps), n));
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> q(start.begin(), start.end());
    const double q0 = norm2(q);
    EPL_REQUIRE(q0 > 0.0, InvalidArgument, "Lanczos start vector is zero");
    for (double& v : q) v /= q0;
    std::vector<double> w(n);
    LanczosResult res;
    Eigen::VectorXd ritz_vec;

    auto ritz = [&](int k) {
        Eigen::VectorXd d(k), e(std::max(k - 1, 0));
        for (int i = 0; i < k; ++i) d[i] = alpha[i];
        for (int i = 0; i + 1 < k; ++i) e[i] = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        const int pick = largest ? k - 1 : 0;
        res.value = es.eigenvalues()[pick];
        ritz_vec = es.eigenvectors().col(pick);
        const double b = static_cast<int>(beta.size()) >= k ? beta[k - 1] : 0.0;
        res.residual_estimate = std::abs(b * ritz_vec[k - 1]);
        res.steps = k;
    };

    for (int k = 0; k < kmax; ++k) {
        basis.push_back(q);
        op(q, w);
        const double a = dot(q, w);
        alpha.push_back(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const double c = dot(b, w);
                for (std::size_t i = 0; i < n; ++i) w[i] -= c * b[i];
            }
        const double bnorm = norm2(w);
        beta.push_back(bnorm);
        const int steps = k + 1;
        const bool last = steps == kmax || bnorm <= 1e-14 * std::abs(a);
        if (last || steps % 10 == 0) {
            ritz(steps);
            if (last || res.residual_estimate <= (relative ? tol * std::abs(res.value) : tol)) break;
        }
        for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / bnorm;
    }
    res.vector.assign(n, 0.0);
    for (int j = 0; j < res.steps; ++j)
        for (std::size_t i = 0; i < n; ++i) res.vector[i] += ritz_vec[j] * basis[j][i];
    const double vn = norm2(res.vector);
    for (double& v : res.vector) v /= vn;
    return res;
}

inline Eigen::SparseMatrix<double> to_eigen(const CsrMatrix& a)
{
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(a.nnz());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k)
            trips.emplace_back(static_cast<int>(r), static_cast<int>(a.col_idx()[k]), a.values()[k]);
    Eigen::SparseMatrix<double> m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

/// Sparse Cholesky factorizations of (A - sigma I) for a symmetric A, sharing one symbolic
/// analysis across shifts. A factorization succeeds exactly when A - sigma I is positive definite,
/// i.e. when sigma lies strictly below the spectrum of A.
class ShiftedCholesky {
public:
    explicit ShiftedCholesky(const Eigen::SparseMatrix<double>& a) : a_(a)
    {
        llt_.cholmod().print = 0;
        llt_.cholmod().error_handler = nullptr;
        llt_.analyzePattern(a_);
    }

    /// Factors A - sigma I; returns whether it is positive definite.
    bool factor(double sigma)
    {
        sigma_ = sigma;
        llt_.setShift(-sigma);
        llt_.factorize(a_);
        positive_ = llt_.info() == Eigen::Success;
        return positive_;
    }
    bool positive_definite() const noexcept { return positive_; }
    double sigma() const noexcept { return sigma_; }

    void solve(std::span<const double> b, std::span<double> x) const
    {
        EPL_REQUIRE(positive_, Error, "solve with a failed shifted factorization");
        const Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
        Eigen::Map<Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        xv = llt_.solve(bv);
    }

private:
    Eigen::SparseMatrix<double> a_;
    Eigen::CholmodSimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt_;
    double sigma_ = 0.0;
    bool positive_ = false;
};

}  // namespace epl
