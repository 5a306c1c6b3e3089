#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "epl/positivity.hpp"

// Independent reference computations shared by the unit tests and the acceptance runner.
namespace epl::oracle {

inline constexpr double kPi = std::numbers::pi;

inline double dense_min_eig(const CsrMatrix& m)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k)
            d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m.col_idx()[k])) = m.values()[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Direct sum over nodes of (-Laplace_h u)(y) u(y) / (4 pi |x0 - y|) h^3 with a hand-written
// seven-point stencil and the closed-form Newtonian kernel.
inline double direct_laplace_form(const GridFunction& u, std::size_t x0)
{
    const GridDomain& dom = u.domain();
    const double h = dom.spacing();
    long double s = 0.0;
    for (std::size_t y : dom.interior_nodes()) {
        if (y == x0 || u(y) == 0.0) continue;
        const Index idx = dom.unravel(y);
        double lap = 6.0 * u(y);
        for (int a = 0; a < 3; ++a)
            for (int d : {-1, 1}) {
                Index j = idx;
                j[a] += d;
                lap -= u(dom.ravel(j));
            }
        lap /= h * h;
        const Point p = dom.position(x0), q = dom.position(y);
        const double r = std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]));
        s += static_cast<long double>(lap * u(y) / (4.0 * kPi * r));
    }
    return static_cast<double>(s) * h * h * h;
}

// Direct sum of (Lu)_i Phi_ij(x0 - y) u_j with Phi written out from its closed form.
inline double direct_lame_form(double alpha, const GridFunction& u, const GridFunction& lu, std::size_t x0)
{
    const GridDomain& dom = u.domain();
    const double c = (alpha + 2.0) / (8.0 * kPi * (alpha + 1.0));
    const double k = alpha / (alpha + 2.0);
    long double s = 0.0;
    for (std::size_t y : dom.interior_nodes()) {
        if (y == x0) continue;
        const Point p = dom.position(x0), q = dom.position(y);
        double d[3];
        for (int a = 0; a < 3; ++a) d[a] = p[a] - q[a];
        const double r = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                s += static_cast<long double>(lu(y, i) * c / r * ((i == j) + k * d[i] * d[j] / (r * r)) * u(y, j));
    }
    return static_cast<double>(s) * std::pow(dom.spacing(), 3);
}

}  // namespace epl::oracle
