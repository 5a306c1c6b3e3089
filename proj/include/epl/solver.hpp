#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "epl/core.hpp"
#include "epl/grid.hpp"
#include "epl/operators.hpp"
#include "epl/sparse.hpp"

namespace epl {

enum class SolveMethod { ConjugateGradient, StabilizedBiorthogonal };

struct SolveConfig {
    double rel_tolerance = 1e-10;
    int max_iterations = 20000;
    /// Unset: conjugate gradients for symmetric matrices, BiCGStab otherwise.
    std::optional<SolveMethod> method;

    void validate() const
    {
        EPL_REQUIRE(rel_tolerance > 0.0 && rel_tolerance <= 1e-4, InvalidArgument,
                    "rel_tolerance must lie in (0, 1e-4]");
        EPL_REQUIRE(max_iterations >= 1, InvalidArgument, "max_iterations must be positive");
    }
};

struct SolveStats {
    SolveMethod method = SolveMethod::ConjugateGradient;
    int iterations = 0;
    double relative_residual = 0.0;
};

namespace detail {

inline double true_relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b)
{
    std::vector<double> r = a * x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const double nb = norm2(b);
    return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients; x holds the initial guess on entry.
inline SolveStats conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                                     const SolveConfig& cfg)
{
    const std::size_t n = b.size();
    const std::vector<double> diag = a.diagonal();
    std::vector<double> r(n), z(n), p(n), ap(n);
    a.multiply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    const double nb = norm2(b);
    if (nb == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {SolveMethod::ConjugateGradient, 0, 0.0};
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    SolveStats st{SolveMethod::ConjugateGradient, 0, norm2(r) / nb};
    // Target slightly below the requested tolerance so the recomputed residual also meets it.
    const double target = 0.5 * cfg.rel_tolerance;
    for (int it = 1; it <= cfg.max_iterations && st.relative_residual > target; ++it) {
        a.multiply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double step = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        st.iterations = it;
        st.relative_residual = norm2(r) / nb;
    }
    st.relative_residual = detail::true_relative_residual(a, x, b);
    if (st.relative_residual > cfg.rel_tolerance)
        throw ConvergenceError("conjugate gradient did not converge", st.relative_residual);
    return st;
}

/// Jacobi-preconditioned BiCGStab; x holds the initial guess on entry.
inline SolveStats bicgstab(const CsrMatrix& a, std::span<const double> b, std::span<double> x, const SolveConfig& cfg)
{
    const std::size_t n = b.size();
    const std::vector<double> diag = a.diagonal();
    std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
    a.multiply(x, v);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - v[i];
    const double nb = norm2(b);
    if (nb == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {SolveMethod::StabilizedBiorthogonal, 0, 0.0};
    }
    r0 = r;
    std::fill(v.begin(), v.end(), 0.0);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    SolveStats st{SolveMethod::StabilizedBiorthogonal, 0, norm2(r) / nb};
    const double target = 0.5 * cfg.rel_tolerance;
    for (int it = 1; it <= cfg.max_iterations && st.relative_residual > target; ++it) {
        const double rho_new = dot(r0, r);
        if (rho_new == 0.0) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        for (std::size_t i = 0; i < n; ++i) ph[i] = p[i] / diag[i];
        a.multiply(ph, v);
        alpha = rho / dot(r0, v);
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        for (std::size_t i = 0; i < n; ++i) sh[i] = s[i] / diag[i];
        a.multiply(sh, t);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        st.iterations = it;
        st.relative_residual = norm2(r) / nb;
        if (omega == 0.0) break;
    }
    st.relative_residual = detail::true_relative_residual(a, x, b);
    if (st.relative_residual > cfg.rel_tolerance)
        throw ConvergenceError("BiCGStab did not converge", st.relative_residual);
    return st;
}

/// Solves a x = b with the configured (or automatically chosen) method.
inline SolveStats solve_linear(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                               const SolveConfig& cfg)
{
    cfg.validate();
    const SolveMethod method =
        cfg.method.value_or(a.is_symmetric(1e-12) ? SolveMethod::ConjugateGradient : SolveMethod::StabilizedBiorthogonal);
    return method == SolveMethod::ConjugateGradient ? conjugate_gradient(a, b, x, cfg) : bicgstab(a, b, x, cfg);
}

/// Discrete Dirichlet problem L u = f with u = 0 off the interior.
inline GridFunction solve_dirichlet(const OperatorSpec& op, const GridFunction& f, const SolveConfig& cfg = {},
                                    SolveStats* stats = nullptr)
{
    cfg.validate();
    EPL_REQUIRE(f.components() == components(op), InvalidArgument, "right-hand side has wrong component count");
    const CsrMatrix a = assemble(op, f.domain());
    const std::vector<double> b = to_dofs(f);
    std::vector<double> x(b.size(), 0.0);
    const SolveStats st = solve_linear(a, b, x, cfg);
    if (stats) *stats = st;
    return from_dofs(f.domain_ptr(), f.components(), x);
}

/// Discrete Green's function with pole at interior node y0: solves L G = delta_{y0} where the
/// delta has mass one (value h^-n at y0). Systems return one column per unit vector at y0.
inline std::vector<GridFunction> green_columns(const OperatorSpec& op, const DomainPtr& dom, std::size_t y0,
                                               const SolveConfig& cfg = {})
{
    cfg.validate();
    EPL_REQUIRE(y0 < dom->node_count() && dom->interior(y0), InvalidArgument, "Green pole must be an interior node");
    const CsrMatrix a = assemble(op, *dom);
    const int nc = components(op);
    std::vector<GridFunction> cols;
    for (int c = 0; c < nc; ++c) {
        GridFunction delta(dom, nc);
        delta.at(y0, c) = 1.0 / dom->cell_volume();
        const std::vector<double> b = to_dofs(delta);
        std::vector<double> x(b.size(), 0.0);
        solve_linear(a, b, x, cfg);
        cols.push_back(from_dofs(dom, nc, x));
    }
    return cols;
}

/// Scalar convenience form of green_columns.
inline GridFunction green_column(const OperatorSpec& op, const DomainPtr& dom, std::size_t y0,
                                 const SolveConfig& cfg = {})
{
    EPL_REQUIRE(components(op) == 1, InvalidArgument, "green_column is scalar; use green_columns for systems");
    return green_columns(op, dom, y0, cfg).front();
}

}  // namespace epl
