#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "epl/core.hpp"
#include "epl/fundsol.hpp"
#include "epl/grid.hpp"
#include "epl/lanczos.hpp"
#include "epl/operators.hpp"
#include "epl/solver.hpp"
#include "epl/sparse.hpp"

namespace epl {

/// Closed ball of radius radius_cells * h around `center` on which admissible functions vanish.
struct PunctureSpec {
    std::size_t center = 0;
    int radius_cells = 2;

    void validate(const GridDomain& dom) const
    {
        EPL_REQUIRE(radius_cells >= 1, InvalidArgument, "puncture radius must be at least one cell");
        EPL_REQUIRE(center < dom.node_count(), InvalidArgument, "puncture center outside the grid");
        const Index c = dom.unravel(center);
        for (int a = 0; a < dom.dim(); ++a)
            EPL_REQUIRE(c[a] - radius_cells >= 0 && c[a] + radius_cells < dom.extent(a), InvalidArgument,
                        "puncture ball does not fit inside the grid");
    }
    bool contains(const GridDomain& dom, std::size_t node) const
    {
        const double r = radius_cells * dom.spacing();
        return dom.distance(node, center) <= r * (1.0 + 1e-12);
    }
};

/// Decomposition Q = 1/2 |u(x0)|^2 + c sum_k strong_k + defect.
struct FormReport {
    double form_value = 0.0;
    double pointwise_term = 0.0;
    std::vector<double> strong_terms;
    double defect = 0.0;
    std::size_t admissible_dim = 0;
    /// sum |(Lu)_i w_ij u_j| h^n + pointwise + c sum strong: a magnitude for relative tolerances.
    double magnitude = 0.0;
};

namespace detail {

inline double skip_radius(const WeightEvaluator& w, const GridDomain& dom)
{
    return std::max(w.regularization_radius(), 0.5 * dom.spacing());
}

inline void check_weight_compat(const OperatorSpec& op, const WeightEvaluator& w, const GridFunction& u)
{
    EPL_REQUIRE(w.components() == u.components(), InvalidArgument, "weight and function component counts differ");
    EPL_REQUIRE(components(op) == u.components(), InvalidArgument, "operator and function component counts differ");
    EPL_REQUIRE(w.dim() == u.domain().dim(), InvalidArgument, "weight dimension does not match domain");
}

/// sum_y (Lu)_i(y) w_ij u_j(y) h^n over non-skipped interior nodes, given Lu.
inline double contract_form(const GridFunction& lu, const WeightEvaluator& w, const GridFunction& u, std::size_t x0,
                            double* magnitude = nullptr, std::size_t* used = nullptr)
{
    const GridDomain& dom = u.domain();
    const int nc = u.components();
    const double skip = skip_radius(w, dom);
    std::vector<double> wv(nc * nc);
    CompensatedSum q, mag;
    std::size_t count = 0;
    for (std::size_t y : dom.interior_nodes()) {
        if (dom.distance(x0, y) < skip) continue;
        ++count;
        bool any = false;
        for (int c = 0; c < nc; ++c) any = any || u(y, c) != 0.0;
        if (!any) continue;
        w.at_node(dom, x0, y, wv);
        for (double v : wv)
            EPL_REQUIRE(std::isfinite(v), Error, "weight is singular at an unskipped node");
        for (int i = 0; i < nc; ++i) {
            if (lu(y, i) == 0.0) continue;
            for (int j = 0; j < nc; ++j) {
                const double t = lu(y, i) * wv[i * nc + j] * u(y, j);
                q += t;
                mag += std::abs(t);
            }
        }
    }
    const double vol = dom.cell_volume();
    if (magnitude) *magnitude = mag.value() * vol;
    if (used) *used = count * nc;
    return q.value() * vol;
}

}  // namespace detail

/// Q(u) = int Lu . W(x0 - y) u dy by the node-wise midpoint rule, skipping nodes closer to x0 than
/// max(rho, h/2).
inline double weighted_form(const OperatorSpec& op, const WeightEvaluator& w, const GridFunction& u, std::size_t x0)
{
    detail::check_weight_compat(op, w, u);
    EPL_REQUIRE(x0 < u.domain().node_count(), InvalidArgument, "pole outside the grid");
    const GridFunction lu = epl::apply(op, u);
    return detail::contract_form(lu, w, u, x0);
}

/// int Lu G(x0, .) u |u|^{n-3} dy - |u(x0)|^{n-1} / (n-1) with the discrete Green column G.
/// Nonnegative up to discretization error for elliptic scalar operators.
inline double scalar_weighted_identity_check(const ScalarDivForm& op, const GridFunction& u, std::size_t x0, int n,
                                             const GridFunction& green)
{
    EPL_REQUIRE(n >= 3, InvalidArgument, "identity check needs n >= 3");
    EPL_REQUIRE(u.components() == 1, InvalidArgument, "identity check needs a scalar function");
    EPL_REQUIRE(n == u.domain().dim(), InvalidArgument, "n does not match the domain dimension");
    const GridFunction lu = epl::apply(OperatorSpec{op}, u);
    const GridDomain& dom = u.domain();
    CompensatedSum s;
    for (std::size_t y : dom.interior_nodes()) {
        const double v = u(y);
        if (v == 0.0) continue;
        s += lu(y) * green(y) * v * ipow(std::abs(v), n - 3);
    }
    return s.value() * dom.cell_volume() - ipow(std::abs(u(x0)), n - 1) / (n - 1);
}

inline double scalar_weighted_identity_check(const ScalarDivForm& op, const GridFunction& u, std::size_t x0, int n,
                                             const SolveConfig& cfg = {})
{
    const GridFunction g = green_column(OperatorSpec{op}, u.domain_ptr(), x0, cfg);
    return scalar_weighted_identity_check(op, u, x0, n, g);
}

/// Strong weighted positivity decomposition. Lame operators use the |x|^{-1} weighting of the
/// strong term; all other operators use |D^k u|^2 |x|^{2k-2m} |W| (Frobenius norm).
inline FormReport strong_defect(const OperatorSpec& op, const WeightEvaluator& w, const GridFunction& u,
                                std::size_t x0, double c)
{
    detail::check_weight_compat(op, w, u);
    const GridDomain& dom = u.domain();
    const int nc = u.components();
    const int m = half_order(op);
    const bool lame = std::holds_alternative<Lame3D>(op);
    FormReport rep;
    const GridFunction lu = epl::apply(op, u);
    double mag = 0.0;
    rep.form_value = detail::contract_form(lu, w, u, x0, &mag, &rep.admissible_dim);
    double u0 = 0.0;
    for (int k = 0; k < nc; ++k) u0 += u(x0, k) * u(x0, k);
    rep.pointwise_term = 0.5 * u0;
    const double skip = detail::skip_radius(w, dom);
    std::vector<double> wv(nc * nc);
    for (int k = 1; k <= m; ++k) {
        const GridFunction dk = gradient(u, k);
        CompensatedSum s;
        for (std::size_t y : dom.interior_nodes()) {
            const double r = dom.distance(x0, y);
            if (r < skip) continue;
            const double g = dk.magnitude(y);
            if (g == 0.0) continue;
            double weight;
            if (lame) {
                weight = 1.0 / r;
            } else {
                w.at_node(dom, x0, y, wv);
                weight = std::pow(r, 2.0 * k - 2.0 * m) * frobenius(wv);
            }
            s += g * g * weight;
        }
        rep.strong_terms.push_back(s.value() * dom.cell_volume());
    }
    double strong = 0.0;
    for (double t : rep.strong_terms) strong += t;
    rep.defect = rep.form_value - rep.pointwise_term - c * strong;
    rep.magnitude = mag + rep.pointwise_term + std::abs(c) * strong;
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Extremal eigenvalue of the weighted form on the admissible space

/// Symmetrized matrix of u -> weighted_form(op, w, u, x0) on admissible unknowns.
struct FormMatrix {
    CsrMatrix matrix;
    /// Interior dof index (interior_rank * N + component) of each admissible unknown.
    std::vector<std::size_t> dofs;
};

inline std::vector<std::size_t> admissible_dofs(const GridDomain& dom, const PunctureSpec& punct, int nc)
{
    std::vector<std::size_t> dofs;
    for (std::size_t node : dom.interior_nodes()) {
        if (punct.contains(dom, node)) continue;
        const std::size_t r = static_cast<std::size_t>(dom.interior_rank(node));
        for (int c = 0; c < nc; ++c) dofs.push_back(r * nc + c);
    }
    return dofs;
}

inline FormMatrix build_form_matrix(const OperatorSpec& op, const WeightEvaluator& w, const GridDomain& dom,
                                    const PunctureSpec& punct)
{
    punct.validate(dom);
    const int nc = components(op);
    EPL_REQUIRE(w.components() == nc, InvalidArgument, "weight and operator component counts differ");
    FormMatrix fm;
    fm.dofs = admissible_dofs(dom, punct, nc);
    EPL_REQUIRE(!fm.dofs.empty(), InvalidArgument, "admissible space is empty");
    const CsrMatrix a = assemble(op, dom).restrict_to(fm.dofs);

    // Block-diagonal weight on admissible unknowns.
    const std::size_t na = fm.dofs.size();
    CsrMatrix wm(na, na);
    std::vector<double> wv(nc * nc);
    std::vector<std::pair<std::size_t, double>> row;
    const auto interior = dom.interior_nodes();
    for (std::size_t k = 0; k < na; k += static_cast<std::size_t>(nc)) {
        const std::size_t node = interior[fm.dofs[k] / nc];
        w.at_node(dom, punct.center, node, wv);
        for (int i = 0; i < nc; ++i) {
            row.clear();
            for (int j = 0; j < nc; ++j) row.emplace_back(k + j, wv[i * nc + j]);
            wm.push_row(row);
        }
    }
    const CsrMatrix atw = a.transpose().product(wm);
    const double half_vol = 0.5 * dom.cell_volume();
    fm.matrix = atw.combine(half_vol, atw.transpose(), half_vol);
    return fm;
}

struct RayleighConfig {
    int iters = 300;
    /// Target residual ||M v - lambda v|| relative to the spectral scale of M.
    double residual_tol = 1e-10;
    /// Residual above which the search is declared stagnant.
    double stagnation_tol = 1e-8;
    std::uint64_t seed = 7;
    /// Multiplies the deterministic start vector; the result must not depend on it.
    double start_scale = 1.0;
    /// Bisection steps used to move the shift towards the bottom eigenvalue.
    int bisections = 6;
};

struct RayleighResult {
    double min_eig = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::size_t admissible_dim = 0;
    double spectral_scale = 0.0;
    double shift = 0.0;
    /// Normalized argmin on admissible unknowns (see FormMatrix::dofs).
    std::vector<double> vector;
};

/// Raised when the eigen search cannot reach its residual target; carries the best estimate.
class StagnationError : public ConvergenceError {
public:
    StagnationError(double estimate, double residual)
        : ConvergenceError("minimum eigenvalue search stagnated at estimate " + detail::fmt17(estimate), residual),
          estimate_(estimate)
    {
    }
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

/// Minimum eigenvalue of a symmetric sparse matrix.
///
/// A short Lanczos run bounds the bottom of the spectrum from above; a shift strictly below every
/// eigenvalue is then located by trial Cholesky factorizations and narrowed by bisection, and Lanczos on
/// the shifted inverse delivers the bottom eigenpair. The returned value is the Rayleigh quotient
/// of the final Ritz vector.
inline RayleighResult min_eigenvalue(const CsrMatrix& m, const RayleighConfig& cfg = {})
{
    EPL_REQUIRE(cfg.iters >= 1, InvalidArgument, "iteration budget must be positive");
    const std::size_t n = m.rows();
    RayleighResult res;
    res.admissible_dim = n;
    double scale = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) s += std::abs(m.values()[k]);
        scale = std::max(scale, s);
    }
    res.spectral_scale = scale;
    if (scale == 0.0) {
        res.vector.assign(n, 0.0);
        res.vector[0] = 1.0;
        return res;
    }

    std::vector<double> start(n);
    SplitMix64 rng(cfg.seed);
    for (double& v : start) v = cfg.start_scale * rng.uniform(-1.0, 1.0);

    const LinearMap mv = [&](std::span<const double> x, std::span<double> y) { m.multiply(x, y); };
    const LanczosResult coarse = lanczos_extreme(mv, start, std::min(cfg.iters, 40), false);
    const double theta = coarse.value;

    ShiftedCholesky chol(to_eigen(m));
    // Find sigma_lo with no eigenvalue below it, and sigma_hi with at least one.
    double d = std::max(std::abs(theta), 1e-6 * scale);
    double sigma_hi = theta + 1e-12 * scale;
    double sigma_lo = theta - d;
    int factorizations = 0;
    for (;; d *= 2.0, sigma_lo = theta - d) {
        EPL_REQUIRE(++factorizations <= 80, Error, "could not bracket the bottom of the spectrum");
        if (chol.factor(sigma_lo)) break;
        sigma_hi = sigma_lo;
    }
    // Narrow the bracket so the shifted inverse separates the bottom eigenvalue well.
    for (int b = 0; b < cfg.bisections; ++b) {
        const double width = sigma_hi - sigma_lo;
        if (width <= 1e-3 * scale) break;
        const double mid = sigma_lo + 0.5 * width;
        if (chol.factor(mid))
            sigma_lo = mid;
        else
            sigma_hi = mid;
    }
    EPL_REQUIRE(chol.factor(sigma_lo), Error, "shifted factorization failed");
    const ShiftedCholesky& inv = chol;
    const LinearMap solve = [&](std::span<const double> x, std::span<double> y) { inv.solve(x, y); };
    // A Ritz residual r on the shifted inverse bounds the residual on M by (scale + |sigma|) r / mu.
    const double inv_tol = 0.1 * cfg.residual_tol * scale / (scale + std::abs(inv.sigma()));
    const LanczosResult top = lanczos_extreme(solve, start, cfg.iters, true, inv_tol, true);
    std::vector<double> v = top.vector;
    std::vector<double> mvv(n);
    m.multiply(v, mvv);
    const double lambda = dot(v, mvv) / dot(v, v);
    for (std::size_t i = 0; i < n; ++i) mvv[i] -= lambda * v[i];
    res.min_eig = lambda;
    res.residual = norm2(mvv) / norm2(v);
    res.iterations = coarse.steps + top.steps;
    res.shift = inv.sigma();
    res.vector = std::move(v);
    if (res.residual > cfg.stagnation_tol * scale) throw StagnationError(res.min_eig, res.residual);
    return res;
}

/// Minimum Rayleigh quotient of the symmetrized weighted form over functions vanishing on the puncture.
inline RayleighResult min_rayleigh(const OperatorSpec& op, const WeightEvaluator& w, const GridDomain& dom,
                                   const PunctureSpec& punct, const RayleighConfig& cfg = {})
{
    const FormMatrix fm = build_form_matrix(op, w, dom, punct);
    return min_eigenvalue(fm.matrix, cfg);
}

// ---------------------------------------------------------------------------------------------
// Lame positivity window

struct AlphaRow {
    double alpha = 0.0;
    double min_eig = 0.0;
    int grid = 0;
    int puncture = 0;
    int iters = 0;
    double residual = 0.0;
};

struct ThresholdResult {
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    std::vector<AlphaRow> table;
};

/// Sign classification used by the window search: nonnegative iff min_eig >= -sign_tolerance.
struct AlphaSearchConfig {
    int radius_cells = 2;
    double sign_tolerance = 1e-6;
    RayleighConfig rayleigh{};
};

inline AlphaRow lame_min_eig(const GridDomain& dom, double alpha, const AlphaSearchConfig& cfg)
{
    const PunctureSpec punct{center_node(dom), cfg.radius_cells};
    const RayleighResult r = min_rayleigh(Lame3D{alpha}, WeightEvaluator::lame(alpha), dom, punct, cfg.rayleigh);
    return {alpha, r.min_eig, dom.extent(0), cfg.radius_cells, r.iterations, r.residual};
}

/// A search bracket shows no sign change of the minimum eigenvalue.
class BracketError : public Error {
public:
    using Error::Error;
};

/// Bisection on the sign of the Lame minimum eigenvalue over `bracket`, which must be nonnegative at
/// its left end iff `left_nonneg`. Every evaluation is appended to `table`.
inline double alpha_threshold_bisect(const GridDomain& dom, std::pair<double, double> bracket, bool left_nonneg,
                                     double tol_alpha, const AlphaSearchConfig& cfg, std::vector<AlphaRow>& table)
{
    EPL_REQUIRE(tol_alpha > 0.0, InvalidArgument, "alpha tolerance must be positive");
    EPL_REQUIRE(bracket.first < bracket.second, InvalidArgument, "brackets must be increasing");
    EPL_REQUIRE(bracket.first > -1.0, InvalidArgument, "brackets must satisfy alpha > -1");
    auto nonneg = [&](double alpha) {
        const AlphaRow row = lame_min_eig(dom, alpha, cfg);
        table.push_back(row);
        return row.min_eig >= -cfg.sign_tolerance;
    };
    double a = bracket.first, b = bracket.second;
    const bool fa = nonneg(a);
    const bool fb = nonneg(b);
    if (fa != left_nonneg || fb == left_nonneg)
        throw BracketError("bracket [" + detail::fmt17(a) + ", " + detail::fmt17(b) +
                           "] does not straddle threshold at this resolution");
    while (b - a > tol_alpha) {
        const double mid = 0.5 * (a + b);
        if (nonneg(mid) == left_nonneg)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

/// Both ends of the positivity window: `lower` goes from negative to nonnegative, `upper` from
/// nonnegative to negative. The table is sorted by alpha.
inline ThresholdResult alpha_threshold_search(const GridDomain& dom, std::pair<double, double> lower,
                                              std::pair<double, double> upper, double tol_alpha,
                                              const AlphaSearchConfig& cfg = {})
{
    ThresholdResult out;
    out.alpha_minus = alpha_threshold_bisect(dom, lower, false, tol_alpha, cfg, out.table);
    out.alpha_plus = alpha_threshold_bisect(dom, upper, true, tol_alpha, cfg, out.table);
    std::stable_sort(out.table.begin(), out.table.end(),
                     [](const AlphaRow& x, const AlphaRow& y) { return x.alpha < y.alpha; });
    return out;
}

}  // namespace epl
