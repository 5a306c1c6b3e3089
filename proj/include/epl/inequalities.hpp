#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "epl/core.hpp"
#include "epl/fundsol.hpp"
#include "epl/grid.hpp"
#include "epl/operators.hpp"
#include "epl/parallel.hpp"
#include "epl/solver.hpp"
#include "epl/testfn.hpp"

namespace epl {

// ---------------------------------------------------------------------------------------------
// Cases and constants

enum class CaseKind { Thm1, Lame, Higher };

inline std::string to_string(CaseKind k)
{
    switch (k) {
    case CaseKind::Thm1: return "thm1";
    case CaseKind::Lame: return "lame";
    case CaseKind::Higher: return "higher";
    }
    return "?";
}

/// Lame weighted positivity window quoted for the Lame inequality.
inline constexpr double kLameWindowLow = -0.194;
inline constexpr double kLameWindowHigh = 1.524;

/// One of the three multiplicative inequalities with its exponents.
///
/// Thm1:   ||u||_inf^{n-1} <= C ||Lu||_p ||Du||_q^{n-2},   p = s/(s-1), q = (n-2)s.
/// Lame:   ||u||_inf^2     <= C ||Lu||_p ||Du||_q,          p = q/(q-1).
/// Higher: ||u||_inf^2     <= C ||D^k u||_q ||Lu||_{q'},     q' = q/(q-1), k = n-2m.
struct InequalityCase {
    CaseKind kind = CaseKind::Thm1;
    int n = 3;
    double s = 2.0;
    double alpha = 0.0;
    double q = 2.0;
    int m = 2;
    /// Upper Green constant for Thm1; the Laplace amplitude is used when unset.
    std::optional<double> c2;

    static InequalityCase thm1(int n, double s, std::optional<double> c2 = std::nullopt)
    {
        InequalityCase c;
        c.kind = CaseKind::Thm1;
        c.n = n;
        c.s = s;
        c.q = (n - 2) * s;
        c.c2 = c2;
        return c;
    }
    static InequalityCase lame(double alpha, double q)
    {
        InequalityCase c;
        c.kind = CaseKind::Lame;
        c.n = 3;
        c.alpha = alpha;
        c.q = q;
        c.m = 1;
        return c;
    }
    static InequalityCase higher(int m, int n, double q)
    {
        InequalityCase c;
        c.kind = CaseKind::Higher;
        c.n = n;
        c.m = m;
        c.q = q;
        return c;
    }

    /// Exponent on Lu.
    double p() const { return kind == CaseKind::Thm1 ? s / (s - 1.0) : q / (q - 1.0); }
    /// Order of the derivative norm.
    int k() const { return kind == CaseKind::Higher ? n - 2 * m : 1; }
    double r() const { return n / q; }

    void validate() const
    {
        switch (kind) {
        case CaseKind::Thm1:
            EPL_REQUIRE(n >= 3 && n <= kMaxDim, InvalidArgument, "thm1 needs 3 <= n <= 7");
            EPL_REQUIRE(s > 1.0, InvalidArgument, "thm1 needs s > 1");
            EPL_REQUIRE(s < static_cast<double>(n) / (n - 2), InvalidArgument, "thm1 needs s < n/(n-2)");
            if (c2) EPL_REQUIRE(*c2 > 0.0 && std::isfinite(*c2), InvalidArgument, "c2 must be positive");
            break;
        case CaseKind::Lame:
            EPL_REQUIRE(n == 3, InvalidArgument, "the Lame case is three-dimensional");
            EPL_REQUIRE(q > 1.0 && q < 3.0, InvalidArgument, "lame needs 1 < q < 3");
            EPL_REQUIRE(alpha > kLameWindowLow && alpha < kLameWindowHigh, InvalidArgument,
                        "lame needs alpha in (-0.194, 1.524)");
            break;
        case CaseKind::Higher:
            EPL_REQUIRE(m >= 1, InvalidArgument, "higher needs m >= 1");
            EPL_REQUIRE(n > 2 * m && n <= kMaxDim, InvalidArgument, "higher needs 2m < n <= 7");
            EPL_REQUIRE(q > 1.0, InvalidArgument, "higher needs q > 1");
            EPL_REQUIRE(q < static_cast<double>(n) / (n - 2 * m), InvalidArgument, "higher needs q < n/(n-2m)");
            polyharmonic_amplitude(m, n);
            break;
        }
    }
};

/// C = c2 (n-1) (q/(n-q))^{n-2}.
inline double thm1_constant(int n, double s, double c2)
{
    const double q = (n - 2) * s;
    return c2 * (n - 1) * std::pow(q / (n - q), n - 2);
}

/// C = 2 c_alpha (1 + |alpha|/(alpha+2)) q/(3-q).
inline double lame_constant(double alpha, double q)
{
    return 2.0 * lame_amplitude(alpha) * (1.0 + std::abs(alpha) / (alpha + 2.0)) * (q / (3.0 - q));
}

/// prod_{j=1}^{k} 1/(r-j).
inline double hardy_chain_constant(double r, int k)
{
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c /= (r - j);
    return c;
}

/// C = 2 c4 prod_{j=1}^{k} 1/(r-j), c4 = max |F| on the unit sphere.
inline double higher_constant(int m, int n, double q, double c4)
{
    return 2.0 * c4 * hardy_chain_constant(n / q, n - 2 * m);
}

inline double case_constant(const InequalityCase& c)
{
    switch (c.kind) {
    case CaseKind::Thm1: return thm1_constant(c.n, c.s, c.c2.value_or(laplace_amplitude(c.n)));
    case CaseKind::Lame: return lame_constant(c.alpha, c.q);
    case CaseKind::Higher:
        return higher_constant(c.m, c.n, c.q, weight_sup_on_sphere(WeightEvaluator::polyharmonic(c.m, c.n)));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------------------------
// Ratios

struct RatioReport {
    std::string case_name;
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;
    double normalized_ratio = 0.0;
    double p = 0.0;
    double q = 0.0;
    std::map<std::string, double> norms;
    std::uint64_t seed = 0;
    std::string shape;
    int grid = 0;
};

namespace detail {

/// L^q norm of the full symmetric k-tensor D^k u: each stored multi-index is counted with its
/// number of orderings.
inline double tensor_lp_norm(const GridFunction& dk, int nu, int n, int k, double q)
{
    const auto betas = multi_indices(n, k);
    const int nb = static_cast<int>(betas.size());
    std::vector<double> mult(nb);
    for (int b = 0; b < nb; ++b) {
        std::array<int, kMaxDim> cnt{};
        for (int a : betas[b]) ++cnt[a];
        double f = std::tgamma(k + 1.0);
        for (int a = 0; a < n; ++a) f /= std::tgamma(cnt[a] + 1.0);
        mult[b] = f;
    }
    const GridDomain& dom = dk.domain();
    CompensatedSum s;
    for (std::size_t node : dom.interior_nodes()) {
        double m2 = 0.0;
        for (int c = 0; c < nu; ++c)
            for (int b = 0; b < nb; ++b) {
                const double v = dk(node, c * nb + b);
                m2 += mult[b] * v * v;
            }
        if (m2 != 0.0) s += (q == 2.0 ? m2 : std::pow(m2, 0.5 * q));
    }
    return std::pow(s.value() * dom.cell_volume(), 1.0 / q);
}

inline double norm_of_derivative(const GridFunction& u, int k, double q)
{
    return tensor_lp_norm(gradient(u, k), u.components(), u.domain().dim(), k, q);
}

inline RatioReport finish_ratio(RatioReport rep)
{
    EPL_REQUIRE(std::isfinite(rep.lhs) && std::isfinite(rep.rhs), Error, "non-finite norms");
    if (rep.rhs == 0.0) {
        EPL_REQUIRE(rep.lhs == 0.0, Error, "inconsistent zero");
        rep.normalized_ratio = 0.0;
        return rep;
    }
    rep.normalized_ratio = rep.lhs / (rep.constant * rep.rhs);
    return rep;
}

}  // namespace detail

/// Evaluates one multiplicative inequality on u with the case's explicit constant.
inline RatioReport inequality_ratio(const InequalityCase& c, const OperatorSpec& op, const GridFunction& u)
{
    c.validate();
    validate(op);
    EPL_REQUIRE(u.components() == components(op), InvalidArgument, "function component count does not match the operator");
    EPL_REQUIRE(u.domain().dim() == c.n && operator_dim(op) == c.n, InvalidArgument,
                "case dimension does not match the operator or domain");
    switch (c.kind) {
    case CaseKind::Thm1:
        EPL_REQUIRE(std::holds_alternative<ScalarDivForm>(op), InvalidArgument, "thm1 needs a scalar divergence-form operator");
        EPL_REQUIRE(c.c2 || std::get<ScalarDivForm>(op).identity, InvalidArgument,
                    "thm1 with variable coefficients needs an empirical c2");
        break;
    case CaseKind::Lame:
        EPL_REQUIRE(std::holds_alternative<Lame3D>(op) && std::get<Lame3D>(op).alpha == c.alpha, InvalidArgument,
                    "lame case needs the Lame operator with the same alpha");
        break;
    case CaseKind::Higher: {
        const auto* p = std::get_if<Polyharmonic>(&op);
        EPL_REQUIRE(p && p->m == c.m, InvalidArgument, "higher case needs the polyharmonic operator of the same order");
        break;
    }
    }

    RatioReport rep;
    rep.case_name = to_string(c.kind);
    rep.p = c.p();
    rep.q = c.q;
    rep.constant = case_constant(c);
    const double sup = lp_norm(u, INFINITY);
    const double lu = lp_norm(epl::apply(op, u), rep.p);
    const double dk = detail::norm_of_derivative(u, c.k(), c.q);
    rep.norms["sup_u"] = sup;
    rep.norms["lu_lp"] = lu;
    rep.norms["dku_lq"] = dk;
    if (c.kind == CaseKind::Thm1) {
        rep.lhs = ipow(sup, c.n - 1);
        rep.rhs = lu * ipow(dk, c.n - 2);
    } else {
        rep.lhs = sup * sup;
        rep.rhs = lu * dk;
    }
    rep.grid = u.domain().extent(0);
    return detail::finish_ratio(rep);
}

/// Seeded batch of ratio evaluations: `trials` test functions on each shape.
struct TrialConfig {
    std::vector<ShapeKind> shapes{ShapeKind::Ball};
    int nodes = 33;
    int trials = 10;
    std::uint64_t seed = 1;
    TestFnSpec function{};

    void validate() const
    {
        EPL_REQUIRE(!shapes.empty(), InvalidArgument, "at least one shape is required");
        EPL_REQUIRE(nodes >= 5, InvalidArgument, "grid must have at least 5 nodes per axis");
        EPL_REQUIRE(trials >= 1, InvalidArgument, "trials must be positive");
    }
};

/// Trial seed for trial `t` of a batch seeded with `seed`.
inline std::uint64_t trial_seed(std::uint64_t seed, int t) { return seed * 1000003ULL + static_cast<std::uint64_t>(t); }

/// Reports ordered by shape, then trial.
inline std::vector<RatioReport> ratio_trials(const InequalityCase& c, const OperatorSpec& op, const TrialConfig& cfg)
{
    c.validate();
    cfg.validate();
    std::vector<DomainPtr> domains;
    for (ShapeKind k : cfg.shapes) domains.push_back(build_domain(DomainShape::standard(k), cfg.nodes, c.n));
    const std::size_t per = static_cast<std::size_t>(cfg.trials);
    std::vector<RatioReport> out(domains.size() * per);
    parallel_for(out.size(), [&](std::size_t i) {
        const std::size_t d = i / per;
        const int t = static_cast<int>(i % per);
        TestFnSpec spec = cfg.function;
        spec.seed = trial_seed(cfg.seed, t);
        spec.components = components(op);
        RatioReport r = inequality_ratio(c, op, generate_test_function(domains[d], spec));
        r.seed = spec.seed;
        r.shape = to_string(cfg.shapes[d]);
        out[i] = std::move(r);
    });
    return out;
}

inline double max_ratio(const std::vector<RatioReport>& reps)
{
    double m = 0.0;
    for (const auto& r : reps) m = std::max(m, r.normalized_ratio);
    return m;
}

// ---------------------------------------------------------------------------------------------
// Hardy inequalities

namespace detail {

/// Upper incomplete gamma function for any real a, using Gamma(a, x) = (Gamma(a+1, x) - x^a e^-x) / a
/// below zero and Gamma(0, x) = E1(x).
inline double upper_gamma(double a, double x)
{
    if (a > 0.0) return boost::math::tgamma(a, x);
    if (a == 0.0) return boost::math::expint(1, x);
    return (upper_gamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
}

}  // namespace detail

/// Epstein zeta function of the cubic lattice, Z_n(s) = sum_{k in Z^n, k != 0} |k|^{-s},
/// analytically continued to 0 < s < n by the Riemann splitting of the theta function.
inline double lattice_zeta(int n, double s)
{
    EPL_REQUIRE(n >= 1 && n <= kMaxDim, InvalidArgument, "lattice zeta dimension must lie in [1, 7]");
    EPL_REQUIRE(s > 0.0 && s != n, InvalidArgument, "lattice zeta needs s > 0 and s != n");
    const double pi = std::numbers::pi;
    const double a = 0.5 * s, b = 0.5 * (n - s);
    // Terms decay like exp(-pi |k|^2); |k|^2 <= 36 leaves a remainder far below double precision.
    const int R = 6;
    CompensatedSum acc;
    Index k{};
    for (int a0 = 0; a0 < n; ++a0) k[a0] = -R;
    while (true) {
        long k2 = 0;
        for (int d = 0; d < n; ++d) k2 += static_cast<long>(k[d]) * k[d];
        if (k2 != 0 && k2 <= R * R) {
            const double x = pi * static_cast<double>(k2);
            acc += detail::upper_gamma(a, x) * std::pow(x, -a);
            acc += detail::upper_gamma(b, x) * std::pow(x, -b);
        }
        int d = n - 1;
        while (d >= 0 && ++k[d] > R) k[d--] = -R;
        if (d < 0) break;
    }
    const double bracket = -1.0 / a + 1.0 / (a - 0.5 * n) + acc.value();
    return bracket * std::pow(pi, a) / std::tgamma(a);
}

namespace detail {

/// int |u|^q |x - x0|^{-gamma} dy by the midpoint rule with the pole node removed, plus the
/// leading lattice correction -Z_n(gamma) |u(x0)|^q h^{n-gamma} for the removed singularity.
inline double singular_moment(const GridFunction& u, std::size_t x0, double q, double gamma)
{
    const GridDomain& dom = u.domain();
    const int n = dom.dim();
    CompensatedSum s;
    for (std::size_t y : dom.interior_nodes()) {
        if (y == x0) continue;
        const double mag = u.magnitude(y);
        if (mag == 0.0) continue;
        s += std::pow(mag, q) * std::pow(dom.distance(x0, y), -gamma);
    }
    const double h = dom.spacing();
    double total = s.value() * dom.cell_volume();
    const double u0 = u.magnitude(x0);
    if (u0 != 0.0) total -= lattice_zeta(n, gamma) * std::pow(u0, q) * std::pow(h, n - gamma);
    return total;
}

struct HardyParts {
    double numerator = 0.0;    // int |u|^q |x|^{-kq}
    double derivative = 0.0;   // ||D^k u||_q
};

inline HardyParts hardy_parts(const GridFunction& u, std::size_t center, double q, int k, int n)
{
    EPL_REQUIRE(n == u.domain().dim(), InvalidArgument, "n does not match the domain dimension");
    EPL_REQUIRE(q >= 1.0, InvalidArgument, "Hardy exponent must be at least 1");
    EPL_REQUIRE(k >= 1, InvalidArgument, "Hardy chain length must be at least 1");
    EPL_REQUIRE(k * q < n, InvalidArgument, "Hardy inequality needs k q < n");
    EPL_REQUIRE(center < u.domain().node_count(), InvalidArgument, "Hardy center outside the grid");
    return {singular_moment(u, center, q, k * q), norm_of_derivative(u, k, q)};
}

}  // namespace detail

/// [int |u|^q |x-x0|^{-q}] / [(q/(n-q))^q int |Du|^q]; at most 1 up to discretization error.
inline double hardy_ratio(const GridFunction& u, std::size_t center, double q, int n)
{
    EPL_REQUIRE(q < n, InvalidArgument, "Hardy inequality needs q < n");
    const auto parts = detail::hardy_parts(u, center, q, 1, n);
    if (parts.numerator == 0.0) return 0.0;
    EPL_REQUIRE(parts.derivative > 0.0, Error, "inconsistent zero");
    return parts.numerator / std::pow(q / (n - q) * parts.derivative, q);
}

/// [int |u|^q |x-x0|^{-kq}]^{1/q} / (prod_{j=1}^k 1/(r-j) ||D^k u||_q), r = n/q.
inline double hardy_chain_ratio(const GridFunction& u, std::size_t center, double q, int k, int n)
{
    const auto parts = detail::hardy_parts(u, center, q, k, n);
    if (parts.numerator == 0.0) return 0.0;
    EPL_REQUIRE(parts.derivative > 0.0, Error, "inconsistent zero");
    return std::pow(parts.numerator, 1.0 / q) / (hardy_chain_constant(n / q, k) * parts.derivative);
}

// ---------------------------------------------------------------------------------------------
// Green's function bounds

struct GreenBounds {
    double c1 = 0.0;
    double c2 = 0.0;
    std::size_t window_nodes = 0;
    double inner_radius = 0.0;
    double outer_radius = 0.0;
};

/// min and max of G(x, y0) |x - y0|^{n-2} over 3h <= |x - y0| <= dist(y0, boundary)/2.
inline GreenBounds green_sandwich_check(const ScalarDivForm& op, std::size_t y0, const DomainPtr& dom,
                                        const SolveConfig& cfg = {})
{
    validate(OperatorSpec{op}, *dom);
    EPL_REQUIRE(y0 < dom->node_count() && dom->interior(y0), InvalidArgument, "Green pole must be an interior node");
    const int n = dom->dim();
    const double h = dom->spacing();
    double width = 0.0;
    for (int a = 0; a < n; ++a) width = std::max(width, (dom->extent(a) - 1) * h);
    const double d = dom->distance_to_exterior(y0);
    EPL_REQUIRE(d >= 0.25 * width, InvalidArgument, "Green pole is not deep inside the domain");
    GreenBounds gb;
    gb.inner_radius = 3.0 * h;
    gb.outer_radius = 0.5 * d;
    EPL_REQUIRE(gb.outer_radius >= gb.inner_radius, InvalidArgument, "Green window is empty (domain too small)");
    const GridFunction g = green_column(OperatorSpec{op}, dom, y0, cfg);
    gb.c1 = INFINITY;
    gb.c2 = -INFINITY;
    for (std::size_t x : dom->interior_nodes()) {
        const double r = dom->distance(x, y0);
        if (r < gb.inner_radius || r > gb.outer_radius) continue;
        const double v = g(x) * std::pow(r, n - 2);
        gb.c1 = std::min(gb.c1, v);
        gb.c2 = std::max(gb.c2, v);
        ++gb.window_nodes;
    }
    EPL_REQUIRE(gb.window_nodes > 0, InvalidArgument, "Green window is empty (domain too small)");
    return gb;
}

}  // namespace epl
