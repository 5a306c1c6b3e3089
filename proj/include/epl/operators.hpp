#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "epl/core.hpp"
#include "epl/grid.hpp"
#include "epl/sparse.hpp"

namespace epl {

/// L u = -D_i (a_ij(x) D_j u) with lambda |xi|^2 <= a_ij xi_i xi_j <= Lambda |xi|^2.
///
/// The coefficient is either isotropic, a(x) = s(x) I, or a full symmetric matrix field written
/// row-major into an n*n buffer.
struct ScalarDivForm {
    int dim = 3;
    std::function<double(const Point&)> isotropic;
    std::function<void(const Point&, std::span<double>)> matrix;
    double lambda = 1.0;
    double Lambda = 1.0;
    std::string label = "laplace";
    /// a = I exactly; set only by laplacian().
    bool identity = false;

    static ScalarDivForm laplacian(int n)
    {
        ScalarDivForm op;
        op.dim = n;
        op.identity = true;
        op.isotropic = [](const Point&) { return 1.0; };
        return op;
    }
    static ScalarDivForm scaled_isotropic(int n, std::function<double(const Point&)> s, double lambda,
                                          double Lambda, std::string label)
    {
        ScalarDivForm op;
        op.dim = n;
        op.isotropic = std::move(s);
        op.lambda = lambda;
        op.Lambda = Lambda;
        op.label = std::move(label);
        return op;
    }
    static ScalarDivForm anisotropic(int n, std::function<void(const Point&, std::span<double>)> a, double lambda,
                                     double Lambda, std::string label)
    {
        ScalarDivForm op;
        op.dim = n;
        op.matrix = std::move(a);
        op.lambda = lambda;
        op.Lambda = Lambda;
        op.label = std::move(label);
        return op;
    }

    void coefficient(const Point& x, std::span<double> a) const
    {
        if (matrix) {
            matrix(x, a);
            return;
        }
        const double s = isotropic(x);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a[i * dim + j] = (i == j) ? s : 0.0;
    }
};

/// 3D Lame system L u = -Laplace u - alpha grad div u, alpha = 1/(1 - 2 nu) > -1.
struct Lame3D {
    double alpha = 0.0;
    double poisson_ratio() const { return (alpha - 1.0) / (2.0 * alpha); }
};

/// (-Laplace)^m in R^n, n > 2m.
struct Polyharmonic {
    int m = 1;
    int dim = 3;
};

using OperatorSpec = std::variant<ScalarDivForm, Lame3D, Polyharmonic>;

inline int components(const OperatorSpec& op) { return std::holds_alternative<Lame3D>(op) ? 3 : 1; }

/// Half the differential order.
inline int half_order(const OperatorSpec& op)
{
    if (const auto* p = std::get_if<Polyharmonic>(&op)) return p->m;
    return 1;
}

inline int operator_dim(const OperatorSpec& op)
{
    if (const auto* s = std::get_if<ScalarDivForm>(&op)) return s->dim;
    if (const auto* p = std::get_if<Polyharmonic>(&op)) return p->dim;
    return 3;
}

inline std::string describe(const OperatorSpec& op)
{
    if (const auto* s = std::get_if<ScalarDivForm>(&op)) return "scalar:" + s->label;
    if (const auto* l = std::get_if<Lame3D>(&op)) return "lame:" + detail::fmt17(l->alpha);
    const auto& p = std::get<Polyharmonic>(op);
    return "polyharmonic:m=" + std::to_string(p.m);
}

/// Checks the operator's own invariants (independent of any grid).
inline void validate(const OperatorSpec& op)
{
    if (const auto* s = std::get_if<ScalarDivForm>(&op)) {
        EPL_REQUIRE(s->dim >= 3 && s->dim <= kMaxDim, InvalidArgument, "scalar operator dimension must lie in [3, 7]");
        EPL_REQUIRE(s->lambda > 0.0 && s->Lambda >= s->lambda, InvalidArgument,
                    "ellipticity constants must satisfy Lambda >= lambda > 0");
        EPL_REQUIRE(static_cast<bool>(s->isotropic) != static_cast<bool>(s->matrix), InvalidArgument,
                    "exactly one coefficient representation must be set");
    } else if (const auto* l = std::get_if<Lame3D>(&op)) {
        EPL_REQUIRE(std::isfinite(l->alpha) && l->alpha > -1.0, InvalidArgument, "Lame parameter must satisfy alpha > -1");
    } else {
        const auto& p = std::get<Polyharmonic>(op);
        EPL_REQUIRE(p.m >= 1, InvalidArgument, "polyharmonic order m must be at least 1");
        EPL_REQUIRE(p.dim > 2 * p.m && p.dim <= kMaxDim, InvalidArgument, "polyharmonic operator requires n > 2m");
    }
}

/// Samples strong ellipticity of a scalar coefficient field on (at most `max_nodes`) grid nodes
/// with 100 deterministic unit directions each. Throws on violation.
inline void check_ellipticity(const ScalarDivForm& op, const GridDomain& dom, std::size_t max_nodes = 4096)
{
    const int n = op.dim;
    std::vector<double> a(n * n);
    SplitMix64 rng(0x5eedULL);
    const std::size_t total = dom.node_count();
    const std::size_t step = std::max<std::size_t>(1, total / max_nodes);
    std::vector<double> xi(n);
    for (std::size_t node = 0; node < total; node += step) {
        op.coefficient(dom.position(node), a);
        for (int t = 0; t < 100; ++t) {
            double nrm = 0.0;
            for (int i = 0; i < n; ++i) {
                xi[i] = rng.uniform(-1.0, 1.0);
                nrm += xi[i] * xi[i];
            }
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) continue;
            double q = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) q += a[i * n + j] * xi[i] * xi[j] / (nrm * nrm);
            const double slack = 1e-12 * std::max(1.0, op.Lambda);
            if (q < op.lambda - slack || q > op.Lambda + slack)
                throw InvalidArgument("coefficient field violates strong ellipticity bounds");
        }
    }
}

/// Checks that the operator is compatible with the domain and, for scalar fields, elliptic on it.
inline void validate(const OperatorSpec& op, const GridDomain& dom)
{
    validate(op);
    EPL_REQUIRE(operator_dim(op) == dom.dim(), InvalidArgument,
                std::holds_alternative<Lame3D>(op) ? "Lame operator requires dimension 3"
                                                   : "operator dimension does not match domain");
    if (const auto* s = std::get_if<ScalarDivForm>(&op)) check_ellipticity(*s, dom);
}

// ---------------------------------------------------------------------------------------------
// Interior unknown numbering: dof = interior_rank(node) * N + component.

inline std::vector<double> to_dofs(const GridFunction& u)
{
    const GridDomain& dom = u.domain();
    const int nc = u.components();
    std::vector<double> x(dom.interior_count() * nc);
    std::size_t k = 0;
    for (std::size_t node : dom.interior_nodes())
        for (int c = 0; c < nc; ++c) x[k++] = u(node, c);
    return x;
}

inline GridFunction from_dofs(const DomainPtr& dom, int nc, std::span<const double> x)
{
    GridFunction u(dom, nc);
    std::size_t k = 0;
    for (std::size_t node : dom->interior_nodes())
        for (int c = 0; c < nc; ++c) u.at(node, c) = x[k++];
    return u;
}

namespace detail {

using RowEntries = std::vector<std::pair<std::size_t, double>>;

/// Produces merged, column-sorted matrix rows for the second-order operators (scalar divergence
/// form, Lame, and the plain Laplacian used to build polyharmonic powers).
class RowBuilder {
public:
    RowBuilder(const OperatorSpec& op, const GridDomain& dom) : dom_(dom)
    {
        if (const auto* s = std::get_if<ScalarDivForm>(&op)) {
            kind_ = Kind::Scalar;
            full_ = static_cast<bool>(s->matrix);
            const int n = dom.dim();
            coeff_.resize(dom.node_count() * (full_ ? n * n : 1));
            std::vector<double> a(n * n);
            for (std::size_t node = 0; node < dom.node_count(); ++node) {
                const Point x = dom.position(node);
                if (full_) {
                    s->coefficient(x, a);
                    std::copy(a.begin(), a.end(), coeff_.begin() + static_cast<std::ptrdiff_t>(node * n * n));
                } else {
                    coeff_[node] = s->isotropic(x);
                }
            }
        } else if (const auto* l = std::get_if<Lame3D>(&op)) {
            kind_ = Kind::Lame;
            alpha_ = l->alpha;
        } else {
            kind_ = Kind::Laplace;
        }
    }

    int components() const { return kind_ == Kind::Lame ? 3 : 1; }

    void row(std::size_t node, int comp, RowEntries& out) const
    {
        out.clear();
        const int n = dom_.dim();
        const double inv_h2 = 1.0 / (dom_.spacing() * dom_.spacing());
        const int nc = components();
        auto add = [&](std::size_t other, int c, double w) {
            const std::int64_t r = dom_.interior_rank(other);
            if (r < 0) return;
            out.emplace_back(static_cast<std::size_t>(r) * nc + c, w);
        };
        switch (kind_) {
        case Kind::Laplace:
            for (int i = 0; i < n; ++i) {
                const std::ptrdiff_t s = dom_.stride(i);
                add(node - s, 0, -inv_h2);
                add(node, 0, 2.0 * inv_h2);
                add(node + s, 0, -inv_h2);
            }
            break;
        case Kind::Scalar: {
            const std::size_t nn = static_cast<std::size_t>(n * n);
            auto a = [&](std::size_t at, int i, int j) {
                return full_ ? coeff_[at * nn + static_cast<std::size_t>(i * n + j)] : (i == j ? coeff_[at] : 0.0);
            };
            for (int i = 0; i < n; ++i) {
                const std::size_t s = static_cast<std::size_t>(dom_.stride(i));
                const double ap = 0.5 * (a(node, i, i) + a(node + s, i, i));
                const double am = 0.5 * (a(node, i, i) + a(node - s, i, i));
                add(node - s, 0, -am * inv_h2);
                add(node, 0, (ap + am) * inv_h2);
                add(node + s, 0, -ap * inv_h2);
            }
            if (full_) {
                // -delta_i (a_ij delta_j u) with centered first differences, i != j.
                const double q = 0.25 * inv_h2;
                for (int i = 0; i < n; ++i) {
                    const std::size_t si = static_cast<std::size_t>(dom_.stride(i));
                    for (int j = 0; j < n; ++j) {
                        if (i == j) continue;
                        const std::size_t sj = static_cast<std::size_t>(dom_.stride(j));
                        const double ap = a(node + si, i, j), am = a(node - si, i, j);
                        add(node + si + sj, 0, -q * ap);
                        add(node + si - sj, 0, q * ap);
                        add(node - si + sj, 0, q * am);
                        add(node - si - sj, 0, -q * am);
                    }
                }
            }
            break;
        }
        case Kind::Lame: {
            const int i = comp;
            const std::size_t si = static_cast<std::size_t>(dom_.stride(i));
            for (int k = 0; k < 3; ++k) {
                const std::size_t s = static_cast<std::size_t>(dom_.stride(k));
                add(node - s, i, -inv_h2);
                add(node, i, 2.0 * inv_h2);
                add(node + s, i, -inv_h2);
            }
            // -alpha D_ii u_i (compact) and -alpha D_ki u_k (4-point cross), k != i.
            add(node - si, i, -alpha_ * inv_h2);
            add(node, i, 2.0 * alpha_ * inv_h2);
            add(node + si, i, -alpha_ * inv_h2);
            const double q = 0.25 * alpha_ * inv_h2;
            for (int k = 0; k < 3; ++k) {
                if (k == i) continue;
                const std::size_t sk = static_cast<std::size_t>(dom_.stride(k));
                add(node + si + sk, k, -q);
                add(node + si - sk, k, q);
                add(node - si + sk, k, q);
                add(node - si - sk, k, -q);
            }
            break;
        }
        }
        merge_entries(out);
    }

private:
    enum class Kind { Scalar, Lame, Laplace };
    const GridDomain& dom_;
    Kind kind_ = Kind::Laplace;
    bool full_ = false;
    double alpha_ = 0.0;
    std::vector<double> coeff_;
};

inline CsrMatrix assemble_second_order(const OperatorSpec& op, const GridDomain& dom)
{
    const RowBuilder rb(op, dom);
    const int nc = rb.components();
    const std::size_t ndof = dom.interior_count() * nc;
    CsrMatrix mat(ndof, ndof);
    RowEntries row;
    for (std::size_t node : dom.interior_nodes())
        for (int c = 0; c < nc; ++c) {
            rb.row(node, c, row);
            mat.push_row(row);
        }
    return mat;
}

inline GridFunction apply_second_order(const OperatorSpec& op, const GridFunction& u)
{
    const GridDomain& dom = u.domain();
    const RowBuilder rb(op, dom);
    const int nc = rb.components();
    const std::vector<double> x = to_dofs(u);
    GridFunction out(u.domain_ptr(), nc);
    RowEntries row;
    for (std::size_t node : dom.interior_nodes())
        for (int c = 0; c < nc; ++c) {
            rb.row(node, c, row);
            double acc = 0.0;
            for (const auto& [col, w] : row) acc += w * x[col];
            out.at(node, c) = acc;
        }
    return out;
}

}  // namespace detail

/// Discrete L u; zero on non-interior nodes.
inline GridFunction apply(const OperatorSpec& op, const GridFunction& u)
{
    validate(op);
    EPL_REQUIRE(u.components() == components(op), InvalidArgument, "component count does not match operator");
    EPL_REQUIRE(operator_dim(op) == u.domain().dim(), InvalidArgument,
                std::holds_alternative<Lame3D>(op) ? "Lame operator requires dimension 3"
                                                   : "operator dimension does not match domain");
    if (const auto* p = std::get_if<Polyharmonic>(&op)) {
        const OperatorSpec lap = Polyharmonic{1, p->dim};
        GridFunction v = u;
        for (int k = 0; k < p->m; ++k) v = detail::apply_second_order(lap, v);
        return v;
    }
    return detail::apply_second_order(op, u);
}

/// Matrix of `apply` restricted to interior unknowns (node-major, component-minor).
inline CsrMatrix assemble(const OperatorSpec& op, const GridDomain& dom)
{
    validate(op);
    EPL_REQUIRE(operator_dim(op) == dom.dim(), InvalidArgument,
                std::holds_alternative<Lame3D>(op) ? "Lame operator requires dimension 3"
                                                   : "operator dimension does not match domain");
    if (const auto* p = std::get_if<Polyharmonic>(&op)) {
        const CsrMatrix lap = detail::assemble_second_order(Polyharmonic{1, p->dim}, dom);
        CsrMatrix acc = lap;
        for (int k = 1; k < p->m; ++k) acc = acc.product(lap);
        return acc;
    }
    return detail::assemble_second_order(op, dom);
}

}  // namespace epl
