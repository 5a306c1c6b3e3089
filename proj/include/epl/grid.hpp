#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "epl/core.hpp"

namespace epl {

enum class ShapeKind { Ball, Cube, LShape, SlitCube };

/// Geometry of the domain carved out of the grid bounding box.
///
/// Every shape is centered at the origin. A ball of radius `size` lives in the box [-size, size]^n;
/// the cube-based shapes use `size` as the side length and the box [-size/2, size/2]^n.
/// The L-shape removes the closed prism {x1 >= c, x2 >= c} with c = size/2 - notch*size, the slit
/// cube removes the closed plate {x1 >= 0, |x2| <= slit_width/2}.
struct DomainShape {
    ShapeKind kind = ShapeKind::Cube;
    double size = 1.0;
    double notch = 0.5;
    double slit_width = 1e-3;

    static DomainShape ball(double radius) { return {ShapeKind::Ball, radius, 0.5, 1e-3}; }
    static DomainShape cube(double side) { return {ShapeKind::Cube, side, 0.5, 1e-3}; }
    static DomainShape l_shape(double side, double notch = 0.5) { return {ShapeKind::LShape, side, notch, 1e-3}; }
    static DomainShape slit_cube(double side, double width = 1e-3) { return {ShapeKind::SlitCube, side, 0.5, width}; }

    /// The shape of the given kind whose bounding box is [-1, 1]^n.
    static DomainShape standard(ShapeKind k)
    {
        switch (k) {
        case ShapeKind::Ball: return ball(1.0);
        case ShapeKind::Cube: return cube(2.0);
        case ShapeKind::LShape: return l_shape(2.0);
        case ShapeKind::SlitCube: return slit_cube(2.0);
        }
        return cube(2.0);
    }

    double half_box() const { return kind == ShapeKind::Ball ? size : 0.5 * size; }

    void validate() const
    {
        EPL_REQUIRE(size > 0.0, InvalidArgument, "shape size must be positive");
        if (kind == ShapeKind::LShape)
            EPL_REQUIRE(notch > 0.0 && notch < 1.0, InvalidArgument, "notch fraction must lie in (0, 1)");
        if (kind == ShapeKind::SlitCube)
            EPL_REQUIRE(slit_width > 0.0 && slit_width < size, InvalidArgument, "slit width must lie in (0, side)");
    }

    /// Open-set membership test.
    bool contains(const Point& x, int dim) const
    {
        const double half = half_box();
        for (int i = 0; i < dim; ++i)
            if (!(std::abs(x[i]) < half)) return false;
        switch (kind) {
        case ShapeKind::Ball: return norm(x, dim) < size;
        case ShapeKind::Cube: return true;
        case ShapeKind::LShape: {
            const double c = half - notch * size;
            return !(x[0] >= c && x[1] >= c);
        }
        case ShapeKind::SlitCube: return !(x[0] >= 0.0 && std::abs(x[1]) <= 0.5 * slit_width);
        }
        return false;
    }
};

inline std::string to_string(ShapeKind k)
{
    switch (k) {
    case ShapeKind::Ball: return "ball";
    case ShapeKind::Cube: return "cube";
    case ShapeKind::LShape: return "lshape";
    case ShapeKind::SlitCube: return "slit";
    }
    return "?";
}

inline ShapeKind parse_shape_kind(const std::string& s)
{
    if (s == "ball") return ShapeKind::Ball;
    if (s == "cube") return ShapeKind::Cube;
    if (s == "lshape" || s == "l_shape") return ShapeKind::LShape;
    if (s == "slit" || s == "slit_cube") return ShapeKind::SlitCube;
    throw InvalidArgument("unknown shape '" + s + "'");
}

/// Masked uniform Cartesian grid. Node numbering is row-major (last axis fastest).
class GridDomain {
public:
    GridDomain(int dim, const Index& extents, double spacing, const Point& origin, std::vector<std::uint8_t> mask)
        : dim_(dim), extents_(extents), h_(spacing), origin_(origin), mask_(std::move(mask))
    {
        EPL_REQUIRE(dim >= 1 && dim <= kMaxDim, InvalidArgument, "unsupported dimension");
        EPL_REQUIRE(spacing > 0.0, InvalidArgument, "spacing must be positive");
        std::size_t count = 1;
        for (int a = dim - 1; a >= 0; --a) {
            EPL_REQUIRE(extents[a] >= 5, InvalidArgument, "every axis needs at least 5 nodes");
            strides_[a] = static_cast<std::ptrdiff_t>(count);
            count *= static_cast<std::size_t>(extents[a]);
        }
        EPL_REQUIRE(mask_.size() == count, InvalidArgument, "mask size does not match extents");
        node_count_ = count;
        rank_.assign(count, -1);
        Index idx{};
        for (std::size_t node = 0; node < count; ++node) {
            unravel_into(node, idx);
            bool edge = false;
            for (int a = 0; a < dim; ++a) edge = edge || idx[a] == 0 || idx[a] == extents[a] - 1;
            if (edge) mask_[node] = 0;
            if (mask_[node]) {
                rank_[node] = static_cast<std::int64_t>(interior_.size());
                interior_.push_back(node);
            }
        }
        EPL_REQUIRE(!interior_.empty(), InvalidArgument, "degenerate domain");
    }

    int dim() const noexcept { return dim_; }
    const Index& extents() const noexcept { return extents_; }
    int extent(int axis) const noexcept { return extents_[axis]; }
    double spacing() const noexcept { return h_; }
    const Point& origin() const noexcept { return origin_; }
    std::ptrdiff_t stride(int axis) const noexcept { return strides_[axis]; }
    std::size_t node_count() const noexcept { return node_count_; }
    double cell_volume() const noexcept { return ipow(h_, dim_); }

    bool interior(std::size_t node) const noexcept { return mask_[node] != 0; }
    const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
    std::span<const std::size_t> interior_nodes() const noexcept { return interior_; }
    std::size_t interior_count() const noexcept { return interior_.size(); }
    /// Position of `node` among interior nodes, or -1.
    std::int64_t interior_rank(std::size_t node) const noexcept { return rank_[node]; }

    void unravel_into(std::size_t node, Index& idx) const noexcept
    {
        for (int a = 0; a < dim_; ++a) {
            idx[a] = static_cast<int>(node / static_cast<std::size_t>(strides_[a]));
            node %= static_cast<std::size_t>(strides_[a]);
        }
    }
    Index unravel(std::size_t node) const noexcept
    {
        Index idx{};
        unravel_into(node, idx);
        return idx;
    }
    std::size_t ravel(const Index& idx) const noexcept
    {
        std::size_t node = 0;
        for (int a = 0; a < dim_; ++a) node += static_cast<std::size_t>(idx[a]) * static_cast<std::size_t>(strides_[a]);
        return node;
    }
    bool in_grid(const Index& idx) const noexcept
    {
        for (int a = 0; a < dim_; ++a)
            if (idx[a] < 0 || idx[a] >= extents_[a]) return false;
        return true;
    }
    Point position(const Index& idx) const noexcept
    {
        Point x{};
        for (int a = 0; a < dim_; ++a) x[a] = origin_[a] + idx[a] * h_;
        return x;
    }
    Point position(std::size_t node) const noexcept { return position(unravel(node)); }

    /// Node whose position is closest to `x` (clamped to the grid).
    std::size_t nearest_node(const Point& x) const noexcept
    {
        Index idx{};
        for (int a = 0; a < dim_; ++a) {
            const long k = std::lround((x[a] - origin_[a]) / h_);
            idx[a] = static_cast<int>(std::clamp<long>(k, 0, extents_[a] - 1));
        }
        return ravel(idx);
    }
    /// Euclidean distance between two nodes.
    double distance(std::size_t a, std::size_t b) const noexcept
    {
        const Index ia = unravel(a), ib = unravel(b);
        double s = 0.0;
        for (int k = 0; k < dim_; ++k) {
            const double d = (ia[k] - ib[k]) * h_;
            s += d * d;
        }
        return std::sqrt(s);
    }

    /// Smallest distance from `node` to a non-interior node (brute force over a growing box).
    double distance_to_exterior(std::size_t node) const
    {
        const Index c = unravel(node);
        int max_extent = 0;
        for (int a = 0; a < dim_; ++a) max_extent = std::max(max_extent, extents_[a]);
        double best = std::numeric_limits<double>::infinity();
        for (int rad = 1; rad <= max_extent; ++rad) {
            if (rad * h_ - h_ > best) break;
            scan_shell(c, rad, [&](const Index& idx) {
                const std::size_t other = ravel(idx);
                if (!interior(other)) best = std::min(best, distance(node, other));
            });
        }
        return best;
    }

    /// Visits every in-grid index with Chebyshev distance exactly `rad` from `c`.
    template <class Fn>
    void scan_shell(const Index& c, int rad, Fn&& fn) const
    {
        Index idx = c;
        scan_shell_rec(c, rad, 0, false, idx, fn);
    }

private:
    template <class Fn>
    void scan_shell_rec(const Index& c, int rad, int axis, bool on_shell, Index& idx, Fn& fn) const
    {
        if (axis == dim_) {
            if (on_shell) fn(static_cast<const Index&>(idx));
            return;
        }
        for (int d = -rad; d <= rad; ++d) {
            idx[axis] = c[axis] + d;
            if (idx[axis] < 0 || idx[axis] >= extents_[axis]) continue;
            scan_shell_rec(c, rad, axis + 1, on_shell || std::abs(d) == rad, idx, fn);
        }
        idx[axis] = c[axis];
    }

    int dim_;
    Index extents_{};
    double h_;
    Point origin_{};
    std::vector<std::uint8_t> mask_;
    std::array<std::ptrdiff_t, kMaxDim> strides_{};
    std::size_t node_count_ = 0;
    std::vector<std::size_t> interior_;
    std::vector<std::int64_t> rank_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

/// Builds a domain whose bounding box is the shape's box, sampled with `nodes_per_axis` nodes per axis.
inline DomainPtr build_domain(const DomainShape& shape, int nodes_per_axis, int dim)
{
    shape.validate();
    EPL_REQUIRE(nodes_per_axis >= 5, InvalidArgument, "nodes_per_axis must be at least 5");
    EPL_REQUIRE(dim >= 3 && dim <= kMaxDim, InvalidArgument, "dimension must lie in [3, 7]");
    const double half = shape.half_box();
    const double h = 2.0 * half / (nodes_per_axis - 1);
    Index extents{};
    Point origin{};
    std::size_t count = 1;
    for (int a = 0; a < dim; ++a) {
        extents[a] = nodes_per_axis;
        origin[a] = -half;
        count *= static_cast<std::size_t>(nodes_per_axis);
    }
    std::vector<std::uint8_t> mask(count, 0);
    Index idx{};
    for (std::size_t node = 0; node < count; ++node) {
        std::size_t rem = node;
        for (int a = dim - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % static_cast<std::size_t>(nodes_per_axis));
            rem /= static_cast<std::size_t>(nodes_per_axis);
        }
        Point x{};
        for (int a = 0; a < dim; ++a) x[a] = origin[a] + idx[a] * h;
        mask[node] = shape.contains(x, dim) ? 1 : 0;
    }
    return std::make_shared<const GridDomain>(dim, extents, h, origin, std::move(mask));
}

/// Node closest to the geometric center of the grid box.
inline std::size_t center_node(const GridDomain& dom)
{
    Index idx{};
    for (int a = 0; a < dom.dim(); ++a) idx[a] = (dom.extent(a) - 1) / 2;
    return dom.ravel(idx);
}

/// Node data on a GridDomain: `components` reals per node, node-major. Zero on every non-interior node.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(DomainPtr domain, int components)
        : domain_(std::move(domain)), components_(components), values_(domain_->node_count() * components, 0.0)
    {
        EPL_REQUIRE(components >= 1, InvalidArgument, "component count must be positive");
    }
    GridFunction(DomainPtr domain, int components, std::vector<double> values)
        : domain_(std::move(domain)), components_(components), values_(std::move(values))
    {
        EPL_REQUIRE(components >= 1, InvalidArgument, "component count must be positive");
        EPL_REQUIRE(values_.size() == domain_->node_count() * components, InvalidArgument,
                    "value array does not match domain");
        for (std::size_t node = 0; node < domain_->node_count(); ++node)
            for (int c = 0; c < components; ++c) {
                const double v = values_[node * components + c];
                EPL_REQUIRE(std::isfinite(v), InvalidArgument, "grid function values must be finite");
                EPL_REQUIRE(domain_->interior(node) || v == 0.0, InvalidArgument,
                            "grid function must vanish on non-interior nodes");
            }
    }

    /// Samples `f(x, out)` at interior nodes; non-interior nodes stay zero.
    template <class Fn>
    static GridFunction sample(DomainPtr domain, int components, Fn&& f)
    {
        GridFunction u(domain, components);
        std::vector<double> out(components);
        for (std::size_t node : domain->interior_nodes()) {
            f(domain->position(node), std::span<double>(out));
            for (int c = 0; c < components; ++c) u.values_[node * components + c] = out[c];
        }
        return u;
    }

    const GridDomain& domain() const noexcept { return *domain_; }
    const DomainPtr& domain_ptr() const noexcept { return domain_; }
    int components() const noexcept { return components_; }
    std::span<const double> values() const noexcept { return values_; }
    /// Mutable access for library internals; callers must keep non-interior nodes at zero.
    std::span<double> mutable_values() noexcept { return values_; }

    double operator()(std::size_t node, int c = 0) const noexcept { return values_[node * components_ + c]; }
    double& at(std::size_t node, int c = 0) noexcept { return values_[node * components_ + c]; }

    /// Euclidean magnitude over components at a node.
    double magnitude(std::size_t node) const noexcept
    {
        double s = 0.0;
        for (int c = 0; c < components_; ++c) s += values_[node * components_ + c] * values_[node * components_ + c];
        return std::sqrt(s);
    }

    GridFunction& operator+=(const GridFunction& o)
    {
        check_compatible(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    GridFunction& operator*=(double s) noexcept
    {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

    void check_compatible(const GridFunction& o) const
    {
        EPL_REQUIRE(domain_ == o.domain_ && components_ == o.components_, InvalidArgument,
                    "grid functions live on different domains or have different component counts");
    }

private:
    DomainPtr domain_;
    int components_ = 1;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------------------------
// Finite-difference derivatives

namespace detail {

struct Stencil1D {
    int count = 0;
    std::array<int, 5> offset{};
    std::array<double, 5> weight{};
};

/// Centered stencils of second order, and one-sided first-order fallbacks, for d^order/dx^order.
inline Stencil1D centered_stencil(int order)
{
    switch (order) {
    case 1: return {2, {-1, 1}, {-0.5, 0.5}};
    case 2: return {3, {-1, 0, 1}, {1.0, -2.0, 1.0}};
    case 3: return {4, {-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}};
    case 4: return {5, {-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}};
    }
    throw InvalidArgument("derivative order out of range");
}

inline Stencil1D one_sided_stencil(int order, int direction)
{
    // Binomial forward/backward differences.
    static constexpr std::array<std::array<double, 5>, 5> binom{{
        {1, 0, 0, 0, 0},
        {-1, 1, 0, 0, 0},
        {1, -2, 1, 0, 0},
        {-1, 3, -3, 1, 0},
        {1, -4, 6, -4, 1},
    }};
    Stencil1D s;
    s.count = order + 1;
    for (int j = 0; j <= order; ++j) {
        if (direction > 0) {
            s.offset[j] = j;
            s.weight[j] = binom[order][j];
        } else {
            s.offset[j] = j - order;
            s.weight[j] = binom[order][j];
        }
    }
    return s;
}

}  // namespace detail

/// Multi-indices of order k in n variables, as nondecreasing axis tuples in lexicographic order.
inline std::vector<std::vector<int>> multi_indices(int n, int k)
{
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k, 0);
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == k) {
            out.push_back(cur);
            return;
        }
        for (int a = start; a < n; ++a) {
            cur[pos] = a;
            rec(pos + 1, a);
        }
    };
    rec(0, 0);
    return out;
}

/// All partial derivatives of order k, component c of the result is (u-component, multi-index)
/// flattened as uc * count + b with multi-indices ordered as in multi_indices().
///
/// Per axis the centered stencil is used when every node it touches along that axis is interior,
/// otherwise the first interior-supported one-sided stencil, otherwise the centered stencil with
/// zero extension.
inline GridFunction gradient(const GridFunction& u, int k)
{
    EPL_REQUIRE(k >= 1 && k <= 4, InvalidArgument, "gradient order must lie in [1, 4]");
    const GridDomain& dom = u.domain();
    const int n = dom.dim();
    const int nc = u.components();
    const auto betas = multi_indices(n, k);
    const int nb = static_cast<int>(betas.size());
    GridFunction out(u.domain_ptr(), nc * nb);
    const double h = dom.spacing();

    auto axis_supported = [&](const Index& base, int axis, const detail::Stencil1D& s) {
        Index idx = base;
        for (int j = 0; j < s.count; ++j) {
            idx[axis] = base[axis] + s.offset[j];
            if (idx[axis] < 0 || idx[axis] >= dom.extent(axis)) return false;
            if (!dom.interior(dom.ravel(idx))) return false;
        }
        return true;
    };

    std::array<detail::Stencil1D, kMaxDim> stencils{};
    std::array<int, kMaxDim> active{};
    for (std::size_t node : dom.interior_nodes()) {
        const Index base = dom.unravel(node);
        for (int b = 0; b < nb; ++b) {
            std::array<int, kMaxDim> order{};
            for (int a : betas[b]) ++order[a];
            int na = 0;
            for (int a = 0; a < n; ++a) {
                if (order[a] == 0) continue;
                detail::Stencil1D s = detail::centered_stencil(order[a]);
                if (!axis_supported(base, a, s)) {
                    const auto back = detail::one_sided_stencil(order[a], -1);
                    const auto fwd = detail::one_sided_stencil(order[a], +1);
                    if (axis_supported(base, a, back))
                        s = back;
                    else if (axis_supported(base, a, fwd))
                        s = fwd;
                }
                stencils[na] = s;
                active[na] = a;
                ++na;
            }
            const double scale = 1.0 / ipow(h, k);
            for (int c = 0; c < nc; ++c) {
                // Tensor-product stencil evaluation.
                double acc = 0.0;
                std::array<int, kMaxDim> pos{};
                while (true) {
                    Index idx = base;
                    double w = 1.0;
                    bool inside = true;
                    for (int t = 0; t < na; ++t) {
                        const int a = active[t];
                        idx[a] = base[a] + stencils[t].offset[pos[t]];
                        w *= stencils[t].weight[pos[t]];
                        if (idx[a] < 0 || idx[a] >= dom.extent(a)) inside = false;
                    }
                    if (inside) acc += w * u(dom.ravel(idx), c);
                    int t = 0;
                    while (t < na && ++pos[t] == stencils[t].count) pos[t++] = 0;
                    if (t == na) break;
                }
                out.at(node, c * nb + b) = acc * scale;
            }
        }
    }
    return out;
}

/// Discrete L^p norm (sum |u|^p h^n)^(1/p) with |.| the Euclidean norm over components.
/// p = infinity gives the maximum node magnitude.
inline double lp_norm(const GridFunction& u, double p)
{
    EPL_REQUIRE(p >= 1.0, InvalidArgument, "p must be at least 1");
    const GridDomain& dom = u.domain();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t node : dom.interior_nodes()) m = std::max(m, u.magnitude(node));
        return m;
    }
    CompensatedSum s;
    for (std::size_t node : dom.interior_nodes()) {
        const double mag = u.magnitude(node);
        if (mag != 0.0) s += (p == 2.0 ? mag * mag : std::pow(mag, p));
    }
    return std::pow(s.value() * dom.cell_volume(), 1.0 / p);
}

/// ||D^k u||_{L^q}.
inline double sobolev_seminorm(const GridFunction& u, int k, double q)
{
    return lp_norm(gradient(u, k), q);
}

// ---------------------------------------------------------------------------------------------
// Grid dump format

namespace detail {
inline std::string fmt17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

/// Writes `u` as an EPLGRID v1 file at `path` and its mask at `path + ".mask"`.
inline void write_grid(const GridFunction& u, const std::string& path)
{
    const GridDomain& dom = u.domain();
    std::ofstream out(path, std::ios::binary);
    EPL_REQUIRE(out, Error, "cannot open " + path);
    std::string header = "EPLGRID v1 dim=" + std::to_string(dom.dim()) + " extents=";
    for (int a = 0; a < dom.dim(); ++a) header += (a ? "," : "") + std::to_string(dom.extent(a));
    header += " h=" + detail::fmt17(dom.spacing()) + " origin=";
    for (int a = 0; a < dom.dim(); ++a) header += (a ? "," : "") + detail::fmt17(dom.origin()[a]);
    header += " components=" + std::to_string(u.components()) + "\n";
    out << header;
    for (double v : u.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(bytes), 8);
    }
    std::ofstream mask(path + ".mask", std::ios::binary);
    EPL_REQUIRE(mask, Error, "cannot open " + path + ".mask");
    mask.write(reinterpret_cast<const char*>(dom.mask().data()), static_cast<std::streamsize>(dom.mask().size()));
}

inline GridFunction read_grid(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    EPL_REQUIRE(in, Error, "cannot open " + path);
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, version, tok;
    hs >> magic >> version;
    EPL_REQUIRE(magic == "EPLGRID" && version == "v1", Error, "not an EPLGRID v1 file");
    int dim = 0, components = 0;
    double h = 0.0;
    std::vector<int> extents;
    std::vector<double> origin;
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(item);
        return parts;
    };
    while (hs >> tok) {
        const auto eq = tok.find('=');
        EPL_REQUIRE(eq != std::string::npos, Error, "malformed header token " + tok);
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "dim") dim = std::stoi(val);
        else if (key == "extents") for (auto& p : split(val)) extents.push_back(std::stoi(p));
        else if (key == "h") h = std::stod(val);
        else if (key == "origin") for (auto& p : split(val)) origin.push_back(std::stod(p));
        else if (key == "components") components = std::stoi(val);
        else throw Error("unknown header key " + key);
    }
    EPL_REQUIRE(dim >= 1 && dim <= kMaxDim && static_cast<int>(extents.size()) == dim &&
                    static_cast<int>(origin.size()) == dim,
                Error, "inconsistent EPLGRID header");
    Index ext{};
    Point org{};
    std::size_t count = 1;
    for (int a = 0; a < dim; ++a) {
        ext[a] = extents[a];
        org[a] = origin[a];
        count *= static_cast<std::size_t>(extents[a]);
    }
    std::vector<double> values(count * components);
    for (double& v : values) {
        unsigned char bytes[8];
        in.read(reinterpret_cast<char*>(bytes), 8);
        EPL_REQUIRE(in, Error, "truncated EPLGRID payload");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
        std::memcpy(&v, &bits, sizeof v);
    }
    std::ifstream mf(path + ".mask", std::ios::binary);
    EPL_REQUIRE(mf, Error, "missing mask file for " + path);
    std::vector<std::uint8_t> mask(count);
    mf.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(count));
    EPL_REQUIRE(mf, Error, "truncated mask file");
    auto dom = std::make_shared<const GridDomain>(dim, ext, h, org, std::move(mask));
    return GridFunction(dom, components, std::move(values));
}

}  // namespace epl
