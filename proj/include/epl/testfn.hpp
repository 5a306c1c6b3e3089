#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "epl/core.hpp"
#include "epl/grid.hpp"

namespace epl {

enum class TestFnKind { RadialBump, SumOfBumps, PolyTimesCutoff };

/// Recipe for a smooth compactly supported test function.
///
/// Every bump is (1 - |x - c|^2 / R^2)_+^order, so it vanishes to polynomial order `order` at the
/// edge of its support. Random placements keep the support plus `margin_cells` grid cells inside
/// the interior mask.
struct TestFnSpec {
    TestFnKind kind = TestFnKind::SumOfBumps;
    std::uint64_t seed = 1;
    int count = 3;
    int components = 1;
    int order = 3;
    int margin_cells = 2;
    /// Radius range as fractions of the bounding-box half width.
    double min_radius_fraction = 0.15;
    double max_radius_fraction = 0.6;
    /// Lower bound on the radius in grid cells, so every bump is resolved by the stencils.
    double min_radius_cells = 2.0;
    /// Fixed placement for RadialBump; random when unset.
    std::optional<Point> center;
    std::optional<double> radius;
};

namespace detail {

struct Bump {
    Point center{};
    double radius = 1.0;
};

/// True if every node within `reach` of `c` is interior (nodes outside the grid count as exterior).
inline bool ball_is_interior(const GridDomain& dom, const Point& c, double reach)
{
    const int n = dom.dim();
    const double h = dom.spacing();
    Index lo{}, hi{};
    for (int a = 0; a < n; ++a) {
        lo[a] = static_cast<int>(std::floor((c[a] - reach - dom.origin()[a]) / h));
        hi[a] = static_cast<int>(std::ceil((c[a] + reach - dom.origin()[a]) / h));
        if (lo[a] < 0 || hi[a] >= dom.extent(a)) return false;
    }
    Index idx = lo;
    while (true) {
        const Point x = dom.position(idx);
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
        if (d2 < reach * reach && !dom.interior(dom.ravel(idx))) return false;
        int a = n - 1;
        while (a >= 0 && ++idx[a] > hi[a]) {
            idx[a] = lo[a];
            --a;
        }
        if (a < 0) break;
    }
    return true;
}

inline Bump place_bump(const GridDomain& dom, SplitMix64& rng, const TestFnSpec& spec)
{
    const int n = dom.dim();
    const double half = 0.5 * (dom.extent(0) - 1) * dom.spacing();
    Point mid{};
    for (int a = 0; a < n; ++a) mid[a] = dom.origin()[a] + 0.5 * (dom.extent(a) - 1) * dom.spacing();
    const double rmin = std::max(spec.min_radius_fraction * half, spec.min_radius_cells * dom.spacing());
    const double rmax = std::max(spec.max_radius_fraction * half, rmin);
    for (int attempt = 0; attempt < 2000; ++attempt) {
        Bump b;
        // Shrink the radius range as attempts fail so small domains still admit placements.
        const double shrink = 1.0 / (1.0 + attempt / 200.0);
        b.radius = rng.uniform(rmin, std::max(rmin, rmax * shrink));
        const double reach = b.radius + spec.margin_cells * dom.spacing();
        // Centers are drawn from the part of the box that keeps the support off the box faces.
        const double span = std::max(0.0, half - reach);
        for (int a = 0; a < n; ++a) b.center[a] = mid[a] + rng.uniform(-span, span);
        if (ball_is_interior(dom, b.center, reach)) return b;
    }
    throw InvalidArgument("test-function support does not fit inside the domain");
}

inline double bump_value(const Bump& b, const Point& x, int n, int order)
{
    double d2 = 0.0;
    for (int a = 0; a < n; ++a) d2 += (x[a] - b.center[a]) * (x[a] - b.center[a]);
    const double t = 1.0 - d2 / (b.radius * b.radius);
    return t > 0.0 ? ipow(t, order) : 0.0;
}

}  // namespace detail

/// Deterministic (seeded) smooth test function on `dom`.
inline GridFunction generate_test_function(const DomainPtr& dom, const TestFnSpec& spec)
{
    EPL_REQUIRE(spec.components >= 1, InvalidArgument, "test function needs at least one component");
    EPL_REQUIRE(spec.order >= 1, InvalidArgument, "bump order must be at least 1");
    EPL_REQUIRE(spec.count >= 1, InvalidArgument, "bump count must be at least 1");
    const int n = dom->dim();
    const int nc = spec.components;
    SplitMix64 rng(spec.seed * 0x2545F4914F6CDD1DULL + 0x1234567ULL);

    std::vector<detail::Bump> bumps;
    std::vector<std::vector<double>> amps;
    std::vector<std::vector<double>> poly;  // per component: constant + linear + diagonal quadratic
    switch (spec.kind) {
    case TestFnKind::RadialBump: {
        detail::Bump b;
        if (spec.center && spec.radius) {
            b.center = *spec.center;
            b.radius = *spec.radius;
            EPL_REQUIRE(b.radius > 0.0, InvalidArgument, "bump radius must be positive");
            EPL_REQUIRE(detail::ball_is_interior(*dom, b.center, b.radius + spec.margin_cells * dom->spacing()),
                        InvalidArgument, "test-function support does not fit inside the domain");
        } else {
            b = detail::place_bump(*dom, rng, spec);
        }
        bumps.push_back(b);
        std::vector<double> a(nc, 1.0);
        if (nc > 1)
            for (double& v : a) v = rng.uniform(-1.0, 1.0);
        amps.push_back(a);
        break;
    }
    case TestFnKind::SumOfBumps:
        for (int i = 0; i < spec.count; ++i) {
            bumps.push_back(detail::place_bump(*dom, rng, spec));
            std::vector<double> a(nc);
            for (double& v : a) v = rng.uniform(-1.0, 1.0);
            amps.push_back(a);
        }
        break;
    case TestFnKind::PolyTimesCutoff: {
        bumps.push_back(detail::place_bump(*dom, rng, spec));
        amps.push_back(std::vector<double>(nc, 1.0));
        for (int c = 0; c < nc; ++c) {
            std::vector<double> coef(1 + 2 * n);
            for (double& v : coef) v = rng.uniform(-1.0, 1.0);
            poly.push_back(coef);
        }
        break;
    }
    }

    return GridFunction::sample(dom, nc, [&](const Point& x, std::span<double> out) {
        for (int c = 0; c < nc; ++c) out[c] = 0.0;
        for (std::size_t i = 0; i < bumps.size(); ++i) {
            const double v = detail::bump_value(bumps[i], x, n, spec.order);
            if (v == 0.0) continue;
            for (int c = 0; c < nc; ++c) {
                double factor = amps[i][c];
                if (!poly.empty()) {
                    const auto& p = poly[c];
                    double s = p[0];
                    for (int a = 0; a < n; ++a) {
                        const double t = (x[a] - bumps[i].center[a]) / bumps[i].radius;
                        s += p[1 + a] * t + p[1 + n + a] * t * t;
                    }
                    factor *= s;
                }
                out[c] += factor * v;
            }
        }
    });
}

}  // namespace epl
