#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include <unistd.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "epl/grid.hpp"
#include "epl/parallel.hpp"
#include "epl/testfn.hpp"

using namespace epl;

namespace {

constexpr double kPi = std::numbers::pi;

double radial_integral(double radius, const std::function<double(double)>& f)
{
    return 4.0 * kPi * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                           [&](double r) { return f(r) * r * r; }, 0.0, radius, 10, 1e-14);
}

// u = (1 - r^2/R^2)^3 centered at the origin.
GridFunction radial_bump(const DomainPtr& dom, double R)
{
    return GridFunction::sample(dom, 1, [&](const Point& x, std::span<double> out) {
        const double t = 1.0 - norm(x, dom->dim()) * norm(x, dom->dim()) / (R * R);
        out[0] = t > 0.0 ? t * t * t : 0.0;
    });
}

double bump_l2_sq_oracle(double R)
{
    return radial_integral(R, [&](double r) { return std::pow(1.0 - r * r / (R * R), 6); });
}

double bump_grad_l2_sq_oracle(double R)
{
    return radial_integral(R, [&](double r) {
        const double d = 6.0 * r / (R * R) * std::pow(1.0 - r * r / (R * R), 2);
        return d * d;
    });
}

}  // namespace

TEST(Domain, BallVolumeApproximatesExact)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 33, 3);
    const double vol = dom->interior_count() * dom->cell_volume();
    EXPECT_NEAR(vol, 4.0 * kPi / 3.0, 0.02 * 4.0 * kPi / 3.0);
}

TEST(Domain, CubeMaskExcludesBoxFaces)
{
    const auto dom = build_domain(DomainShape::cube(2.0), 9, 3);
    EXPECT_EQ(dom->interior_count(), 7u * 7u * 7u);
    EXPECT_DOUBLE_EQ(dom->spacing(), 0.25);
}

TEST(Domain, LShapeRemovesNotch)
{
    const auto dom = build_domain(DomainShape::l_shape(2.0), 17, 3);
    Point inside{-0.5, -0.5, 0.0}, notch{0.5, 0.5, 0.0};
    EXPECT_TRUE(dom->interior(dom->nearest_node(inside)));
    EXPECT_FALSE(dom->interior(dom->nearest_node(notch)));
    // The notch occupies a quarter of the cross-section.
    const double frac = static_cast<double>(dom->interior_count()) / (15.0 * 15.0 * 15.0);
    EXPECT_NEAR(frac, 0.75, 0.05);
}

TEST(Domain, SlitRemovesHalfPlane)
{
    const auto dom = build_domain(DomainShape::slit_cube(2.0), 17, 3);
    EXPECT_FALSE(dom->interior(dom->nearest_node(Point{0.5, 0.0, 0.0})));
    EXPECT_TRUE(dom->interior(dom->nearest_node(Point{-0.5, 0.0, 0.0})));
    EXPECT_TRUE(dom->interior(dom->nearest_node(Point{0.5, 0.125, 0.0})));
}

TEST(Domain, CenterNodeIsOrigin)
{
    for (int n : {3, 5}) {
        const auto dom = build_domain(DomainShape::ball(1.0), 9, n);
        const Point x = dom->position(center_node(*dom));
        EXPECT_NEAR(norm(x, n), 0.0, 1e-15);
    }
}

TEST(Domain, RejectsBadParameters)
{
    EXPECT_THROW(build_domain(DomainShape::ball(1.0), 4, 3), InvalidArgument);
    EXPECT_THROW(build_domain(DomainShape::ball(1.0), 9, 2), InvalidArgument);
    EXPECT_THROW(build_domain(DomainShape::ball(-1.0), 9, 3), InvalidArgument);
    EXPECT_THROW(parse_shape_kind("torus"), InvalidArgument);
}

TEST(Domain, DistanceToExteriorOfBallCenter)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 33, 3);
    EXPECT_NEAR(dom->distance_to_exterior(center_node(*dom)), 1.0, dom->spacing() + 1e-12);
}

TEST(MultiIndices, CountIsBinomial)
{
    for (int n = 3; n <= 7; ++n)
        for (int k = 1; k <= 4; ++k) {
            const double expect = std::tgamma(n + k) / (std::tgamma(k + 1.0) * std::tgamma(n));
            EXPECT_EQ(multi_indices(n, k).size(), static_cast<std::size_t>(std::lround(expect)));
        }
}

TEST(Gradient, ExactOnQuadraticsAwayFromBoundary)
{
    const auto dom = build_domain(DomainShape::cube(2.0), 17, 3);
    const auto u = GridFunction::sample(dom, 1, [](const Point& x, std::span<double> out) {
        out[0] = x[0] * x[0] + 2.0 * x[0] * x[1] - x[2];
    });
    const auto d1 = gradient(u, 1);
    const auto d2 = gradient(u, 2);
    const double h = dom->spacing();
    for (std::size_t node : dom->interior_nodes()) {
        if (dom->distance_to_exterior(node) < 3.0 * h) continue;
        const Point x = dom->position(node);
        EXPECT_NEAR(d1(node, 0), 2.0 * x[0] + 2.0 * x[1], 1e-11);
        EXPECT_NEAR(d1(node, 1), 2.0 * x[0], 1e-11);
        EXPECT_NEAR(d1(node, 2), -1.0, 1e-11);
        // Order (0,0), (0,1), (0,2), (1,1), (1,2), (2,2).
        EXPECT_NEAR(d2(node, 0), 2.0, 1e-9);
        EXPECT_NEAR(d2(node, 1), 2.0, 1e-9);
        for (int b = 2; b < 6; ++b) EXPECT_NEAR(d2(node, b), 0.0, 1e-9);
    }
}

TEST(Norms, RadialBumpMatchesQuadrature)
{
    const double R = 0.6;
    const auto dom = build_domain(DomainShape::cube(2.0), 33, 3);
    const auto u = radial_bump(dom, R);
    EXPECT_NEAR(std::pow(lp_norm(u, 2.0), 2), bump_l2_sq_oracle(R), 1e-3 * bump_l2_sq_oracle(R));
    // Centered differences lose h^2/6 |D^2 u|^2 per unit volume; at h/R = 0.1 that is about 5%.
    EXPECT_NEAR(std::pow(sobolev_seminorm(u, 1, 2.0), 2), bump_grad_l2_sq_oracle(R), 6e-2 * bump_grad_l2_sq_oracle(R));
    EXPECT_DOUBLE_EQ(lp_norm(u, INFINITY), 1.0);
}

TEST(Norms, GradientErrorIsSecondOrder)
{
    const double R = 0.6;
    const double exact = bump_grad_l2_sq_oracle(R);
    std::vector<double> err;
    for (int nodes : {17, 33, 65}) {
        const auto dom = build_domain(DomainShape::cube(2.0), nodes, 3);
        err.push_back(std::abs(std::pow(sobolev_seminorm(radial_bump(dom, R), 1, 2.0), 2) - exact));
    }
    EXPECT_GT(err[0] / err[1], 3.4);
    EXPECT_LT(err[0] / err[1], 4.6);
    EXPECT_GT(err[1] / err[2], 3.4);
    EXPECT_LT(err[1] / err[2], 4.6);
}

TEST(Norms, ConeLpNormMatchesClosedForm)
{
    // u = (1 - |x|)_+ on the unit ball: ||u||_3^3 = 4 pi int (1-r)^3 r^2 dr = 4 pi / 60.
    const auto dom = build_domain(DomainShape::ball(1.0), 65, 3);
    const auto u = GridFunction::sample(dom, 1, [](const Point& x, std::span<double> out) {
        out[0] = std::max(0.0, 1.0 - norm(x, 3));
    });
    EXPECT_NEAR(std::pow(lp_norm(u, 3.0), 3), 4.0 * kPi / 60.0, 5e-3 * 4.0 * kPi / 60.0);
}

TEST(Norms, RejectsPBelowOne)
{
    const auto dom = build_domain(DomainShape::cube(2.0), 9, 3);
    EXPECT_THROW(lp_norm(GridFunction(dom, 1), 0.5), InvalidArgument);
}

TEST(GridFunction, RejectsNonzeroExteriorValues)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 9, 3);
    std::vector<double> v(dom->node_count(), 0.0);
    v[0] = 1.0;  // a box corner, outside the ball
    EXPECT_THROW(GridFunction(dom, 1, v), InvalidArgument);
}

TEST(GridIo, RoundTripIsBitExact)
{
    const auto dom = build_domain(DomainShape::l_shape(2.0), 17, 3);
    TestFnSpec spec;
    spec.components = 3;
    spec.seed = 11;
    const auto u = generate_test_function(dom, spec);
    char path[] = "/tmp/epl_gridXXXXXX";
    const int fd = mkstemp(path);
    ASSERT_GE(fd, 0);
    close(fd);
    write_grid(u, path);
    const auto v = read_grid(path);
    ASSERT_EQ(v.components(), 3);
    ASSERT_EQ(v.values().size(), u.values().size());
    for (std::size_t i = 0; i < u.values().size(); ++i) EXPECT_EQ(u.values()[i], v.values()[i]);
    EXPECT_EQ(v.domain().mask(), dom->mask());
    std::remove(path);
    std::remove((std::string(path) + ".mask").c_str());
}

TEST(TestFunctions, DeterministicPerSeed)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 17, 3);
    TestFnSpec spec;
    spec.seed = 5;
    const auto a = generate_test_function(dom, spec);
    const auto b = generate_test_function(dom, spec);
    spec.seed = 6;
    const auto c = generate_test_function(dom, spec);
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST(TestFunctions, SupportStaysOffTheBoundary)
{
    for (ShapeKind k : {ShapeKind::Ball, ShapeKind::Cube, ShapeKind::LShape, ShapeKind::SlitCube}) {
        const auto dom = build_domain(DomainShape::standard(k), 17, 3);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            TestFnSpec spec;
            spec.seed = seed;
            const auto u = generate_test_function(dom, spec);
            double mx = 0.0;
            for (std::size_t node : dom->interior_nodes()) {
                mx = std::max(mx, std::abs(u(node)));
                if (dom->distance_to_exterior(node) < 2.0 * dom->spacing() - 1e-12) {
                    EXPECT_EQ(u(node), 0.0);
                }
            }
            EXPECT_GT(mx, 0.0);
        }
    }
}

TEST(TestFunctions, FixedRadialBumpPlacement)
{
    const auto dom = build_domain(DomainShape::cube(2.0), 17, 3);
    TestFnSpec spec;
    spec.kind = TestFnKind::RadialBump;
    spec.center = Point{};
    spec.radius = 0.5;
    const auto u = generate_test_function(dom, spec);
    EXPECT_DOUBLE_EQ(u(center_node(*dom)), 1.0);
    spec.radius = 0.99;
    EXPECT_THROW(generate_test_function(dom, spec), InvalidArgument);
}

TEST(Parallel, VisitsEveryIndexOnce)
{
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Parallel, RethrowsLowestFailingIndex)
{
    try {
        parallel_for(100, [](std::size_t i) {
            if (i % 10 == 7) throw std::runtime_error(std::to_string(i));
        });
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "7");
    }
}
