#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <gtest/gtest.h>

#include "epl/counterexample.hpp"
#include "epl/inequalities.hpp"

using namespace epl;

namespace {

constexpr double kPi = std::numbers::pi;

double radial_integral(double radius, const std::function<double(double)>& f)
{
    return 4.0 * kPi * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                           [&](double r) { return f(r) * r * r; }, 0.0, radius, 10, 1e-14);
}

GridFunction radial(const DomainPtr& dom, const std::function<double(double)>& f)
{
    return GridFunction::sample(dom, 1, [&](const Point& x, std::span<double> out) { out[0] = f(norm(x, dom->dim())); });
}

}  // namespace

TEST(Constants, Thm1LaplaceAtSTwoIsOneOverPi)
{
    EXPECT_NEAR(case_constant(InequalityCase::thm1(3, 2.0)), 1.0 / kPi, 1e-15);
    // n = 4, s = 1.5: q = 3, C = c2 * 3 * 3^2.
    EXPECT_NEAR(case_constant(InequalityCase::thm1(4, 1.5)), 27.0 / (2.0 * 2.0 * kPi * kPi), 1e-14);
}

TEST(Constants, LameMatchesClosedForm)
{
    for (double alpha : {-0.1, 0.0, 0.5, 1.4})
        for (double q : {1.5, 2.0, 2.5}) {
            const double c = (alpha + 2.0) / (8.0 * kPi * (alpha + 1.0));
            EXPECT_NEAR(lame_constant(alpha, q), 2.0 * c * (1.0 + std::abs(alpha) / (alpha + 2.0)) * q / (3.0 - q), 1e-14);
        }
}

TEST(Constants, BiharmonicL2CaseMatchesGammaForm)
{
    // Gamma(4 - n/2) / (2 pi^{n/2} (n-2)(n-4)) for q = 2.
    for (int n = 5; n <= 7; ++n) {
        const double expect = std::tgamma(4.0 - 0.5 * n) / (2.0 * std::pow(kPi, 0.5 * n) * (n - 2) * (n - 4));
        EXPECT_NEAR(case_constant(InequalityCase::higher(2, n, 2.0)), expect, 1e-12 * expect);
    }
    EXPECT_NEAR(case_constant(InequalityCase::higher(2, 5, 2.0)), 1.0 / (12.0 * kPi * kPi), 1e-15);
}

TEST(Cases, ValidationEchoesTheViolatedConstraint)
{
    auto message = [](const InequalityCase& c) {
        try {
            c.validate();
        } catch (const InvalidArgument& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message(InequalityCase::thm1(3, 3.0)).find("s < n/(n-2)"), std::string::npos);
    EXPECT_NE(message(InequalityCase::thm1(3, 1.0)).find("s > 1"), std::string::npos);
    EXPECT_NE(message(InequalityCase::lame(2.0, 2.0)).find("alpha"), std::string::npos);
    EXPECT_NE(message(InequalityCase::lame(0.5, 3.0)).find("q < 3"), std::string::npos);
    EXPECT_NE(message(InequalityCase::higher(2, 5, 5.0)).find("n/(n-2m)"), std::string::npos);
    EXPECT_EQ(message(InequalityCase::higher(2, 5, 2.0)), "");
}

TEST(Cases, ExponentsFollowTheDefinitions)
{
    const auto t = InequalityCase::thm1(3, 1.5);
    EXPECT_DOUBLE_EQ(t.q, 1.5);
    EXPECT_DOUBLE_EQ(t.p(), 3.0);
    const auto h = InequalityCase::higher(2, 7, 2.0);
    EXPECT_EQ(h.k(), 3);
    EXPECT_DOUBLE_EQ(h.p(), 2.0);
}

TEST(DerivativeNorm, HessianMatchesRadialOracle)
{
    // |D^2 f(r)|^2 = f''^2 + (n-1) (f'/r)^2 for radial f in R^3.
    const double R = 0.6;
    auto f = [R](double r) {
        const double t = 1.0 - r * r / (R * R);
        return t > 0.0 ? t * t * t : 0.0;
    };
    auto integrand = [R](double r) {
        const double t = 1.0 - r * r / (R * R);
        const double fp = -6.0 * r / (R * R) * t * t;
        const double fpp = -6.0 / (R * R) * t * t + 24.0 * r * r / (R * R * R * R) * t;
        const double fr = r > 0.0 ? fp / r : -6.0 / (R * R);
        return fpp * fpp + 2.0 * fr * fr;
    };
    const double exact = radial_integral(R, integrand);
    std::vector<double> err;
    for (int nodes : {33, 65}) {
        const auto dom = build_domain(DomainShape::cube(2.0), nodes, 3);
        const double v = detail::norm_of_derivative(radial(dom, f), 2, 2.0);
        err.push_back(std::abs(v * v - exact) / exact);
    }
    EXPECT_LT(err[1], 0.03);
    EXPECT_LT(err[1], err[0]);
}

TEST(DerivativeNorm, FirstOrderEqualsGradientNorm)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 17, 3);
    TestFnSpec spec;
    spec.components = 3;
    const auto u = generate_test_function(dom, spec);
    EXPECT_NEAR(detail::norm_of_derivative(u, 1, 1.7), lp_norm(gradient(u, 1), 1.7), 1e-13);
}

TEST(Ratio, ScaleInvariantInAmplitude)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 17, 3);
    const auto u = generate_test_function(dom, {});
    const auto c = InequalityCase::thm1(3, 1.5);
    const OperatorSpec lap = ScalarDivForm::laplacian(3);
    const double a = inequality_ratio(c, lap, u).normalized_ratio;
    const double b = inequality_ratio(c, lap, 7.5 * u).normalized_ratio;
    EXPECT_NEAR(a, b, 1e-12 * a);
    EXPECT_GT(a, 0.0);
}

TEST(Ratio, ZeroFunctionGivesZero)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 9, 3);
    const auto r = inequality_ratio(InequalityCase::thm1(3, 2.0), ScalarDivForm::laplacian(3), GridFunction(dom, 1));
    EXPECT_EQ(r.normalized_ratio, 0.0);
}

TEST(Ratio, RejectsMismatchedOperators)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 9, 3);
    const auto u = generate_test_function(dom, {});
    const auto sin_op = ScalarDivForm::scaled_isotropic(
        3, [](const Point& x) { return 1.0 + 0.5 * std::sin(x[0]); }, 0.5, 1.5, "sin");
    EXPECT_THROW(inequality_ratio(InequalityCase::thm1(3, 2.0), sin_op, u), InvalidArgument);
    EXPECT_NO_THROW(inequality_ratio(InequalityCase::thm1(3, 2.0, 0.08), sin_op, u));
    TestFnSpec spec;
    spec.components = 3;
    const auto v = generate_test_function(dom, spec);
    EXPECT_THROW(inequality_ratio(InequalityCase::lame(0.5, 2.0), Lame3D{0.4}, v), InvalidArgument);
}

TEST(Ratio, LaplacianPiBoundHoldsOnRandomBumps)
{
    TrialConfig cfg;
    cfg.shapes = {ShapeKind::Ball, ShapeKind::Cube, ShapeKind::LShape};
    cfg.nodes = 17;
    cfg.trials = 10;
    cfg.seed = 7;
    const auto reps = ratio_trials(InequalityCase::thm1(3, 2.0), ScalarDivForm::laplacian(3), cfg);
    ASSERT_EQ(reps.size(), 30u);
    EXPECT_EQ(reps[0].shape, "ball");
    EXPECT_EQ(reps[10].shape, "cube");
    EXPECT_EQ(reps[0].seed, trial_seed(7, 0));
    EXPECT_EQ(reps[11].seed, trial_seed(7, 1));
    EXPECT_LE(max_ratio(reps), 1.05);
}

TEST(Ratio, TrialsAreDeterministic)
{
    TrialConfig cfg;
    cfg.nodes = 13;
    cfg.trials = 6;
    const auto a = ratio_trials(InequalityCase::lame(0.5, 2.0), Lame3D{0.5}, cfg);
    const auto b = ratio_trials(InequalityCase::lame(0.5, 2.0), Lame3D{0.5}, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].normalized_ratio, b[i].normalized_ratio);
}

TEST(LatticeZeta, OneDimensionalCaseIsTwiceRiemannZeta)
{
    for (double s : {0.3, 0.5, 0.9, 1.5, 2.0, 3.0})
        EXPECT_NEAR(lattice_zeta(1, s), 2.0 * boost::math::zeta(s), 1e-11 * std::abs(boost::math::zeta(s)));
}

TEST(LatticeZeta, CubicLatticeKnownValues)
{
    EXPECT_NEAR(lattice_zeta(3, 2.0), -8.913632917585151, 1e-11);
    // Z_3(4) by truncated direct summation plus the continuum tail 4 pi / R.
    const int R = 60;
    long double s = 0.0;
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j)
            for (int k = -R; k <= R; ++k) {
                const long r2 = static_cast<long>(i) * i + static_cast<long>(j) * j + static_cast<long>(k) * k;
                if (r2 == 0 || r2 > static_cast<long>(R) * R) continue;
                s += 1.0L / (static_cast<long double>(r2) * r2);
            }
    EXPECT_NEAR(lattice_zeta(3, 4.0), static_cast<double>(s) + 4.0 * kPi / R, 2e-3);
    EXPECT_THROW(lattice_zeta(3, 3.0), InvalidArgument);
}

TEST(Hardy, ConeRatioApproachesSharpConstant)
{
    // u = (1 - |x|)_+ gives int u^2/|x|^2 = int |Du|^2 = 4 pi / 3, so the ratio is exactly 1/4.
    const auto dom = build_domain(DomainShape::ball(1.0), 33, 3);
    const auto u = radial(dom, [](double r) { return std::max(0.0, 1.0 - r); });
    EXPECT_NEAR(hardy_ratio(u, center_node(*dom), 2.0, 3), 0.25, 0.01);
}

TEST(Hardy, SingularMomentMatchesRadialOracle)
{
    const double R = 0.6;
    auto f = [R](double r) {
        const double t = 1.0 - r * r / (R * R);
        return t > 0.0 ? t * t * t : 0.0;
    };
    const double exact = radial_integral(R, [&](double r) { return f(r) * f(r) / (r * r); });
    const auto dom = build_domain(DomainShape::cube(2.0), 33, 3);
    const double v = detail::singular_moment(radial(dom, f), center_node(*dom), 2.0, 2.0);
    EXPECT_NEAR(v, exact, 2e-3 * exact);
}

TEST(Hardy, RatiosStayBelowOneOnBumps)
{
    const auto dom3 = build_domain(DomainShape::ball(1.0), 25, 3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TestFnSpec spec;
        spec.seed = seed;
        const auto u3 = generate_test_function(dom3, spec);
        EXPECT_LE(hardy_ratio(u3, center_node(*dom3), 1.5, 3), 1.05);
        EXPECT_LE(hardy_chain_ratio(u3, center_node(*dom3), 1.2, 2, 3), 1.05);
    }
    EXPECT_THROW(hardy_ratio(generate_test_function(dom3, {}), center_node(*dom3), 3.0, 3), InvalidArgument);
}

TEST(Hardy, FiveDimensionalRatiosNeedResolvedBumps)
{
    // A bump centered at the pole has exact ratio 0.912 for n = 5, q = 1.2, so a 2h-wide
    // difference stencil that underestimates |Du| pushes barely resolved bumps above one.
    const auto dom = build_domain(DomainShape::cube(2.0), 17, 5);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        TestFnSpec spec;
        spec.seed = seed;
        spec.min_radius_cells = 4.0;
        EXPECT_LE(hardy_chain_ratio(generate_test_function(dom, spec), center_node(*dom), 1.2, 1, 5), 1.0);
    }
}

TEST(Green, LaplaceSandwichAndScaling)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 25, 3);
    const auto gb = green_sandwich_check(ScalarDivForm::laplacian(3), center_node(*dom), dom);
    EXPECT_GT(gb.c1, 0.0);
    EXPECT_LE(gb.c2, 1.1 / (4.0 * kPi));
    EXPECT_GT(gb.window_nodes, 0u);
    const auto two = ScalarDivForm::scaled_isotropic(3, [](const Point&) { return 2.0; }, 2.0, 2.0, "two");
    const auto g2 = green_sandwich_check(two, center_node(*dom), dom);
    EXPECT_NEAR(g2.c2 / gb.c2, 0.5, 0.05);
    EXPECT_NEAR(g2.c1 / gb.c1, 0.5, 0.05);
}

TEST(Green, RejectsShallowPole)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 17, 3);
    const std::size_t near_wall = dom->nearest_node(Point{0.8, 0.0, 0.0});
    EXPECT_THROW(green_sandwich_check(ScalarDivForm::laplacian(3), near_wall, dom), InvalidArgument);
}

TEST(Counterexample, ProfileAndCutoff)
{
    EXPECT_EQ(smoothstep_cutoff(0.2, 0.5, 1.0), 1.0);
    EXPECT_EQ(smoothstep_cutoff(1.0, 0.5, 1.0), 0.0);
    EXPECT_NEAR(smoothstep_cutoff(0.75, 0.5, 1.0), 0.5, 1e-15);
    CutoffSpec c;
    EXPECT_NEAR(loglog_profile(0.1, 0.0, c), std::log(std::log(10.0)), 1e-14);
}

TEST(Counterexample, ThreeLevelSuiteShowsTheTrend)
{
    const auto rep = counterexample_suite(3);
    const auto ratio = rep.column("critical_ratio");
    ASSERT_EQ(ratio.size(), 3u);
    EXPECT_LT(ratio[0], ratio[1]);
    EXPECT_LT(ratio[1], ratio[2]);
    EXPECT_LE(rep.metrics.at("max_subcritical_ratio"), 1.05);
    CutoffSpec bad;
    bad.kappa = 0.0;
    EXPECT_THROW(counterexample_suite(3, bad), InvalidArgument);
    EXPECT_THROW(counterexample_suite(2), InvalidArgument);
}
