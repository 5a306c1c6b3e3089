#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "epl/positivity.hpp"
#include "epl/testfn.hpp"
#include "oracles.hpp"

using namespace epl;
using namespace epl::oracle;

TEST(MinEigenvalue, MatchesDenseSolverOnScalarForm)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 9, 3);
    const PunctureSpec punct{center_node(*dom), 2};
    const OperatorSpec op = ScalarDivForm::laplacian(3);
    const auto w = WeightEvaluator::laplace(3);
    const FormMatrix fm = build_form_matrix(op, w, *dom, punct);
    const double oracle = dense_min_eig(fm.matrix);
    const RayleighResult r = min_rayleigh(op, w, *dom, punct);
    EXPECT_NEAR(r.min_eig, oracle, 1e-8);
    EXPECT_EQ(r.admissible_dim, fm.dofs.size());
}

TEST(MinEigenvalue, MatchesDenseSolverOnLameForm)
{
    const auto dom = build_domain(DomainShape::cube(2.0), 7, 3);
    const PunctureSpec punct{center_node(*dom), 1};
    for (double alpha : {-0.95, 0.5, 45.0}) {
        const auto w = WeightEvaluator::lame(alpha);
        const FormMatrix fm = build_form_matrix(Lame3D{alpha}, w, *dom, punct);
        const double oracle = dense_min_eig(fm.matrix);
        EXPECT_NEAR(min_rayleigh(Lame3D{alpha}, w, *dom, punct).min_eig, oracle, 1e-8);
    }
}

TEST(MinEigenvalue, TridiagonalWithNegativeShift)
{
    // 2 - 2 cos(pi/(N+1)) - 1 for the shifted second-difference matrix.
    const std::size_t n = 400;
    CsrMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<std::size_t, double>> row;
        if (i > 0) row.emplace_back(i - 1, -1.0);
        row.emplace_back(i, 1.0);
        if (i + 1 < n) row.emplace_back(i + 1, -1.0);
        m.push_row(row);
    }
    const double exact = 1.0 - 2.0 * std::cos(kPi / (n + 1));
    EXPECT_NEAR(min_eigenvalue(m).min_eig, exact, 1e-10);
}

TEST(MinEigenvalue, IndependentOfStartScaleAndSeed)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 11, 3);
    const PunctureSpec punct{center_node(*dom), 2};
    const auto w = WeightEvaluator::lame(0.5);
    RayleighConfig a, b;
    b.start_scale = 1e6;
    b.seed = 99;
    const double ea = min_rayleigh(Lame3D{0.5}, w, *dom, punct, a).min_eig;
    const double eb = min_rayleigh(Lame3D{0.5}, w, *dom, punct, b).min_eig;
    EXPECT_NEAR(ea, eb, 1e-9 * std::abs(ea) + 1e-12);
}

TEST(FormMatrix, QuadraticFormEqualsWeightedForm)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 13, 3);
    const std::size_t x0 = center_node(*dom);
    const PunctureSpec punct{x0, 2};
    const OperatorSpec op = Lame3D{0.3};
    const auto w = WeightEvaluator::lame(0.3);
    const FormMatrix fm = build_form_matrix(op, w, *dom, punct);
    SplitMix64 rng(17);
    std::vector<double> x(fm.dofs.size());
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    GridFunction u(dom, 3);
    const auto interior = dom->interior_nodes();
    for (std::size_t k = 0; k < fm.dofs.size(); ++k) u.at(interior[fm.dofs[k] / 3], static_cast<int>(fm.dofs[k] % 3)) = x[k];
    const auto mx = fm.matrix * x;
    double quad = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) quad += x[k] * mx[k];
    const double q = weighted_form(op, w, u, x0);
    EXPECT_NEAR(quad, q, 1e-10 * std::abs(q));
}

TEST(WeightedForm, MatchesDirectSummationOracle)
{
    // 20 random inputs: 10 scalar Laplace and 10 Lame, on mixed shapes.
    const auto ball = build_domain(DomainShape::ball(1.0), 17, 3);
    const auto lsh = build_domain(DomainShape::l_shape(2.0), 17, 3);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto& dom = seed % 2 ? ball : lsh;
        TestFnSpec spec;
        spec.seed = seed;
        spec.kind = seed % 3 ? TestFnKind::SumOfBumps : TestFnKind::PolyTimesCutoff;
        const auto u = generate_test_function(dom, spec);
        // The pole is any interior node; the kernel is finite at every other node.
        const std::size_t x0 = dom->interior_nodes()[(seed * 7919) % dom->interior_count()];
        const double q = weighted_form(ScalarDivForm::laplacian(3), WeightEvaluator::laplace(3), u, x0);
        const double oracle = direct_laplace_form(u, x0);
        EXPECT_NEAR(q, oracle, 1e-10 * std::abs(oracle)) << "seed " << seed;
    }
    for (std::uint64_t seed = 11; seed <= 20; ++seed) {
        const auto& dom = seed % 2 ? ball : lsh;
        const double alpha = -0.9 + 0.2 * static_cast<double>(seed - 11);
        TestFnSpec spec;
        spec.seed = seed;
        spec.components = 3;
        const auto u = generate_test_function(dom, spec);
        const std::size_t x0 = center_node(*dom);
        const double q = weighted_form(Lame3D{alpha}, WeightEvaluator::lame(alpha), u, x0);
        const double oracle = direct_lame_form(alpha, u, apply(Lame3D{alpha}, u), x0);
        EXPECT_NEAR(q, oracle, 1e-10 * std::abs(oracle)) << "seed " << seed;
    }
}

TEST(WeightedForm, ScalarIdentityIsNonnegative)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 17, 3);
    const auto op = ScalarDivForm::scaled_isotropic(
        3, [](const Point& x) { return 1.0 + 0.5 * std::sin(x[0]); }, 0.5, 1.5, "sin");
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TestFnSpec spec;
        spec.seed = seed;
        const auto u = generate_test_function(dom, spec);
        EXPECT_GE(scalar_weighted_identity_check(op, u, center_node(*dom), 3), -1e-10);
    }
}

TEST(WeightedForm, StrongDefectDecompositionIsConsistent)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 13, 3);
    TestFnSpec spec;
    spec.components = 3;
    const auto u = generate_test_function(dom, spec);
    const std::size_t x0 = center_node(*dom);
    const auto rep = strong_defect(Lame3D{0.5}, WeightEvaluator::lame(0.5), u, x0, 0.01);
    double strong = 0.0;
    for (double t : rep.strong_terms) strong += t;
    EXPECT_NEAR(rep.form_value, rep.pointwise_term + 0.01 * strong + rep.defect, 1e-12 * rep.magnitude);
    EXPECT_NEAR(rep.form_value, weighted_form(Lame3D{0.5}, WeightEvaluator::lame(0.5), u, x0), 1e-12 * rep.magnitude);
}

TEST(WeightedForm, RejectsMismatchedComponents)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 9, 3);
    const GridFunction u(dom, 1);
    EXPECT_THROW(weighted_form(Lame3D{0.5}, WeightEvaluator::lame(0.5), u, center_node(*dom)), InvalidArgument);
}

TEST(Positivity, SignsOnCoarseGrids)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 13, 3);
    const PunctureSpec punct{center_node(*dom), 2};
    EXPECT_GE(min_rayleigh(ScalarDivForm::laplacian(3), WeightEvaluator::laplace(3), *dom, punct).min_eig, -1e-6);
    EXPECT_GE(min_rayleigh(Lame3D{0.5}, WeightEvaluator::lame(0.5), *dom, punct).min_eig, -1e-6);
    EXPECT_LT(min_rayleigh(Lame3D{1000.0}, WeightEvaluator::lame(1000.0), *dom, punct).min_eig, -1e-6);
}

TEST(Positivity, PunctureValidation)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 9, 3);
    const auto w = WeightEvaluator::laplace(3);
    EXPECT_THROW(min_rayleigh(ScalarDivForm::laplacian(3), w, *dom, PunctureSpec{center_node(*dom), 0}), InvalidArgument);
    EXPECT_THROW(min_rayleigh(ScalarDivForm::laplacian(3), w, *dom, PunctureSpec{dom->node_count(), 1}), InvalidArgument);
}

TEST(AlphaSearch, NonStraddlingBracketIsReported)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 9, 3);
    std::vector<AlphaRow> table;
    EXPECT_THROW(alpha_threshold_bisect(*dom, {2.0, 3.0}, true, 0.05, {}, table), BracketError);
    EXPECT_EQ(table.size(), 2u);
    EXPECT_THROW(alpha_threshold_bisect(*dom, {3.0, 2.0}, true, 0.05, {}, table), InvalidArgument);
}

TEST(AlphaSearch, BisectionBracketsTheSignChange)
{
    const auto dom = build_domain(DomainShape::ball(1.0), 13, 3);
    std::vector<AlphaRow> table;
    const double a = alpha_threshold_bisect(*dom, {1.0, 1000.0}, true, 16.0, {}, table);
    std::sort(table.begin(), table.end(), [](const AlphaRow& x, const AlphaRow& y) { return x.alpha < y.alpha; });
    // Every evaluated alpha below the estimate's bracket is nonnegative, every one above is negative.
    for (const auto& row : table) {
        if (row.alpha < a - 8.0) {
            EXPECT_GE(row.min_eig, -1e-6);
        }
        if (row.alpha > a + 8.0) {
            EXPECT_LT(row.min_eig, -1e-6);
        }
    }
}
