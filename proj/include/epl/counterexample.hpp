#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "epl/fundsol.hpp"
#include "epl/grid.hpp"
#include "epl/inequalities.hpp"
#include "epl/operators.hpp"
#include "epl/report.hpp"

namespace epl {

/// Parameters of the critical-exponent experiment u = zeta(|x|) log|log|x||.
///
/// zeta is 1 on [0, inner], 0 beyond `outer`, and a quintic smoothstep in between. On grid level l
/// the logarithmic pole is regularized as |x| -> sqrt(|x|^2 + (kappa h)^2).
struct CutoffSpec {
    double inner = 0.5;
    double outer = 1.0;
    double kappa = 1.0;
    int base_nodes = 17;
    int dim = 3;
    /// Subcritical exponent s for the companion divergence-form ratio.
    double subcritical_s = 2.0;
    double subcritical_allowance = 0.05;
    /// Level-independent bound for |Du| |x| |log|x|| and |Laplace u| |x|^2 |log|x||.
    double pointwise_bound = 3.0;
    /// Required factor between successive relative norm differences.
    double shrink = 0.75;
    /// Required total growth of the critical ratio.
    double growth = 1.5;

    void validate() const
    {
        EPL_REQUIRE(inner > 0.0 && outer > inner && outer < 1.0 + 1e-12, InvalidArgument,
                    "cutoff needs 0 < inner < outer <= 1");
        EPL_REQUIRE(kappa > 0.0, InvalidArgument, "kappa must be positive");
        EPL_REQUIRE(base_nodes >= 5 && base_nodes % 2 == 1, InvalidArgument, "base_nodes must be odd and at least 5");
        EPL_REQUIRE(dim >= 3 && dim <= kMaxDim, InvalidArgument, "dimension must lie in [3, 7]");
        InequalityCase::thm1(dim, subcritical_s).validate();
        EPL_REQUIRE(pointwise_bound > 0.0 && shrink > 0.0 && growth > 0.0 && subcritical_allowance >= 0.0,
                    InvalidArgument, "thresholds must be positive");
    }
};

inline double smoothstep_cutoff(double r, double inner, double outer)
{
    if (r <= inner) return 1.0;
    if (r >= outer) return 0.0;
    const double t = (r - inner) / (outer - inner);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

/// zeta(r) log|log sqrt(r^2 + eps^2)|.
inline double loglog_profile(double r, double eps, const CutoffSpec& c)
{
    const double z = smoothstep_cutoff(r, c.inner, c.outer);
    if (z == 0.0) return 0.0;
    const double rho = std::sqrt(r * r + eps * eps);
    return z * std::log(std::abs(std::log(rho)));
}

/// Runs `levels` dyadic refinements of the critical-exponent function on [-outer, outer]^n.
inline ExperimentReport counterexample_suite(int levels, const CutoffSpec& cut = {})
{
    EPL_REQUIRE(levels >= 3, InvalidArgument, "counterexample needs at least 3 levels");
    EPL_REQUIRE(levels <= 6, InvalidArgument, "counterexample supports at most 6 levels");
    cut.validate();
    const int n = cut.dim;
    const double q = n;             // critical s = n/(n-2): q = (n-2)s = n
    const double p = 0.5 * n;       // p = s/(s-1) = n/2
    const double c2 = laplace_amplitude(n);
    // The Hardy factor (q/(n-q))^{n-2} is infinite at the critical exponent and is left out.
    const double critical_constant = c2 * (n - 1);
    const OperatorSpec lap = ScalarDivForm::laplacian(n);

    ExperimentReport rep;
    rep.name = "counterexample";
    rep.parameters = {{"levels", std::to_string(levels)},
                      {"dim", std::to_string(n)},
                      {"base_nodes", std::to_string(cut.base_nodes)},
                      {"inner", detail::fmt17(cut.inner)},
                      {"outer", detail::fmt17(cut.outer)},
                      {"kappa", detail::fmt17(cut.kappa)}};
    rep.columns = {"level", "h", "sup_u", "du_l3", "lap_l32", "critical_ratio"};

    std::vector<double> subcritical, kd, kl;
    for (int level = 0; level < levels; ++level) {
        const int nodes = (cut.base_nodes - 1) * (1 << level) + 1;
        const DomainPtr dom = build_domain(DomainShape::cube(2.0 * cut.outer), nodes, n);
        const double h = dom->spacing();
        const double eps = cut.kappa * h;
        const GridFunction u = GridFunction::sample(dom, 1, [&](const Point& x, std::span<double> out) {
            out[0] = loglog_profile(norm(x, n), eps, cut);
        });
        const GridFunction du = gradient(u, 1);
        const GridFunction lu = epl::apply(lap, u);

        double sup_far = 0.0, pd = 0.0, pl = 0.0;
        for (std::size_t node : dom->interior_nodes()) {
            const double r = norm(dom->position(node), n);
            if (r < 4.0 * h) continue;
            sup_far = std::max(sup_far, std::abs(u(node)));
            if (r <= 0.25) {
                const double lg = std::abs(std::log(r));
                pd = std::max(pd, du.magnitude(node) * r * lg);
                pl = std::max(pl, std::abs(lu(node)) * r * r * lg);
            }
        }
        const double sup = lp_norm(u, INFINITY);
        const double dq = lp_norm(du, q);
        const double lp = lp_norm(lu, p);
        const double ratio = ipow(sup, n - 1) / (critical_constant * lp * ipow(dq, n - 2));
        rep.rows.push_back({static_cast<double>(level), h, sup_far, dq, lp, ratio});
        subcritical.push_back(inequality_ratio(InequalityCase::thm1(n, cut.subcritical_s), lap, u).normalized_ratio);
        kd.push_back(pd);
        kl.push_back(pl);
    }

    const auto sup = rep.column("sup_u");
    const auto dq = rep.column("du_l3");
    const auto lp = rep.column("lap_l32");
    const auto ratio = rep.column("critical_ratio");
    auto increasing = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) return false;
        return true;
    };
    auto shrinking = [&](const std::vector<double>& v) {
        std::vector<double> d;
        for (std::size_t i = 1; i < v.size(); ++i) d.push_back(std::abs(v[i] - v[i - 1]) / std::abs(v[i]));
        for (std::size_t i = 1; i < d.size(); ++i)
            if (!(d[i] <= cut.shrink * d[i - 1])) return false;
        return true;
    };
    double max_sub = 0.0, max_kd = 0.0, max_kl = 0.0;
    for (double v : subcritical) max_sub = std::max(max_sub, v);
    for (double v : kd) max_kd = std::max(max_kd, v);
    for (double v : kl) max_kl = std::max(max_kl, v);

    rep.metrics["critical_growth"] = ratio.back() / ratio.front();
    rep.metrics["max_subcritical_ratio"] = max_sub;
    rep.metrics["max_gradient_bound"] = max_kd;
    rep.metrics["max_laplacian_bound"] = max_kl;
    rep.metrics["sup_u_growth"] = sup.back() / sup.front();
    // Away from the pole the cutoff lobe dominates |u| on coarse levels, so only the trend is checked.
    rep.checks = {{"sup_u_grows", sup.back() > sup.front()},
                  {"critical_ratio_increasing", increasing(ratio)},
                  {"critical_ratio_growth", ratio.back() >= cut.growth * ratio.front()},
                  {"du_differences_shrink", shrinking(dq)},
                  {"lap_differences_shrink", shrinking(lp)},
                  {"subcritical_bounded", max_sub <= 1.0 + cut.subcritical_allowance},
                  {"pointwise_bounds", max_kd <= cut.pointwise_bound && max_kl <= cut.pointwise_bound}};
    return rep;
}

}  // namespace epl
