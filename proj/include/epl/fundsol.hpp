#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "epl/core.hpp"
#include "epl/grid.hpp"

namespace epl {

/// Surface measure of the unit sphere S^{n-1}: n pi^{n/2} / Gamma(n/2 + 1).
inline double sphere_measure(int n)
{
    EPL_REQUIRE(n >= 2, InvalidArgument, "sphere measure needs n >= 2");
    return n * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// Amplitude [(n-2) omega_n]^{-1} of the Laplace fundamental solution.
inline double laplace_amplitude(int n)
{
    EPL_REQUIRE(n >= 3, InvalidArgument, "Laplace fundamental solution needs n >= 3");
    return 1.0 / ((n - 2) * sphere_measure(n));
}

inline double laplace_fs(int n, std::span<const double> x)
{
    EPL_REQUIRE(static_cast<int>(x.size()) >= n, InvalidArgument, "point has too few coordinates");
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    EPL_REQUIRE(r2 > 0.0, InvalidArgument, "fundamental solution is singular at x = 0");
    return laplace_amplitude(n) * std::pow(r2, 0.5 * (2 - n));
}

/// c_alpha = (alpha + 2) / (8 pi (alpha + 1)).
inline double lame_amplitude(double alpha)
{
    EPL_REQUIRE(alpha > -1.0, InvalidArgument, "Lame parameter must satisfy alpha > -1");
    return (alpha + 2.0) / (8.0 * std::numbers::pi * (alpha + 1.0));
}

/// Lame fundamental matrix c_alpha r^{-1} (delta_ij + alpha/(alpha+2) w_i w_j), row-major 3x3.
inline std::array<double, 9> lame_fs(double alpha, std::span<const double> x)
{
    const double c = lame_amplitude(alpha);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    EPL_REQUIRE(r > 0.0, InvalidArgument, "fundamental solution is singular at x = 0");
    const double k = alpha / (alpha + 2.0);
    std::array<double, 9> phi{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) phi[i * 3 + j] = c / r * ((i == j ? 1.0 : 0.0) + k * (x[i] / r) * (x[j] / r));
    return phi;
}

/// Amplitude of the homogeneous polyharmonic fundamental solution; only the (m, n) pairs with a
/// homogeneous closed form are supported: m = 1 with n >= 3 and m = 2 with n in {5, 6, 7}.
inline double polyharmonic_amplitude(int m, int n)
{
    if (m == 1 && n >= 3) return laplace_amplitude(n);
    if (m == 2 && n >= 5 && n <= 7) return 1.0 / (2.0 * (n - 2) * (n - 4) * sphere_measure(n));
    throw InvalidArgument("unsupported fundamental solution");
}

inline double polyharmonic_fs(int m, int n, std::span<const double> x)
{
    const double amp = polyharmonic_amplitude(m, n);
    if (m == 1) return laplace_fs(n, x);
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    EPL_REQUIRE(r2 > 0.0, InvalidArgument, "fundamental solution is singular at x = 0");
    return amp * std::pow(r2, 0.5 * (2 * m - n));
}

enum class WeightKind { Laplace, Lame, Polyharmonic, DiscreteGreen };

/// Weight function used in the quadratic forms: a closed-form fundamental solution centered at the
/// pole, or a discrete Green's function column (one column per component for systems).
class WeightEvaluator {
public:
    static WeightEvaluator laplace(int n)
    {
        laplace_amplitude(n);
        WeightEvaluator w;
        w.kind_ = WeightKind::Laplace;
        w.dim_ = n;
        w.m_ = 1;
        return w;
    }
    static WeightEvaluator lame(double alpha)
    {
        lame_amplitude(alpha);
        WeightEvaluator w;
        w.kind_ = WeightKind::Lame;
        w.dim_ = 3;
        w.alpha_ = alpha;
        w.m_ = 1;
        return w;
    }
    static WeightEvaluator polyharmonic(int m, int n)
    {
        polyharmonic_amplitude(m, n);
        WeightEvaluator w;
        w.kind_ = WeightKind::Polyharmonic;
        w.dim_ = n;
        w.m_ = m;
        return w;
    }
    /// Columns G(., pole) e_c, c = 0..N-1, as produced by green_columns().
    static WeightEvaluator discrete_green(std::vector<GridFunction> columns, std::size_t pole)
    {
        EPL_REQUIRE(!columns.empty(), InvalidArgument, "discrete Green weight needs at least one column");
        WeightEvaluator w;
        w.kind_ = WeightKind::DiscreteGreen;
        w.dim_ = columns.front().domain().dim();
        w.pole_ = pole;
        w.columns_ = std::make_shared<const std::vector<GridFunction>>(std::move(columns));
        return w;
    }

    WeightKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    int components() const noexcept
    {
        if (kind_ == WeightKind::Lame) return 3;
        if (kind_ == WeightKind::DiscreteGreen) return static_cast<int>(columns_->size());
        return 1;
    }
    double alpha() const noexcept { return alpha_; }
    int half_order() const noexcept { return m_; }
    bool homogeneous() const noexcept { return kind_ != WeightKind::DiscreteGreen; }
    /// Degree d with w(t x) = t^d w(x).
    double homogeneity_degree() const noexcept { return 2.0 * m_ - dim_; }

    double regularization_radius() const noexcept { return rho_; }
    WeightEvaluator& set_regularization_radius(double rho)
    {
        EPL_REQUIRE(rho >= 0.0, InvalidArgument, "regularization radius must be non-negative");
        rho_ = rho;
        return *this;
    }

    /// Closed-form value at displacement x (row-major N x N).
    void evaluate(std::span<const double> x, std::span<double> out) const
    {
        if (rho_ > 0.0) {
            double r2 = 0.0;
            for (int i = 0; i < dim_; ++i) r2 += x[i] * x[i];
            EPL_REQUIRE(std::sqrt(r2) > rho_, InvalidArgument, "weight evaluated inside its regularization radius");
        }
        switch (kind_) {
        case WeightKind::Laplace: out[0] = laplace_fs(dim_, x); return;
        case WeightKind::Polyharmonic: out[0] = polyharmonic_fs(m_, dim_, x); return;
        case WeightKind::Lame: {
            const auto phi = lame_fs(alpha_, x);
            std::copy(phi.begin(), phi.end(), out.begin());
            return;
        }
        case WeightKind::DiscreteGreen: break;
        }
        throw InvalidArgument("discrete Green weights have no closed form");
    }

    /// Weight value linking pole x0 and node y: closed forms use the displacement x0 - y, discrete
    /// Green weights read G(y; x0) and require x0 to be the column's pole.
    void at_node(const GridDomain& dom, std::size_t x0, std::size_t y, std::span<double> out) const
    {
        if (kind_ == WeightKind::DiscreteGreen) {
            EPL_REQUIRE(x0 == pole_, InvalidArgument, "discrete Green weight evaluated at a foreign pole");
            const int nc = components();
            for (int c = 0; c < nc; ++c)
                for (int r = 0; r < nc; ++r) out[r * nc + c] = (*columns_)[c](y, r);
            return;
        }
        const Point a = dom.position(x0), b = dom.position(y);
        Point d{};
        for (int i = 0; i < dom.dim(); ++i) d[i] = a[i] - b[i];
        evaluate(std::span<const double>(d.data(), static_cast<std::size_t>(dom.dim())), out);
    }

private:
    WeightKind kind_ = WeightKind::Laplace;
    int dim_ = 3;
    int m_ = 1;
    double alpha_ = 0.0;
    double rho_ = 0.0;
    std::size_t pole_ = 0;
    std::shared_ptr<const std::vector<GridFunction>> columns_;
};

inline double frobenius(std::span<const double> m)
{
    double s = 0.0;
    for (double v : m) s += v * v;
    return std::sqrt(s);
}

/// Deterministic quasi-uniform points on S^{n-1}: a spherical Fibonacci lattice for n = 3, a
/// Kronecker sequence pushed through the Gaussian quantile and normalized otherwise.
inline std::vector<Point> sphere_points(int n, std::size_t count)
{
    std::vector<Point> pts(count);
    if (n == 3) {
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(count);
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = 2.0 * std::numbers::pi * std::fmod(static_cast<double>(i) / golden, 1.0);
            pts[i] = Point{rho * std::cos(phi), rho * std::sin(phi), z};
        }
        return pts;
    }
    // Generalized golden ratio: root of x^{n+1} = x + 1.
    double g = 2.0;
    for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / (n + 1));
    std::array<double, kMaxDim> step{};
    for (int d = 0; d < n; ++d) step[d] = std::fmod(1.0 / std::pow(g, d + 1), 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        Point p{};
        double r2 = 0.0;
        for (int d = 0; d < n; ++d) {
            const double u = std::fmod(0.5 + step[d] * static_cast<double>(i + 1), 1.0);
            const double clamped = std::clamp(u, 1e-12, 1.0 - 1e-12);
            p[d] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * clamped - 1.0);
            r2 += p[d] * p[d];
        }
        const double r = std::sqrt(r2);
        for (int d = 0; d < n; ++d) p[d] /= r;
        pts[i] = p;
    }
    return pts;
}

/// max over the unit sphere of the Frobenius norm |F(w)|, sampled on 10^4 quasi-uniform directions.
inline double weight_sup_on_sphere(const WeightEvaluator& w, std::size_t samples = 10000)
{
    EPL_REQUIRE(w.homogeneous(), InvalidArgument, "sphere supremum is unsupported for discrete Green weights");
    const int n = w.dim();
    const int nc = w.components();
    std::vector<double> val(nc * nc);
    double best = 0.0;
    for (const Point& p : sphere_points(n, samples)) {
        w.evaluate(std::span<const double>(p.data(), static_cast<std::size_t>(n)), val);
        best = std::max(best, frobenius(val));
    }
    return best;
}

}  // namespace epl
