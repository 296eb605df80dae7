#ifndef TRAPFIELD_SPECFUN_HPP
#define TRAPFIELD_SPECFUN_HPP

#include <array>
#include <cmath>
#include <string>

#include "constants.hpp"
#include "errors.hpp"

namespace trapfield {

inline double zeta(int n)
{
    if (n < 2)
        throw DomainError("zeta: n must be >= 2, got " + std::to_string(n));
    return std::riemann_zeta(static_cast<double>(n));
}

namespace detail {

// zeta(2n) for n = 1..kClausenTerms
inline constexpr int kClausenTerms = 40;

inline const std::array<double, kClausenTerms + 1>& even_zeta_table()
{
    static const auto table = [] {
        std::array<double, kClausenTerms + 1> t{};
        for (int n = 1; n <= kClausenTerms; ++n)
            t[n] = std::riemann_zeta(2.0 * n);
        return t;
    }();
    return table;
}

} // namespace detail

// Re Li_3(e^{i theta}) = sum_r cos(r theta)/r^3
inline double polylog3_circle(double theta)
{
    using constants::pi;
    using constants::two_pi;
    double t = std::remainder(theta, two_pi); // now in [-pi, pi]
    t = std::fabs(t);
    const double z3 = std::riemann_zeta(3.0);
    if (t == 0.0)
        return z3;
    const auto& zt = detail::even_zeta_table();
    double s = z3 + 0.5 * t * t * (std::log(t) - 1.5);
    const double q = (t / two_pi) * (t / two_pi);
    double qn = 1.0;
    const double t2 = t * t;
    for (int n = 1; n <= detail::kClausenTerms; ++n) {
        qn *= q;
        const double term = zt[n] * t2 * qn / (n * (2.0 * n + 1.0) * (2.0 * n + 2.0));
        s -= term;
        if (term < 1e-18 * std::fabs(s))
            break;
    }
    return s;
}

// K_nu(u) from int_0^inf exp(-u cosh t) cosh(nu t) dt, trapezoid in t.
// Integrand is entire and decays double exponentially, so a fixed step is enough.
inline double bessel_k_integral(double nu, double u)
{
    if (!(u > 0.0))
        throw DomainError("bessel_k: argument must be > 0");
    const double h = 0.02;
    // stop once u (cosh t - 1) exceeds 40 plus the growth of cosh(nu t)
    double sum = 0.5; // t = 0, scaled by e^{u}
    for (int k = 1;; ++k) {
        const double t = k * h;
        const double ex = -u * (std::cosh(t) - 1.0) + std::fabs(nu) * t;
        const double f = std::exp(-u * (std::cosh(t) - 1.0)) * std::cosh(nu * t);
        sum += f;
        if (ex < -40.0 && k * h > 1.0)
            break;
    }
    return h * sum * std::exp(-u);
}

// K_nu for nu in {0, 1/2} (|nu| = 1/2 uses the closed form)
inline double bessel_k(double nu, double u)
{
    if (!(u > 0.0))
        throw DomainError("bessel_k: argument must be > 0 (coincident points)");
    if (std::fabs(std::fabs(nu) - 0.5) < 1e-15)
        return std::sqrt(constants::pi / (2.0 * u)) * std::exp(-u);
    if (nu == 0.0)
        return std::cyl_bessel_k(0.0, u);
    throw DomainError("bessel_k: only nu in {0, 1/2} is supported");
}

inline double bessel_j0(double x)
{
    return std::cyl_bessel_j(0.0, std::fabs(x));
}

} // namespace trapfield

#endif
