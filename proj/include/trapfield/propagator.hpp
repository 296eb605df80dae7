#ifndef TRAPFIELD_PROPAGATOR_HPP
#define TRAPFIELD_PROPAGATOR_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "crystal.hpp"
#include "errors.hpp"
#include "modes.hpp"
#include "specfun.hpp"

namespace trapfield {

// continuum Euclidean propagator of a Gaussian field, d = 1, 2, 3
inline double euclid_green(int d, double m, double x)
{
    if (!(m > 0.0))
        throw DomainError("euclid_green: mass must be > 0");
    if (x < 0.0)
        x = -x;
    switch (d) {
    case 1:
        return std::exp(-m * x) / (2.0 * m);
    case 2:
        if (x == 0.0)
            throw DomainError("euclid_green: d=2 propagator diverges at x=0");
        return bessel_k(0.0, m * x) / constants::two_pi;
    case 3:
        if (x == 0.0)
            throw DomainError("euclid_green: d=3 propagator diverges at x=0");
        return std::exp(-m * x) / (4.0 * constants::pi * x);
    default:
        throw DomainError("euclid_green: d must be 1, 2 or 3, got " + std::to_string(d));
    }
}

// (m/x)^nu K_nu(m x)/(2 pi)^{nu+1}, nu = d/2 - 1
inline double euclid_green_bessel(int d, double m, double x)
{
    const double nu = 0.5 * d - 1.0;
    return std::pow(m / x, nu) * bessel_k(nu, m * x) / std::pow(constants::two_pi, nu + 1.0);
}

using Dispersion = std::function<double(double)>; // k [1/m] -> omega^2 [rad^2/s^2]

struct LatticeGreenOptions {
    int min_points = 1 << 10;
    int max_points = 1 << 22;
    double tol = 1e-8;
};

// a int_0^{2pi/a} dk/2pi cos(k x)/(omega^2(k) - omega_J^2) for several x at once.
// Trapezoid on the periodic integrand with point doubling.
inline std::vector<double> lattice_euclid_green(const Dispersion& w2, double omega_J, double a,
                                                const std::vector<double>& xs,
                                                const LatticeGreenOptions& opt = {})
{
    if (opt.min_points < (1 << 10))
        throw DomainError("lattice_euclid_green: quad_points must be >= 2^10");
    const double wj2 = omega_J * omega_J;
    const std::size_t nx = xs.size();
    std::vector<double> sum(nx, 0.0), prev(nx, 0.0), out(nx, 0.0);
    double l1 = 0.0;

    auto accumulate = [&](int n, int start, int stride) {
        const double dk = constants::two_pi / (n * a);
        for (int m = start; m < n; m += stride) {
            const double k = m * dk;
            const double den = w2(k) - wj2;
            if (!(den > 0.0))
                throw ResonanceError("lattice_euclid_green: detuning at or above the band minimum");
            const double inv = 1.0 / den;
            l1 += inv;
            for (std::size_t q = 0; q < nx; ++q)
                sum[q] += std::cos(k * xs[q]) * inv;
        }
    };

    int n = opt.min_points;
    accumulate(n, 0, 1);
    for (std::size_t q = 0; q < nx; ++q)
        prev[q] = sum[q] / n;
    double worst = 0.0;
    while (true) {
        const int n2 = 2 * n;
        accumulate(n2, 1, 2);
        worst = 0.0;
        for (std::size_t q = 0; q < nx; ++q) {
            out[q] = sum[q] / n2;
            const double scale = std::max(std::fabs(out[q]), 1e-6 * l1 / n2);
            worst = std::max(worst, std::fabs(out[q] - prev[q]) / scale);
        }
        n = n2;
        if (worst <= opt.tol)
            break;
        if (n >= opt.max_points)
            throw ConvergenceError("lattice_euclid_green: not converged at point cap, rel change " +
                                       std::to_string(worst),
                                   worst);
        prev = out;
    }
    return out;
}

inline double lattice_euclid_green(const Dispersion& w2, double omega_J, double a, double x,
                                   const LatticeGreenOptions& opt = {})
{
    return lattice_euclid_green(w2, omega_J, a, std::vector<double>{x}, opt)[0];
}

inline Dispersion polylog_dispersion(const ChainParams& p)
{
    return [p](double k) { return dispersion_thermo(p, k); };
}

// two closed-form terms of the coupling law. Amplitudes are per unit of
// J_eff' = hbar Omega^2 eta_x^2/(omega_x ln2); green() gives propagator units (s^2).
struct SpectralDecomposition {
    double pole_amplitude = 0.0; // xi a^2/(2 l^3)
    double pole_decay = 0.0;     // 1/xi_eff
    double cut_amplitude = 0.0;  // omega_x^4 ln2 l^3/(omega_z^2-omega_J^2)^2, m^3
    int cut_power = 3;
    double a = 0.0;
    double omega_x = 0.0;

    double pole_term(double x) const
    {
        return -std::cos(constants::pi * x / a) * pole_amplitude * std::exp(-std::fabs(x) * pole_decay);
    }
    double cut_term(double x) const
    {
        const double r = std::fabs(x);
        return cut_amplitude / (r * r * r);
    }
    double coupling_shape(double x) const { return pole_term(x) + cut_term(x); }
    double to_green() const { return -1.0 / (omega_x * omega_x * constants::ln2); }
    double green(double x) const { return to_green() * coupling_shape(x); }
};

// wzz2_shift adds delta omega_zz^2 (renormalised mass)
inline double effective_range(const ChainParams& p, double omega_J, double wzz2_shift = 0.0)
{
    const double wzz2 = zigzag_frequency_sq(p) + wzz2_shift;
    const double gap = wzz2 - omega_J * omega_J;
    if (!(gap > 0.0) || !(omega_J * omega_J < wzz2))
        throw ResonanceError("effective_range: beat note at or above the zigzag frequency");
    const double ct = std::sqrt(p.coulomb() * constants::ln2 / (p.mass * p.a));
    return ct / std::sqrt(gap);
}

inline SpectralDecomposition decompose_pole_cut(const ChainParams& p, double omega_J, double wzz2_shift = 0.0)
{
    const double xi = effective_range(p, omega_J, wzz2_shift);
    SpectralDecomposition s;
    s.a = p.a;
    s.omega_x = p.omega_x;
    s.pole_decay = 1.0 / xi;
    s.pole_amplitude = xi * p.a * p.a / (2.0 * p.ell * p.ell * p.ell);
    const double d = p.omega_z * p.omega_z - omega_J * omega_J;
    const double wx2 = p.omega_x * p.omega_x;
    s.cut_amplitude = wx2 * wx2 * constants::ln2 * p.ell * p.ell * p.ell / (d * d);
    return s;
}

// time-ordered displacement correlator at the ion sites (m^2), theta(0) = 1/2 + 1/2
inline std::complex<double> feynman_lattice(const ModeSpectrum& s, double mass, double t, int i, int j)
{
    std::complex<double> acc = 0.0;
    const double at = std::fabs(t);
    for (int n = 0; n < s.size(); ++n) {
        const double w = s.frequencies(n);
        const double amp = s.mode_matrix(i, n) * s.mode_matrix(j, n) * constants::hbar / (2.0 * mass * w);
        acc += amp * std::polar(1.0, -w * at);
    }
    return acc;
}

} // namespace trapfield

#endif
