#ifndef TRAPFIELD_DRIVE_HPP
#define TRAPFIELD_DRIVE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "modes.hpp"
#include "specfun.hpp"

namespace trapfield {

struct DriveConfig {
    double omega_d = 0.0;   // rad/s
    double delta_eta = 0.0; // eta_i = i * delta_eta

    void validate(double omega_z) const
    {
        if (!(omega_d > 0.0))
            throw DomainError("DriveConfig: omega_d must be > 0");
        if (omega_d == omega_z)
            throw DomainError("DriveConfig: omega_d must differ from omega_z");
    }
};

struct SeriesValue {
    double value = 0.0;
    double error_estimate = 0.0;
    long terms = 0;
};

namespace detail {

// 1 on [0, 1/2], smooth C-infinity fall to 0 at 1
inline double taper(double s)
{
    if (s <= 0.5)
        return 1.0;
    if (s >= 1.0)
        return 0.0;
    const double t = 2.0 * s - 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return 1.0 - a / (a + b);
}

inline double tapered_sum(double de, long R)
{
    double s = 0.0;
    for (long r = 1; r < R; ++r) {
        const double term = bessel_j0(de * static_cast<double>(r)) / static_cast<double>(r);
        s += (r % 2 ? -term : term) * taper(static_cast<double>(r) / R);
    }
    return s;
}

} // namespace detail

// sum_{r>=1} (-1)^r J0(delta_eta r)/r via smoothed partial sums with doubling.
// Exactly at delta_eta = (2k+1)pi the error only falls like R^{-1/2}; Aitken on the
// last three levels removes it.
inline SeriesValue alternating_bessel_series(double delta_eta, double tol = 1e-12, long r_cap = 1L << 20)
{
    const double de = std::fabs(delta_eta);
    SeriesValue out;
    if (de == 0.0) {
        out.value = -constants::ln2;
        out.terms = 1;
        return out;
    }
    long R = 1024;
    std::vector<double> seq{detail::tapered_sum(de, R)};
    while (true) {
        R *= 2;
        seq.push_back(detail::tapered_sum(de, R));
        const double d = std::fabs(seq.back() - seq[seq.size() - 2]);
        if (d <= tol * std::max(1.0, std::fabs(seq.back()))) {
            out.value = seq.back();
            out.error_estimate = d;
            out.terms = R;
            return out;
        }
        if (R >= r_cap)
            break;
    }
    auto aitken = [](double s0, double s1, double s2) {
        const double den = (s2 - s1) - (s1 - s0);
        return den != 0.0 ? s2 - (s2 - s1) * (s2 - s1) / den : s2;
    };
    const std::size_t n = seq.size();
    const double a2 = aitken(seq[n - 3], seq[n - 2], seq[n - 1]);
    const double a1 = aitken(seq[n - 4], seq[n - 3], seq[n - 2]);
    out.value = a2;
    out.error_estimate = std::fabs(a2 - a1);
    out.terms = R;
    if (!(out.error_estimate < 1e-6))
        throw ConvergenceError("dressed_shear_modulus: series not converged at r cap, estimate " +
                                   std::to_string(out.error_estimate),
                               out.error_estimate);
    return out;
}

// mu~_r / mu_r on the homogeneous bulk
inline double shear_modulus_ratio(double delta_eta)
{
    return alternating_bessel_series(delta_eta).value / (-constants::ln2);
}

// (1/2a) sum_{j!=i} kappa_ij |x_ij|^2 cos(pi |x_ij|/a) J0(delta_eta (j-i)), N
inline double dressed_shear_modulus(const ChainParams& p, const DriveConfig& d)
{
    const double s = alternating_bessel_series(d.delta_eta).value;
    return -p.coulomb() / (p.a * p.a) * s;
}

// hbar|kappa|/(4 m omega_z hbar omega_d) with the nearest-neighbour kappa
inline double drive_validity_ratio(const ChainParams& p, const DriveConfig& d)
{
    const double kappa = p.coulomb() / (p.a * p.a * p.a);
    return kappa / (4.0 * p.mass * p.omega_z * d.omega_d);
}

inline LongWavelengthParams dressed_params(const ChainParams& p, const DriveConfig& d)
{
    const auto bare = long_wavelength_params(p);
    const double mu = dressed_shear_modulus(p, d);
    if (!(mu > 0.0))
        throw DomainError("dressed_params: dressed shear modulus <= 0 (band inversion), ratio " +
                          std::to_string(mu / bare.mu_r));
    LongWavelengthParams lw = bare;
    lw.mu_r = mu;
    lw.c_t = std::sqrt(mu * p.a / p.mass);
    lw.K = p.mass * p.a * lw.c_t / constants::hbar;
    lw.hbar_eff = hbar_eff_from_K(p, lw.K);
    lw.lambda0_nat = lambda0_nat_from_K(p, lw.K);
    lw.xi_0 = lw.c_t / lw.omega_zz;
    return lw;
}

} // namespace trapfield

#endif
