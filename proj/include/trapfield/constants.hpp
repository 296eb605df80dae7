#ifndef TRAPFIELD_CONSTANTS_HPP
#define TRAPFIELD_CONSTANTS_HPP

#include <numbers>

namespace trapfield::constants {

// CODATA 2018 (exact where the SI fixes them)
inline constexpr double e_charge = 1.602176634e-19;   // C
inline constexpr double eps0 = 8.8541878128e-12;      // F/m
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double amu = 1.66053906660e-27;      // kg

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double ln2 = std::numbers::ln2;
inline constexpr double euler_gamma = std::numbers::egamma;

// e^2/(4 pi eps0) for a charge q in units of e
inline constexpr double coulomb_k(int charge = 1)
{
    const double q = charge * e_charge;
    return q * q / (4.0 * pi * eps0);
}

// non-universal constant of the linearised critical shift
inline constexpr double K_star = 58.98;

} // namespace trapfield::constants

#endif
