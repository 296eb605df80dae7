#ifndef TRAPFIELD_COUPLINGS_HPP
#define TRAPFIELD_COUPLINGS_HPP

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "constants.hpp"
#include "crystal.hpp"
#include "errors.hpp"
#include "modes.hpp"
#include "propagator.hpp"

namespace trapfield {

struct SourceConfig {
    double rabi_L = 0.0;         // Omega_L, rad/s
    double beatnote_omega = 0.0; // Delta omega_L, rad/s
    double k_proj_z = 0.0;       // Delta k_L . e_z, 1/m
    double k_proj_x = 0.0;       // Delta k_L . e_x, 1/m (axial, default off)
    double carrier_rabi = 0.0;   // Omega_0, rad/s

    double transverse_field() const { return constants::hbar * carrier_rabi / 2.0; }
};

enum class Provenance { exact_mode_sum, coarse_grained, renormalized };

inline const char* to_string(Provenance p)
{
    switch (p) {
    case Provenance::exact_mode_sum:
        return "exact-mode-sum";
    case Provenance::coarse_grained:
        return "coarse-grained";
    case Provenance::renormalized:
        return "renormalized";
    }
    return "?";
}

struct IsingCouplings {
    Eigen::MatrixXd j_matrix; // J
    double transverse_field = 0.0;
    Provenance provenance = Provenance::exact_mode_sum;

    int size() const { return static_cast<int>(j_matrix.rows()); }
};

// recoil energy hbar^2 dk^2/(2m)
inline double recoil_energy(double k_proj, double mass)
{
    return constants::hbar * constants::hbar * k_proj * k_proj / (2.0 * mass);
}

// -2 J0^2 G^E_{m_eff}(|x|) cos(k_J.x), natural units
inline double harmonic_coupling_density(int d, double m0, double omega_J, const std::array<double, 3>& k_J,
                                        const std::array<double, 3>& x, double J0)
{
    if (!(omega_J < m0))
        throw ResonanceError("harmonic_coupling_density: source frequency at or above the mass gap");
    const double meff = std::sqrt(m0 * m0 - omega_J * omega_J);
    double r2 = 0.0, kx = 0.0;
    for (int c = 0; c < d; ++c) {
        r2 += x[c] * x[c];
        kx += k_J[c] * x[c];
    }
    return -2.0 * J0 * J0 * euclid_green(d, meff, std::sqrt(r2)) * std::cos(kx);
}

inline IsingCouplings exact_mode_couplings(const ModeSpectrum& s, const ChainModel& c, const SourceConfig& src)
{
    const int n = s.size();
    const double mu2 = src.beatnote_omega * src.beatnote_omega;
    Eigen::VectorXd inv(n);
    for (int k = 0; k < n; ++k) {
        const double w = s.frequencies(k);
        if (std::fabs(src.beatnote_omega - w) <= 1e-6 * w)
            throw ResonanceError("exact_mode_couplings: beat note resonant with mode " + std::to_string(k), k);
        inv(k) = 1.0 / (mu2 - w * w);
    }
    const double pref = src.rabi_L * src.rabi_L * recoil_energy(src.k_proj_z, c.species.mass);
    IsingCouplings out;
    out.j_matrix = pref * s.mode_matrix * inv.asDiagonal() * s.mode_matrix.transpose();
    out.j_matrix.diagonal().setZero();
    if (src.k_proj_x != 0.0)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.j_matrix(i, j) *= std::cos(src.k_proj_x * (c.positions(i) - c.positions(j)));
    out.j_matrix = 0.5 * (out.j_matrix + out.j_matrix.transpose()).eval();
    out.transverse_field = src.transverse_field();
    out.provenance = Provenance::exact_mode_sum;
    return out;
}

// J_eff' = hbar Omega^2 eta_x^2/(omega_x ln2) = Omega^2 E_r/(omega_x^2 ln2)
inline double coarse_coupling_scale(const ChainParams& p, const SourceConfig& src)
{
    return src.rabi_L * src.rabi_L * recoil_energy(src.k_proj_z, p.mass) /
           (p.omega_x * p.omega_x * constants::ln2);
}

struct CoarseOptions {
    bool true_positions = true; // false: x_i = i a
    double j_scale = 1.0;       // multiplicative factor on every J_ij
};

inline IsingCouplings coarse_from_decomposition(const SpectralDecomposition& dec, double jeff,
                                                const Eigen::VectorXd& positions, const SourceConfig& src,
                                                const CoarseOptions& opt)
{
    const Eigen::Index n = positions.size();
    IsingCouplings out;
    out.j_matrix = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const int s = static_cast<int>(j - i);
            const double x = opt.true_positions ? std::fabs(positions(j) - positions(i)) : s * dec.a;
            // sign alternation follows the site index difference
            const double pole = (s % 2 == 0 ? -1.0 : 1.0) * dec.pole_amplitude * std::exp(-x * dec.pole_decay);
            double v = jeff * opt.j_scale * (pole + dec.cut_term(x));
            if (src.k_proj_x != 0.0)
                v *= std::cos(src.k_proj_x * (positions(j) - positions(i)));
            out.j_matrix(i, j) = out.j_matrix(j, i) = v;
        }
    out.transverse_field = src.transverse_field();
    out.provenance = Provenance::coarse_grained;
    return out;
}

inline IsingCouplings coarse_grained_couplings(const ChainParams& p, const SourceConfig& src,
                                               const Eigen::VectorXd& positions, const CoarseOptions& opt = {})
{
    const auto dec = decompose_pole_cut(p, src.beatnote_omega);
    return coarse_from_decomposition(dec, coarse_coupling_scale(p, src), positions, src, opt);
}

// max over modes of hbar Omega eta_n/(hbar |omega_n - dw|), and h_t/(hbar |omega_n - dw|)
inline double validity_margin(const ModeSpectrum& s, const ChainModel& c, const SourceConfig& src)
{
    double worst = 0.0;
    for (int n = 0; n < s.size(); ++n) {
        const double w = s.frequencies(n);
        const double gap = std::fabs(w - src.beatnote_omega);
        const double eta = std::fabs(src.k_proj_z) * std::sqrt(constants::hbar / (2.0 * c.species.mass * w));
        const double g = std::max(std::fabs(src.rabi_L) * eta, std::fabs(src.carrier_rabi) / 2.0);
        if (g == 0.0)
            continue;
        if (gap == 0.0)
            return std::numeric_limits<double>::infinity();
        worst = std::max(worst, g / gap);
    }
    return worst;
}

} // namespace trapfield

#endif
