#ifndef TRAPFIELD_MODES_HPP
#define TRAPFIELD_MODES_HPP

#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "constants.hpp"
#include "crystal.hpp"
#include "errors.hpp"
#include "specfun.hpp"

namespace trapfield {

struct ModeSpectrum {
    Eigen::VectorXd frequencies; // rad/s, ascending
    Eigen::MatrixXd mode_matrix; // columns are modes

    int size() const { return static_cast<int>(frequencies.size()); }
};

// parameters of the homogeneous chain used by the thermodynamic-limit formulas
struct ChainParams {
    double omega_x = 0.0; // rad/s
    double omega_z = 0.0; // rad/s
    double ell = 0.0;     // m
    double a = 0.0;       // m
    double mass = 0.0;    // kg
    int charge = 1;

    double l3_a3() const { return (ell / a) * (ell / a) * (ell / a); }
    double coulomb() const { return constants::coulomb_k(charge); }

    static ChainParams from_chain(const ChainModel& c, std::optional<double> a_override = {})
    {
        ChainParams p;
        p.omega_x = c.trap.omega_x;
        p.omega_z = c.trap.omega_z;
        p.ell = c.length_scale_l;
        p.a = a_override ? *a_override : c.bulk_spacing_a;
        p.mass = c.species.mass;
        p.charge = c.species.charge;
        return p;
    }
};

// (omega_x/omega_z)(l/a)^{3/2} sqrt(7 zeta(3)/2): reaches 1 at the zigzag transition
inline double zigzag_critical_ratio(const ChainParams& p)
{
    return (p.omega_x / p.omega_z) * std::pow(p.ell / p.a, 1.5) * std::sqrt(3.5 * zeta(3));
}

inline ModeSpectrum transverse_modes(const ChainModel& c)
{
    const Eigen::Index n = c.size();
    const double m = c.species.mass;
    const double wz2 = c.trap.omega_z * c.trap.omega_z;
    Eigen::MatrixXd A = -c.kappa_z / m;
    for (Eigen::Index i = 0; i < n; ++i)
        A(i, i) = wz2 + c.kappa_z.row(i).sum() / m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("transverse_modes: eigensolver failed", 0.0);
    const Eigen::VectorXd ev = es.eigenvalues();
    if (ev(0) <= 0.0) {
        double ratio = std::nan("");
        if (n > 1)
            ratio = zigzag_critical_ratio(ChainParams::from_chain(c));
        std::ostringstream os;
        os << "transverse_modes: zigzag instability, eigenvalue " << ev(0) << " rad^2/s^2, critical ratio "
           << ratio;
        throw InstabilityError(os.str(), ev(0), ratio);
    }
    ModeSpectrum s;
    s.frequencies = ev.array().sqrt();
    s.mode_matrix = es.eigenvectors();
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index imax = 0;
        s.mode_matrix.col(k).cwiseAbs().maxCoeff(&imax);
        if (s.mode_matrix(imax, k) < 0.0)
            s.mode_matrix.col(k) *= -1.0;
    }
    return s;
}

// omega^2(k) of the homogeneous chain (rad^2/s^2)
inline double dispersion_thermo(const ChainParams& p, double k)
{
    const double th = std::remainder(k * p.a, constants::two_pi);
    return p.omega_z * p.omega_z -
           p.omega_x * p.omega_x * p.l3_a3() * (2.0 * zeta(3) - 2.0 * polylog3_circle(th));
}

inline double zigzag_frequency_sq(const ChainParams& p)
{
    return p.omega_z * p.omega_z - 3.5 * zeta(3) * p.omega_x * p.omega_x * p.l3_a3();
}

struct LongWavelengthParams {
    double c_t = 0.0;         // m/s
    double xi_0 = 0.0;        // m
    double omega_zz = 0.0;    // rad/s
    double mu_r = 0.0;        // N
    double K = 0.0;           // Tomonaga-Luttinger
    double hbar_eff = 0.0;    // dimensionless
    double lambda0_nat = 0.0; // 1/m^2
    double cutoff = 0.0;      // 1/m
};

inline double hbar_eff_from_K(const ChainParams& p, double K)
{
    return std::sqrt(p.l3_a3() * constants::ln2) / K;
}

inline double lambda0_nat_from_K(const ChainParams& p, double K)
{
    return 279.0 * zeta(5) / (2.0 * constants::ln2) / (p.a * p.a * K);
}

inline LongWavelengthParams long_wavelength_params(const ChainParams& p)
{
    const double wzz2 = zigzag_frequency_sq(p);
    if (wzz2 <= 0.0)
        throw InstabilityError("long_wavelength_params: omega_zz^2 <= 0 (zigzag phase)", wzz2,
                               zigzag_critical_ratio(p));
    LongWavelengthParams lw;
    lw.c_t = std::sqrt(p.coulomb() * constants::ln2 / (p.mass * p.a));
    lw.omega_zz = std::sqrt(wzz2);
    lw.xi_0 = lw.c_t / lw.omega_zz;
    lw.mu_r = p.mass * p.omega_x * p.omega_x * p.a * p.l3_a3() * constants::ln2;
    lw.K = p.mass * p.a * lw.c_t / constants::hbar;
    lw.hbar_eff = hbar_eff_from_K(p, lw.K);
    lw.lambda0_nat = lambda0_nat_from_K(p, lw.K);
    lw.cutoff = constants::pi / p.a;
    return lw;
}

} // namespace trapfield

#endif
