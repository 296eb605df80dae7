#ifndef TRAPFIELD_CRYSTAL_HPP
#define TRAPFIELD_CRYSTAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "constants.hpp"
#include "errors.hpp"

namespace trapfield {

struct IonSpecies {
    double mass = 0.0; // kg
    int charge = 1;    // units of e

    static IonSpecies from_amu(double mass_amu, int charge = 1)
    {
        return {mass_amu * constants::amu, charge};
    }

    void validate() const
    {
        if (!(mass > 0.0))
            throw DomainError("IonSpecies: mass must be > 0");
        if (charge < 1)
            throw DomainError("IonSpecies: charge must be >= 1");
    }
};

struct TrapConfig {
    double omega_x = 0.0; // rad/s, axial
    double omega_y = 0.0;
    double omega_z = 0.0; // rad/s, transverse branch used for the field
    int n_ions = 1;

    void validate() const
    {
        if (!(omega_x > 0.0 && omega_x < omega_z && omega_z <= omega_y))
            throw DomainError("TrapConfig: need 0 < omega_x < omega_z <= omega_y");
        if (n_ions < 1)
            throw DomainError("TrapConfig: n_ions must be >= 1");
    }
};

struct ChainModel {
    IonSpecies species;
    TrapConfig trap;
    double length_scale_l = 0.0; // m
    Eigen::VectorXd u;           // dimensionless positions x/l
    Eigen::VectorXd positions;   // m
    double bulk_spacing_a = 0.0; // m, minimum gap
    Eigen::MatrixXd kappa_z;     // N/m
    Eigen::MatrixXd kappa_x;     // N/m
    Eigen::MatrixXd beta_z;      // N/m^3
    double max_residual = 0.0;   // dimensionless force residual
    int iterations = 0;

    int size() const { return static_cast<int>(positions.size()); }
};

inline double length_scale(const IonSpecies& sp, const TrapConfig& trap)
{
    sp.validate();
    if (!(trap.omega_x > 0.0))
        throw DomainError("length_scale: omega_x must be > 0");
    return std::cbrt(constants::coulomb_k(sp.charge) / (sp.mass * trap.omega_x * trap.omega_x));
}

// dimensionless force residual F_i = u_i - sum_{j<i} 1/(u_i-u_j)^2 + sum_{j>i} 1/(u_j-u_i)^2
inline Eigen::VectorXd equilibrium_residual(const Eigen::VectorXd& u)
{
    const Eigen::Index n = u.size();
    Eigen::VectorXd f = u;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j)
                continue;
            const double d = u(i) - u(j);
            f(i) -= (d > 0 ? 1.0 : -1.0) / (d * d);
        }
    return f;
}

// Jacobian of the residual: diag 1 + sum 2/|d|^3, offdiag -2/|d|^3
inline Eigen::MatrixXd equilibrium_jacobian(const Eigen::VectorXd& u)
{
    const Eigen::Index n = u.size();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j)
                continue;
            const double d = std::fabs(u(i) - u(j));
            const double c = 2.0 / (d * d * d);
            jac(i, j) -= c;
            jac(i, i) += c;
        }
    return jac;
}

struct EquilibriumResult {
    Eigen::VectorXd u;
    double max_residual = 0.0;
    int iterations = 0;
};

// damped Newton on the force balance, starting from `start` (sorted)
inline EquilibriumResult solve_dimensionless(Eigen::VectorXd u, double tol = 1e-12, int max_iter = 200)
{
    const Eigen::Index n = u.size();
    EquilibriumResult res;
    if (n == 1) {
        res.u = Eigen::VectorXd::Zero(1);
        return res;
    }
    Eigen::VectorXd f = equilibrium_residual(u);
    double fn = f.cwiseAbs().maxCoeff();
    int it = 0;
    while (fn > tol && it < max_iter) {
        ++it;
        const Eigen::VectorXd step = equilibrium_jacobian(u).ldlt().solve(f);
        double damp = 1.0;
        for (int k = 0; k < 40; ++k) {
            Eigen::VectorXd trial = u - damp * step;
            bool ordered = true;
            for (Eigen::Index i = 1; i < n; ++i)
                ordered = ordered && trial(i) > trial(i - 1);
            if (ordered) {
                const Eigen::VectorXd ft = equilibrium_residual(trial);
                const double ftn = ft.cwiseAbs().maxCoeff();
                if (ftn < fn || damp < 1e-6) {
                    u = trial;
                    f = ft;
                    fn = ftn;
                    break;
                }
            }
            damp *= 0.5;
        }
    }
    if (!(fn <= tol))
        throw ConvergenceError("solve_equilibrium: no convergence after " + std::to_string(it) +
                                   " iterations, max residual " + std::to_string(fn),
                               fn);
    res.u = u;
    res.max_residual = fn;
    res.iterations = it;
    return res;
}

inline Eigen::VectorXd initial_guess(int n)
{
    Eigen::VectorXd u(n);
    if (n == 1) {
        u(0) = 0.0;
        return u;
    }
    const double span = std::pow(static_cast<double>(n), 0.66);
    for (int i = 0; i < n; ++i)
        u(i) = span * (-1.0 + 2.0 * i / (n - 1));
    return u;
}

struct Stiffness {
    Eigen::MatrixXd kappa_z, kappa_x, beta_z;
};

inline Stiffness stiffness_matrices(const Eigen::VectorXd& x, const IonSpecies& sp)
{
    const Eigen::Index n = x.size();
    const double kc = constants::coulomb_k(sp.charge);
    Stiffness s{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j)
                continue;
            const double d = std::fabs(x(i) - x(j));
            if (!(d > 0.0))
                throw DomainError("stiffness_matrices: coincident ion positions");
            const double d3 = d * d * d;
            s.kappa_z(i, j) = -kc / d3;
            s.kappa_x(i, j) = 2.0 * kc / d3;
            s.beta_z(i, j) = 9.0 * kc / (d3 * d * d);
        }
    return s;
}

inline Stiffness stiffness_matrices(const ChainModel& c)
{
    return stiffness_matrices(c.positions, c.species);
}

inline ChainModel solve_equilibrium(const IonSpecies& sp, const TrapConfig& trap, double tol = 1e-12,
                                    int max_iter = 200)
{
    sp.validate();
    trap.validate();
    if (!(tol > 0.0))
        throw DomainError("solve_equilibrium: tol must be > 0");
    ChainModel c;
    c.species = sp;
    c.trap = trap;
    c.length_scale_l = length_scale(sp, trap);
    const auto eq = solve_dimensionless(initial_guess(trap.n_ions), tol, max_iter);
    c.u = eq.u;
    c.max_residual = eq.max_residual;
    c.iterations = eq.iterations;
    c.positions = eq.u * c.length_scale_l;
    c.bulk_spacing_a = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < c.positions.size(); ++i)
        c.bulk_spacing_a = std::min(c.bulk_spacing_a, c.positions(i) - c.positions(i - 1));
    auto s = stiffness_matrices(c.positions, sp);
    c.kappa_z = std::move(s.kappa_z);
    c.kappa_x = std::move(s.kappa_x);
    c.beta_z = std::move(s.beta_z);
    return c;
}

} // namespace trapfield

#endif
