#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace trapfield;
using constants::pi;

namespace {

// omega^2(k) from the explicit kappa sum over r = 1..R neighbours on each side
double dispersion_direct(const ChainParams& p, double k, long R = 1000000)
{
    double s = 0.0;
    for (long r = R; r >= 1; --r) {
        const double x = static_cast<double>(r);
        s += (1.0 - std::cos(k * p.a * x)) / (x * x * x);
    }
    const double kappa1 = p.coulomb() / (p.a * p.a * p.a);
    return p.omega_z * p.omega_z - 2.0 * kappa1 / p.mass * s;
}

ChainParams target_params()
{
    return ChainParams::from_chain(fx::yb50_chain(), fx::target_a);
}

} // namespace

TEST(TransverseModes, SingleIon)
{
    const auto c = solve_equilibrium(fx::yb(), fx::yb50_trap(1));
    const auto s = transverse_modes(c);
    ASSERT_EQ(s.size(), 1);
    EXPECT_DOUBLE_EQ(s.frequencies(0), c.trap.omega_z);
}

TEST(TransverseModes, TwoIonsAnalytic)
{
    const auto c = solve_equilibrium(fx::yb(), fx::yb50_trap(2));
    const auto s = transverse_modes(c);
    const double d = c.positions(1) - c.positions(0);
    const double kz = constants::coulomb_k() / (d * d * d);
    const double wz = c.trap.omega_z;
    EXPECT_NEAR(s.frequencies(1) / wz, 1.0, 1e-14);
    EXPECT_NEAR(s.frequencies(0) / std::sqrt(wz * wz - 2.0 * kz / c.species.mass), 1.0, 1e-13);
    const double h = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::fabs(s.mode_matrix(0, 1)), h, 1e-13);
    EXPECT_NEAR(s.mode_matrix(0, 1), s.mode_matrix(1, 1), 1e-12);
    EXPECT_NEAR(s.mode_matrix(0, 0), -s.mode_matrix(1, 0), 1e-12);
}

TEST(TransverseModes, Yb50Invariants)
{
    const auto& s = fx::yb50_modes();
    const int n = s.size();
    const Eigen::MatrixXd I = s.mode_matrix.transpose() * s.mode_matrix;
    EXPECT_LE((I - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    for (int k = 1; k < n; ++k)
        EXPECT_GE(s.frequencies(k), s.frequencies(k - 1));
    EXPECT_GT(s.frequencies(0), 0.0);
    // centre of mass at the top of the band
    EXPECT_NEAR(s.frequencies(n - 1) / fx::yb50_chain().trap.omega_z, 1.0, 1e-9);
}

TEST(TransverseModes, LowestModeNearHomogeneousZigzag)
{
    const double wzz = std::sqrt(zigzag_frequency_sq(fx::yb50_params()));
    EXPECT_NEAR(fx::yb50_modes().frequencies(0) / wzz, 1.0, 0.02);
}

TEST(TransverseModes, ZigzagVectorAlternatesInTheBulk)
{
    const auto& s = fx::yb50_modes();
    for (int i = 15; i < 34; ++i)
        EXPECT_LT(s.mode_matrix(i, 0) * s.mode_matrix(i + 1, 0), 0.0) << i;
}

TEST(TransverseModes, BulkModesFollowDispersion)
{
    const auto& s = fx::yb50_modes();
    const auto p = fx::yb50_params();
    const int n = s.size();
    // standing waves on the full chain length, not the bulk spacing
    const auto& c = fx::yb50_chain();
    const double L = c.positions(n - 1) - c.positions(0) + p.a;
    for (int q = n / 4; q < 3 * n / 4; ++q) {
        // ascending order runs from the zone edge down to k = 0
        const double w = s.frequencies(n - 1 - q);
        const double k = pi * q / L;
        EXPECT_NEAR(w / std::sqrt(dispersion_thermo(p, k)), 1.0, 0.05) << q;
    }
}

TEST(TransverseModes, ZigzagInstabilityReported)
{
    TrapConfig t = fx::yb50_trap();
    t.omega_z = 1.0 * fx::mhz;
    const auto c = solve_equilibrium(fx::yb(), t);
    try {
        transverse_modes(c);
        FAIL() << "expected instability";
    } catch (const InstabilityError& e) {
        EXPECT_LT(e.min_eigenvalue, 0.0);
        EXPECT_GT(e.critical_ratio, 1.0);
    }
}

TEST(Dispersion, Endpoints)
{
    const auto p = fx::yb50_params();
    const double wz2 = p.omega_z * p.omega_z;
    EXPECT_NEAR(dispersion_thermo(p, 0.0) / wz2, 1.0, 1e-15);
    const double wzz2 = wz2 - 3.5 * zeta(3) * p.omega_x * p.omega_x * p.l3_a3();
    EXPECT_NEAR(dispersion_thermo(p, pi / p.a) / wzz2, 1.0, 1e-12);
    EXPECT_NEAR(zigzag_frequency_sq(p) / wzz2, 1.0, 1e-15);
}

TEST(Dispersion, MidZoneAgainstDirectSum)
{
    const auto p = fx::yb50_params();
    const double k = pi / (2.0 * p.a);
    EXPECT_NEAR(dispersion_thermo(p, k) / dispersion_direct(p, k), 1.0, 1e-9);
}

TEST(Dispersion, ReflectionSymmetry)
{
    const auto p = fx::yb50_params();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, constants::two_pi / p.a);
    for (int q = 0; q < 20; ++q) {
        const double k = u(rng);
        EXPECT_NEAR(dispersion_thermo(p, k) / dispersion_thermo(p, constants::two_pi / p.a - k), 1.0, 1e-12);
    }
}

TEST(Dispersion, MonotoneOnHalfZone)
{
    const auto p = fx::yb50_params();
    double prev = dispersion_thermo(p, 0.0);
    for (int q = 1; q <= 400; ++q) {
        const double v = dispersion_thermo(p, pi * q / (400.0 * p.a));
        EXPECT_LT(v, prev) << q;
        prev = v;
    }
}

TEST(LongWavelength, Identities)
{
    const auto p = fx::yb50_params();
    const auto lw = long_wavelength_params(p);
    EXPECT_NEAR(lw.c_t * lw.K / (lw.mu_r * p.a * p.a / constants::hbar), 1.0, 1e-10);
    EXPECT_NEAR(lw.hbar_eff, std::sqrt(p.l3_a3() * constants::ln2) / lw.K, 1e-12 * lw.hbar_eff);
    EXPECT_NEAR(lw.xi_0, lw.c_t / lw.omega_zz, 1e-12 * lw.xi_0);
    EXPECT_NEAR(lw.cutoff, pi / p.a, 1e-12 * lw.cutoff);
}

TEST(LongWavelength, SoundSpeedAtTargetSpacing)
{
    // c_t from raw CODATA numbers
    const double e = 1.602176634e-19, eps0 = 8.8541878128e-12, m = 170.936323 * 1.66053906660e-27;
    const double ct = std::sqrt(e * e / (4 * pi * eps0) * std::log(2.0) / (m * fx::target_a));
    const auto lw = long_wavelength_params(target_params());
    EXPECT_NEAR(lw.c_t / ct, 1.0, 1e-12);
    EXPECT_NEAR(lw.c_t, 11.3, 0.05);
}

TEST(LongWavelength, TargetSpacingReproducesLuttingerParameters)
{
    const auto lw = long_wavelength_params(target_params());
    EXPECT_NEAR(lw.K / 1.3e5, 1.0, 0.05);
    EXPECT_NEAR(lw.hbar_eff / 3.1e-5, 1.0, 0.05);
}

TEST(LongWavelength, ZigzagPhaseRejected)
{
    auto p = fx::yb50_params();
    p.omega_z = 1.0 * fx::mhz;
    EXPECT_THROW(long_wavelength_params(p), InstabilityError);
}
