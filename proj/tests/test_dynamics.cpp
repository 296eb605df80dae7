#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace trapfield;
using constants::hbar;
using constants::pi;

namespace {

IsingCouplings random_couplings(int n, std::mt19937_64& rng, double h_t = 0.0)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    IsingCouplings c;
    c.j_matrix = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            c.j_matrix(i, j) = c.j_matrix(j, i) = 1e-30 * u(rng);
    c.transverse_field = h_t;
    return c;
}

SpinState random_state(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    SpinState s;
    s.n = n;
    s.amplitudes.resize(Eigen::Index(1) << n);
    for (Eigen::Index b = 0; b < s.amplitudes.size(); ++b)
        s.amplitudes(b) = cplx(g(rng), g(rng));
    s.amplitudes.normalize();
    return s;
}

// 1/2 sum J Z Z built from Kronecker products (qubit 0 is the least significant factor)
Eigen::VectorXd kron_ising_diagonal(const Eigen::MatrixXd& J, int n)
{
    const Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Eigen::VectorXd term = Eigen::VectorXd::Ones(1);
            for (int q = n - 1; q >= 0; --q) {
                Eigen::Vector2d f(1.0, (q == i || q == j) ? -1.0 : 1.0);
                Eigen::VectorXd next(term.size() * 2);
                for (Eigen::Index a = 0; a < term.size(); ++a)
                    next.segment(2 * a, 2) = term(a) * f;
                term = next;
            }
            e += J(i, j) * term;
        }
    return e;
}

IsingCouplings pair_coupling(double J)
{
    IsingCouplings c;
    c.j_matrix = Eigen::MatrixXd::Zero(2, 2);
    c.j_matrix(0, 1) = c.j_matrix(1, 0) = J;
    return c;
}

} // namespace

TEST(EvolveIsing, ZeroHamiltonianIsIdentity)
{
    std::mt19937_64 rng(1);
    const auto s = random_state(3, rng);
    IsingCouplings c;
    c.j_matrix = Eigen::MatrixXd::Zero(3, 3);
    const auto out = evolve_ising(c, s, 1e-3);
    EXPECT_LE((out.amplitudes - s.amplitudes).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EvolveIsing, CommutingPhasesExact)
{
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 5; ++rep) {
        const auto c = random_couplings(4, rng);
        const auto s = random_state(4, rng);
        const double t = 1e-4 * (rep + 1);
        const auto out = evolve_ising(c, s, t);
        const auto e = kron_ising_diagonal(c.j_matrix, 4);
        for (Eigen::Index b = 0; b < 16; ++b)
            EXPECT_LE(std::abs(out.amplitudes(b) - s.amplitudes(b) * std::polar(1.0, -e(b) * t / hbar)), 1e-12);
    }
}

TEST(EvolveIsing, NormPreserved)
{
    std::mt19937_64 rng(3);
    for (double h : {0.0, 3e-31}) {
        const auto c = random_couplings(6, rng, h);
        const auto s = random_state(6, rng);
        EXPECT_NEAR(evolve_ising(c, s, 2e-3).norm(), 1.0, 1e-10);
    }
}

TEST(EvolveIsing, GlobalFlipSymmetry)
{
    std::mt19937_64 rng(4);
    const auto c = random_couplings(5, rng, 4e-31);
    const auto s0 = SpinState::all_plus(5);
    for (double t : {1e-4, 7e-4, 3e-3}) {
        const auto s = evolve_ising(c, s0, t);
        for (int q = 0; q < 5; ++q)
            EXPECT_NEAR(expect_z(s, q), 0.0, 1e-10);
    }
}

TEST(EvolveIsing, CapacityLimit)
{
    IsingCouplings c;
    c.j_matrix = Eigen::MatrixXd::Zero(13, 13);
    SpinState s;
    s.n = 13;
    EXPECT_THROW(evolve_ising(c, s, 1.0), CapacityError);
    EXPECT_THROW(SpinState::all_plus(13), CapacityError);
}

TEST(SpinEcho, TwoSpinCosine)
{
    const double J = 2e-31;
    const auto c = pair_coupling(J);
    EXPECT_DOUBLE_EQ(spin_echo_signal(c, 0, 1, 0.0), 1.0);
    EXPECT_NEAR(spin_echo_signal(c, 0, 1, pi * hbar / (2 * J)), -1.0, 1e-12);
    for (double t : {1e-4, 3.3e-4, 1e-3}) {
        EXPECT_NEAR(spin_echo_signal(c, 0, 1, t), std::cos(2 * J * t / hbar), 1e-12);
        // without the echo the observable is the same
        const auto s = evolve_ising(c, SpinState::all_plus(2), t);
        EXPECT_NEAR(expect_x(s, 0), spin_echo_signal(c, 0, 1, t), 1e-12);
    }
}

TEST(SpinEcho, ThreeSpinsPairwisePhases)
{
    const double J = 1.5e-31;
    IsingCouplings c;
    c.j_matrix = Eigen::MatrixXd::Constant(3, 3, J);
    c.j_matrix.diagonal().setZero();
    for (double t : {2e-4, 9e-4}) {
        const double cj = std::cos(2 * J * t / hbar);
        // plain evolution of |+++>: one cosine per partner
        EXPECT_NEAR(expect_x(evolve_ising(c, SpinState::all_plus(3), t), 0), cj * cj, 1e-12);
        // echo on (0, 1) with spin 2 up isolates J_01
        EXPECT_NEAR(spin_echo_signal(c, 0, 1, t), cj, 1e-12);
    }
}

TEST(SpinEcho, RequiresZeroTransverseField)
{
    auto c = pair_coupling(1e-31);
    c.transverse_field = 1e-32;
    EXPECT_THROW(spin_echo_signal(c, 0, 1, 1e-3), DomainError);
}

TEST(SpinEcho, FitRecoversCoupling)
{
    const double J = 3.1e-31;
    const auto c = pair_coupling(J);
    const double period = pi * hbar / J;
    std::vector<double> t, y;
    for (int k = 0; k < 200; ++k) {
        t.push_back(2 * period * k / 199);
        y.push_back(spin_echo_signal(c, 0, 1, t.back()));
    }
    const auto f = fit_cosine_frequency(t, y);
    EXPECT_NEAR(hbar * f.omega / 2 / J, 1.0, 1e-6);
}

TEST(Impulsive, EmptyAndSingleSource)
{
    const auto& c = fx::yb50_chain();
    const auto& s = fx::yb50_modes();
    EXPECT_EQ(impulsive_generating_functional(s, c, {}), cplx(1.0, 0.0));
    const double g = 3e7;
    const auto z = impulsive_generating_functional(s, c, {{10, 1e-6, g}});
    const auto d00 = feynman_lattice(s, c.species.mass, 0.0, 10, 10);
    EXPECT_NEAR(std::abs(z - std::exp(-0.5 * g * g * d00)), 0.0, 1e-15);
}

TEST(Impulsive, DelayedPairDoubleSum)
{
    const auto& c = fx::yb50_chain();
    const auto& s = fx::yb50_modes();
    const double g = 2e7, tau = 4e-7;
    const auto z = impulsive_generating_functional(s, c, {{7, 0.0, g}, {7, tau, g}});
    const double m = c.species.mass;
    const auto q = g * g * (feynman_lattice(s, m, 0.0, 7, 7) + feynman_lattice(s, m, tau, 7, 7));
    EXPECT_NEAR(std::abs(z - std::exp(-q)), 0.0, 1e-14);
}

TEST(Impulsive, ParitySignals)
{
    const auto& c = fx::yb50_chain();
    const auto& s = fx::yb50_modes();
    auto [p1, p2] = parity_signals(s, c, {}, 0.0);
    EXPECT_DOUBLE_EQ(p1, 1.0);
    EXPECT_DOUBLE_EQ(p2, 0.0);
    std::tie(p1, p2) = parity_signals(s, c, {}, pi / 2);
    EXPECT_NEAR(p1, 0.0, 1e-16);
    EXPECT_NEAR(p2, 1.0, 1e-16);
    const std::vector<ImpulsiveSource> src{{3, 0.0, 3e7}, {20, 2e-7, -1e7}, {41, 5e-7, 2e7}};
    const double phi = 0.37;
    std::tie(p1, p2) = parity_signals(s, c, src, phi);
    const auto z = impulsive_generating_functional(s, c, src) * std::polar(1.0, phi);
    EXPECT_NEAR(p1, z.real(), 1e-14);
    EXPECT_NEAR(p2, z.imag(), 1e-14);
    EXPECT_NEAR(p1 * p1 + p2 * p2, std::norm(z), 1e-14);
}

TEST(Impulsive, ReconstructionIsExact)
{
    const auto& c = fx::yb50_chain();
    const auto& s = fx::yb50_modes();
    const double m = c.species.mass;
    const int tuples[3][2] = {{24, 26}, {10, 10}, {5, 40}};
    const double taus[3] = {3e-7, 0.0, -1.1e-6};
    for (int k = 0; k < 3; ++k) {
        const int i = tuples[k][0], j = tuples[k][1];
        const auto rec = reconstruct_propagator(s, c, i, j, taus[k], 0.0, 3e8);
        const auto dir = feynman_lattice(s, m, taus[k], i, j);
        EXPECT_LE(std::abs(rec - dir) / std::abs(dir), 1e-10) << k;
    }
    // i = j at equal times gives the equal-time kernel
    const auto eq = reconstruct_propagator(s, c, 12, 12, 0.0, 0.0, 3e7, 0.8);
    EXPECT_LE(std::abs(eq - feynman_lattice(s, m, 0.0, 12, 12)) / std::abs(eq), 1e-10);
    // time reversal through the reconstruction
    const auto fw = reconstruct_propagator(s, c, 3, 9, 5e-7, 0.0, 3e7);
    const auto bw = reconstruct_propagator(s, c, 3, 9, 0.0, 5e-7, 3e7);
    EXPECT_LE(std::abs(fw - bw) / std::abs(fw), 1e-10);
}

TEST(Impulsive, GeneratingFunctionalBounded)
{
    const auto& c = fx::yb50_chain();
    const auto& s = fx::yb50_modes();
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> site(0, 49), count(1, 6);
    std::uniform_real_distribution<double> t(-2e-6, 2e-6), g(-1e8, 1e8);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<ImpulsiveSource> src;
        for (int k = count(rng); k > 0; --k)
            src.push_back({site(rng), t(rng), g(rng)});
        EXPECT_LE(std::abs(impulsive_generating_functional(s, c, src)), 1.0 + 1e-15);
    }
}

TEST(Oracle, NoDriveNoDynamics)
{
    auto o = fx::oracle_point();
    o.source.rabi_L = 0.0;
    OracleConfig cfg;
    cfg.t_max = 2e-5;
    cfg.samples = 4;
    const auto r = spin_boson_oracle(cfg, o.chain, o.spectrum, o.source);
    for (double x : r.x_i)
        EXPECT_NEAR(x, 1.0, 1e-12);
    EXPECT_EQ(r.times.size(), 5u);
}

TEST(Oracle, NormAndTruncationOnShortRun)
{
    const auto o = fx::oracle_point();
    OracleConfig cfg;
    cfg.t_max = 2e-4;
    cfg.samples = 3;
    const auto r = spin_boson_oracle(cfg, o.chain, o.spectrum, o.source);
    EXPECT_LE(r.max_norm_error, 1e-10);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.fock_change, 1e-4);
    // echo and plain paths agree while the coupling is static
    cfg.echo = false;
    cfg.check_convergence = false;
    const auto plain = spin_boson_oracle(cfg, o.chain, o.spectrum, o.source);
    EXPECT_NEAR(plain.x_i.back(), r.x_i.back(), 5e-3);
}

TEST(Oracle, Preconditions)
{
    const auto o = fx::oracle_point();
    OracleConfig cfg;
    cfg.t_max = 0.0;
    EXPECT_THROW(spin_boson_oracle(cfg, o.chain, o.spectrum, o.source), DomainError);
    cfg.t_max = 1e-5;
    cfg.n_ions = 3;
    EXPECT_THROW(spin_boson_oracle(cfg, o.chain, o.spectrum, o.source), DomainError);
    const auto c4 = solve_equilibrium(fx::yb(), TrapConfig{1.0 * fx::mhz, 5 * fx::mhz, 4 * fx::mhz, 4});
    const auto s4 = transverse_modes(c4);
    cfg.n_ions = 4;
    EXPECT_THROW(spin_boson_oracle(cfg, c4, s4, o.source), CapacityError);
}

TEST(Oracle, TruncationFailureReported)
{
    // a strong force displaces the modes far beyond one phonon
    const auto o = fx::oracle_point(100.0, 3.0);
    OracleConfig cfg;
    cfg.fock_cutoff = 1;
    cfg.t_max = 2e-5;
    cfg.samples = 2;
    EXPECT_THROW(spin_boson_oracle(cfg, o.chain, o.spectrum, o.source), ConvergenceError);
}

TEST(Oracle, CrossDetuningPeriodRatio)
{
    // same Rabi frequency, two beat notes: period ratio follows the coupling ratio
    const auto near = fx::oracle_point(100.0, 0.05);
    const auto far = fx::oracle_point(200.0, 0.0, near.source.rabi_L);
    double j[2], jfit[2];
    int k = 0;
    for (const auto* o : {&near, &far}) {
        const auto J = exact_mode_couplings(o->spectrum, o->chain, o->source);
        j[k] = std::fabs(J.j_matrix(0, 1));
        OracleConfig cfg;
        cfg.samples = 6;
        cfg.t_max = pi * hbar / (2 * j[k]);
        cfg.check_convergence = false;
        const auto r = spin_boson_oracle(cfg, o->chain, o->spectrum, o->source);
        jfit[k] = hbar * fit_cosine_frequency(r.times, r.x_i).omega / 2;
        ++k;
    }
    EXPECT_LT(j[1], j[0]);
    EXPECT_NEAR((jfit[0] / jfit[1]) / (j[0] / j[1]), 1.0, 0.10);
}
