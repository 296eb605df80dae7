#ifndef TRAPFIELD_DYNAMICS_HPP
#define TRAPFIELD_DYNAMICS_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "constants.hpp"
#include "couplings.hpp"
#include "crystal.hpp"
#include "errors.hpp"
#include "modes.hpp"
#include "propagator.hpp"

namespace trapfield {

using cplx = std::complex<double>;

inline constexpr int kMaxSpins = 12;

// bit i of the basis index is qubit i; bit 0 -> Z=+1 (up), bit 1 -> Z=-1
struct SpinState {
    Eigen::VectorXcd amplitudes;
    int n = 0;

    static SpinState product(const std::vector<Eigen::Vector2cd>& qubits)
    {
        const int n = static_cast<int>(qubits.size());
        if (n > kMaxSpins)
            throw CapacityError("SpinState: at most 12 qubits");
        SpinState s;
        s.n = n;
        s.amplitudes = Eigen::VectorXcd::Ones(Eigen::Index(1) << n);
        for (Eigen::Index b = 0; b < s.amplitudes.size(); ++b)
            for (int q = 0; q < n; ++q)
                s.amplitudes(b) *= qubits[q]((b >> q) & 1);
        return s;
    }

    static SpinState all_plus(int n)
    {
        const double h = 1.0 / std::sqrt(2.0);
        return product(std::vector<Eigen::Vector2cd>(n, Eigen::Vector2cd(h, h)));
    }

    double norm() const { return amplitudes.norm(); }
};

inline double z_value(Eigen::Index basis, int q) { return ((basis >> q) & 1) ? -1.0 : 1.0; }

inline double expect_x(const SpinState& s, int q)
{
    double acc = 0.0;
    const Eigen::Index flip = Eigen::Index(1) << q;
    for (Eigen::Index b = 0; b < s.amplitudes.size(); ++b)
        acc += std::real(std::conj(s.amplitudes(b ^ flip)) * s.amplitudes(b));
    return acc;
}

inline double expect_z(const SpinState& s, int q)
{
    double acc = 0.0;
    for (Eigen::Index b = 0; b < s.amplitudes.size(); ++b)
        acc += z_value(b, q) * std::norm(s.amplitudes(b));
    return acc;
}

inline void apply_x(SpinState& s, int q)
{
    const Eigen::Index flip = Eigen::Index(1) << q;
    for (Eigen::Index b = 0; b < s.amplitudes.size(); ++b)
        if (!(b & flip))
            std::swap(s.amplitudes(b), s.amplitudes(b | flip));
}

// diagonal of 1/2 sum_{i!=j} J_ij Z_i Z_j
inline Eigen::VectorXd ising_diagonal(const Eigen::MatrixXd& J, int n)
{
    Eigen::VectorXd e = Eigen::VectorXd::Zero(Eigen::Index(1) << n);
    for (Eigen::Index b = 0; b < e.size(); ++b)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                e(b) += J(i, j) * z_value(b, i) * z_value(b, j);
    return e;
}

inline Eigen::MatrixXd ising_hamiltonian(const IsingCouplings& c)
{
    const int n = c.size();
    const Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::MatrixXd H = ising_diagonal(c.j_matrix, n).asDiagonal();
    for (Eigen::Index b = 0; b < dim; ++b)
        for (int q = 0; q < n; ++q)
            H(b ^ (Eigen::Index(1) << q), b) -= c.transverse_field;
    return H;
}

inline SpinState evolve_ising(const IsingCouplings& c, const SpinState& s, double t)
{
    const int n = c.size();
    if (n > kMaxSpins)
        throw CapacityError("evolve_ising: at most 12 spins");
    if (s.n != n)
        throw DomainError("evolve_ising: state and couplings differ in size");
    SpinState out = s;
    const double tau = t / constants::hbar;
    if (c.transverse_field == 0.0) {
        const Eigen::VectorXd e = ising_diagonal(c.j_matrix, n);
        for (Eigen::Index b = 0; b < e.size(); ++b)
            out.amplitudes(b) *= std::polar(1.0, -e(b) * tau);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ising_hamiltonian(c));
    const Eigen::MatrixXd& V = es.eigenvectors();
    Eigen::VectorXcd w = V.transpose() * s.amplitudes;
    for (Eigen::Index k = 0; k < w.size(); ++k)
        w(k) *= std::polar(1.0, -es.eigenvalues()(k) * tau);
    out.amplitudes = V * w;
    return out;
}

inline SpinState echo_initial_state(int n, int i, int j)
{
    const double h = 1.0 / std::sqrt(2.0);
    std::vector<Eigen::Vector2cd> q(n, Eigen::Vector2cd(1.0, 0.0));
    q[i] = q[j] = Eigen::Vector2cd(h, h);
    return SpinState::product(q);
}

// U(t,t/2) X_i X_j U(t/2,0) on |+_i +_j>, rest up; returns <X_i>
inline double spin_echo_signal(const IsingCouplings& c, int i, int j, double t)
{
    if (c.transverse_field != 0.0)
        throw DomainError("spin_echo_signal: requires h_t = 0 in the echo window");
    SpinState s = echo_initial_state(c.size(), i, j);
    s = evolve_ising(c, s, 0.5 * t);
    apply_x(s, i);
    apply_x(s, j);
    s = evolve_ising(c, s, 0.5 * t);
    return expect_x(s, i);
}

inline double spin_echo_analytic(double J, double t) { return std::cos(2.0 * J * t / constants::hbar); }

// ---- impulsive protocol ----

struct ImpulsiveSource {
    int site = 0;
    double time = 0.0;     // s
    double strength = 0.0; // 1/m
};

inline cplx impulsive_generating_functional(const ModeSpectrum& s, const ChainModel& c,
                                            const std::vector<ImpulsiveSource>& src)
{
    cplx q = 0.0;
    for (const auto& a : src)
        for (const auto& b : src)
            q += a.strength * b.strength * feynman_lattice(s, c.species.mass, a.time - b.time, a.site, b.site);
    return std::exp(-0.5 * q);
}

inline std::pair<double, double> parity_signals(const ModeSpectrum& s, const ChainModel& c,
                                                const std::vector<ImpulsiveSource>& src, double phase)
{
    const cplx z = impulsive_generating_functional(s, c, src) * std::polar(1.0, phase);
    return {z.real(), z.imag()};
}

// four parity experiments -> Delta(t1 - t2, x_i - x_j)
inline cplx reconstruct_propagator(const ModeSpectrum& s, const ChainModel& c, int i, int j, double t1, double t2,
                                   double strength, double phase = 0.0)
{
    const ImpulsiveSource a{i, t1, strength}, b{j, t2, strength};
    auto measure = [&](const std::vector<ImpulsiveSource>& src) {
        const auto [p1, p2] = parity_signals(s, c, src, phase);
        return cplx(p1, p2) * std::polar(1.0, -phase);
    };
    const cplx zab = measure({a, b});
    const cplx za = measure({a});
    const cplx zb = measure({b});
    const cplx z0 = measure({});
    return -std::log(zab * z0 / (za * zb)) / (strength * strength);
}

// ---- spin-boson oracle ----

struct OracleConfig {
    int n_ions = 2;
    int fock_cutoff = 6; // max phonon number per mode
    double dt = 0.0;     // s; 0 -> 1/(50 max(omega_n, dw))
    double t_max = 0.0;  // s
    int samples = 16;    // sample times t_k = k t_max/samples, k = 1..samples
    bool echo = true;
    int probe_i = 0;
    int probe_j = 1;
    bool check_convergence = true;
};

struct OracleResult {
    std::vector<double> times;
    std::vector<double> x_i;
    double dt = 0.0;
    double fock_change = 0.0; // |<X>| change on doubling the cutoff (last sample)
    double step_change = 0.0; // |<X>| change on halving dt (last sample)
    bool converged = false;
    double max_norm_error = 0.0;
};

namespace detail {

// branch-resolved state: one bosonic wavefunction per spin configuration
class SpinBoson {
public:
    SpinBoson(const ModeSpectrum& s, const ChainModel& c, const SourceConfig& src, int cutoff)
        : n_(s.size()), cut_(cutoff), mu_(src.beatnote_omega)
    {
        if (n_ > 3)
            throw CapacityError("spin_boson_oracle: at most 3 ions");
        if (cutoff < 1 || cutoff > 24)
            throw DomainError("spin_boson_oracle: fock cutoff must be in [1, 24]");
        dimb_ = 1;
        stride_.resize(n_);
        for (int m = 0; m < n_; ++m) {
            stride_[m] = dimb_;
            dimb_ *= (cut_ + 1);
        }
        occ_.assign(dimb_ * n_, 0);
        diag_ = Eigen::VectorXd::Zero(dimb_);
        for (int k = 0; k < dimb_; ++k)
            for (int m = 0; m < n_; ++m) {
                const int o = (k / stride_[m]) % (cut_ + 1);
                occ_[k * n_ + m] = o;
                diag_(k) += s.frequencies(m) * o;
            }
        mdiag_ = (-cplx(0, 1)) * diag_.cast<cplx>();
        const int nb = 1 << n_;
        // c_{b,m}: Omega eta_m sum_i M_im z_i (rad/s)
        coup_ = Eigen::MatrixXd::Zero(nb, n_);
        for (int b = 0; b < nb; ++b)
            for (int m = 0; m < n_; ++m) {
                const double eta =
                    src.k_proj_z * std::sqrt(constants::hbar / (2.0 * c.species.mass * s.frequencies(m)));
                double zsum = 0.0;
                for (int i = 0; i < n_; ++i)
                    zsum += s.mode_matrix(i, m) * z_value(b, i);
                coup_(b, m) = src.rabi_L * eta * zsum;
            }
    }

    int branches() const { return 1 << n_; }
    int boson_dim() const { return dimb_; }

    // out = -i H_b(t) in
    void apply(int b, double t, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const
    {
        const double f = std::sin(mu_ * t);
        out.noalias() = mdiag_.cwiseProduct(in);
        for (int m = 0; m < n_; ++m) {
            const cplx g = -cplx(0, 1) * (coup_(b, m) * f);
            if (g == 0.0)
                continue;
            const int st = stride_[m];
            for (int k = 0; k < dimb_; ++k) {
                const int o = occ_[k * n_ + m];
                if (o > 0) {
                    // a|o> = sqrt(o)|o-1>, and the adjoint
                    const double r = std::sqrt(static_cast<double>(o));
                    out(k - st) += g * r * in(k);
                    out(k) += g * r * in(k - st);
                }
            }
        }
    }

    void step(std::vector<Eigen::VectorXcd>& psi, double t, double h) const
    {
        for (int b = 0; b < branches(); ++b) {
            if (psi[b].size() == 0)
                continue;
            Eigen::VectorXcd& y = psi[b];
            apply(b, t, y, k1_);
            tmp_ = y + 0.5 * h * k1_;
            apply(b, t + 0.5 * h, tmp_, k2_);
            tmp_ = y + 0.5 * h * k2_;
            apply(b, t + 0.5 * h, tmp_, k3_);
            tmp_ = y + h * k3_;
            apply(b, t + h, tmp_, k4_);
            y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
        }
    }

    void evolve(std::vector<Eigen::VectorXcd>& psi, double t0, double t1, double dt) const
    {
        if (t1 <= t0)
            return;
        const long nsteps = static_cast<long>(std::ceil((t1 - t0) / dt));
        const double h = (t1 - t0) / nsteps;
        for (long k = 0; k < nsteps; ++k)
            step(psi, t0 + k * h, h);
    }

private:
    int n_, cut_;
    double mu_;
    int dimb_ = 1;
    std::vector<int> stride_;
    std::vector<int> occ_;
    Eigen::VectorXd diag_;
    Eigen::VectorXcd mdiag_;
    Eigen::MatrixXd coup_;
    mutable Eigen::VectorXcd k1_, k2_, k3_, k4_, tmp_;
};

inline std::vector<Eigen::VectorXcd> oracle_initial(const SpinBoson& sb, const SpinState& spins)
{
    std::vector<Eigen::VectorXcd> psi(sb.branches());
    for (int b = 0; b < sb.branches(); ++b) {
        psi[b] = Eigen::VectorXcd::Zero(sb.boson_dim());
        psi[b](0) = spins.amplitudes(b);
    }
    return psi;
}

inline double oracle_expect_x(const std::vector<Eigen::VectorXcd>& psi, int q)
{
    double acc = 0.0;
    for (int b = 0; b < static_cast<int>(psi.size()); ++b)
        acc += std::real(psi[b ^ (1 << q)].dot(psi[b]));
    return acc;
}

inline double oracle_norm(const std::vector<Eigen::VectorXcd>& psi)
{
    double acc = 0.0;
    for (const auto& v : psi)
        acc += v.squaredNorm();
    return std::sqrt(acc);
}

inline void oracle_flip(std::vector<Eigen::VectorXcd>& psi, int q)
{
    for (int b = 0; b < static_cast<int>(psi.size()); ++b)
        if (!(b & (1 << q)))
            std::swap(psi[b], psi[b | (1 << q)]);
}

// <X_i> at a single time, with or without the echo sandwich
inline double oracle_sample(const SpinBoson& sb, const SpinState& init, const OracleConfig& cfg, double t,
                            double dt, double* norm_err = nullptr)
{
    auto psi = oracle_initial(sb, init);
    if (cfg.echo) {
        sb.evolve(psi, 0.0, 0.5 * t, dt);
        oracle_flip(psi, cfg.probe_i);
        oracle_flip(psi, cfg.probe_j);
        sb.evolve(psi, 0.5 * t, t, dt);
    } else {
        sb.evolve(psi, 0.0, t, dt);
    }
    if (norm_err)
        *norm_err = std::fabs(oracle_norm(psi) - 1.0);
    return oracle_expect_x(psi, cfg.probe_i);
}

} // namespace detail

inline double oracle_default_dt(const ModeSpectrum& s, const SourceConfig& src)
{
    const double wmax = std::max(s.frequencies.maxCoeff(), std::fabs(src.beatnote_omega));
    return 1.0 / (50.0 * wmax);
}

inline OracleResult spin_boson_oracle(const OracleConfig& cfg, const ChainModel& c, const ModeSpectrum& s,
                                      const SourceConfig& src)
{
    if (cfg.n_ions != s.size() || cfg.n_ions != c.size())
        throw DomainError("spin_boson_oracle: n_ions does not match the chain");
    if (cfg.samples < 2 || !(cfg.t_max > 0.0))
        throw DomainError("spin_boson_oracle: need samples >= 2 and t_max > 0");
    OracleResult res;
    res.dt = cfg.dt > 0.0 ? cfg.dt : oracle_default_dt(s, src);
    const SpinState init = echo_initial_state(cfg.n_ions, cfg.probe_i, cfg.probe_j);
    const detail::SpinBoson sb(s, c, src, cfg.fock_cutoff);

    for (int k = 0; k <= cfg.samples; ++k)
        res.times.push_back(cfg.t_max * k / cfg.samples);
    if (cfg.echo) {
        for (double t : res.times) {
            double ne = 0.0;
            res.x_i.push_back(detail::oracle_sample(sb, init, cfg, t, res.dt, &ne));
            res.max_norm_error = std::max(res.max_norm_error, ne);
        }
    } else {
        auto psi = detail::oracle_initial(sb, init);
        res.x_i.push_back(detail::oracle_expect_x(psi, cfg.probe_i));
        for (int k = 1; k <= cfg.samples; ++k) {
            sb.evolve(psi, res.times[k - 1], res.times[k], res.dt);
            res.x_i.push_back(detail::oracle_expect_x(psi, cfg.probe_i));
            res.max_norm_error = std::max(res.max_norm_error, std::fabs(detail::oracle_norm(psi) - 1.0));
        }
    }
    res.converged = true;
    if (cfg.check_convergence) {
        const double t = res.times.back();
        const detail::SpinBoson big(s, c, src, 2 * cfg.fock_cutoff);
        const double x_big = detail::oracle_sample(big, init, cfg, t, res.dt);
        const double x_half = detail::oracle_sample(sb, init, cfg, t, 0.5 * res.dt);
        res.fock_change = std::fabs(x_big - res.x_i.back());
        res.step_change = std::fabs(x_half - res.x_i.back());
        if (res.fock_change > 1e-4)
            throw ConvergenceError("spin_boson_oracle: Fock truncation not converged, change " +
                                       std::to_string(res.fock_change),
                                   res.fock_change);
        res.converged = res.step_change <= 1e-4;
    }
    return res;
}

// ---- fitting ----

struct CosineFit {
    double omega = 0.0; // rad/s
    double amplitude = 0.0;
    double offset = 0.0;
    double rms_residual = 0.0;
};

namespace detail {

inline CosineFit cosine_ls(const std::vector<double>& t, const std::vector<double>& y, double w)
{
    // y ~ A cos(w t) + B, linear in (A, B)
    double scc = 0, sc = 0, s1 = 0, syc = 0, sy = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double c = std::cos(w * t[k]);
        scc += c * c;
        sc += c;
        s1 += 1.0;
        syc += y[k] * c;
        sy += y[k];
    }
    const double det = scc * s1 - sc * sc;
    CosineFit f;
    f.omega = w;
    if (std::fabs(det) < 1e-300)
        return f;
    f.amplitude = (syc * s1 - sc * sy) / det;
    f.offset = (scc * sy - sc * syc) / det;
    double r = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double e = y[k] - f.amplitude * std::cos(w * t[k]) - f.offset;
        r += e * e;
    }
    f.rms_residual = std::sqrt(r / t.size());
    return f;
}

} // namespace detail

// least-squares frequency of y(t) ~ A cos(w t) + B; grid scan then Brent refinement
inline CosineFit fit_cosine_frequency(const std::vector<double>& t, const std::vector<double>& y)
{
    if (t.size() < 4 || t.size() != y.size())
        throw DomainError("fit_cosine_frequency: need >= 4 samples");
    const double span = t.back() - t.front();
    const double wmax = constants::pi * (t.size() - 1) / span;
    const int grid = 4000;
    double best_w = 0.0, best_r = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= grid; ++k) {
        const double w = wmax * k / grid;
        const auto f = detail::cosine_ls(t, y, w);
        if (f.amplitude > 0.0 && f.rms_residual < best_r) {
            best_r = f.rms_residual;
            best_w = w;
        }
    }
    const double dw = wmax / grid;
    auto obj = [&](double w) { return detail::cosine_ls(t, y, w).rms_residual; };
    const auto r = boost::math::tools::brent_find_minima(obj, std::max(best_w - dw, 1e-300), best_w + dw, 52);
    return detail::cosine_ls(t, y, r.first);
}

} // namespace trapfield

#endif
