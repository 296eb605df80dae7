#ifndef TRAPFIELD_RENORM_HPP
#define TRAPFIELD_RENORM_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "couplings.hpp"
#include "errors.hpp"
#include "modes.hpp"
#include "propagator.hpp"
#include "specfun.hpp"

namespace trapfield {

struct RGState {
    double m0_sq = 0.0;   // 1/m^2
    double lambda0 = 0.0; // 1/m^2
    double cutoff = 1.0;  // 1/m
    double flow_time = 0.0;
};

struct SelfEnergyParts {
    double tadpole1 = 0.0;
    double tadpole2 = 0.0;
    double sunrise = 0.0;
};

struct RenormalizedParams {
    double m_r_sq = 0.0;
    double z = 1.0;
    double lambda_r = 0.0;
    double J_scale = 1.0;
    double vertex = 0.0;
    double dsigma_dk2 = 0.0;
    SelfEnergyParts sigma_parts;
};

namespace detail {

inline void require_positive_mass(double m_sq, const char* who)
{
    if (!(m_sq > 0.0))
        throw DomainError(std::string(who) + ": m^2 must be > 0");
}

// int d^2k/(2pi)^2 (k^2+m^2)^{-1} over |k| <= L
inline double loop_I1(double m_sq, double cutoff)
{
    return std::log1p(cutoff * cutoff / m_sq) / (4.0 * constants::pi);
}

// int d^2k/(2pi)^2 (k^2+m^2)^{-2} over |k| <= L
inline double loop_I2(double m_sq, double cutoff)
{
    const double L2 = cutoff * cutoff;
    return L2 / (m_sq * (L2 + m_sq)) / (4.0 * constants::pi);
}

} // namespace detail

inline double tadpole1(double m_sq, double lambda, double cutoff)
{
    detail::require_positive_mass(m_sq, "tadpole1");
    return 0.5 * lambda * detail::loop_I1(m_sq, cutoff);
}

// second-order tadpole: -(lambda^2/4) I1 I2
inline double tadpole2(double m_sq, double lambda, double cutoff)
{
    detail::require_positive_mass(m_sq, "tadpole2");
    return -0.25 * lambda * lambda * detail::loop_I1(m_sq, cutoff) * detail::loop_I2(m_sq, cutoff);
}

inline double vertex_correction(double m_sq, double lambda, double cutoff)
{
    detail::require_positive_mass(m_sq, "vertex_correction");
    return -1.5 * lambda * lambda * detail::loop_I2(m_sq, cutoff);
}

struct SunriseResult {
    double sigma0 = 0.0;
    double dsigma_dk2 = 0.0;
};

// int d^2x |x|^{2p} G(x)^3 with G = K0(m r)/2pi, on r = e^s/m
inline double sunrise_moment(double m_sq, int p, double tol = 1e-12)
{
    const double m = std::sqrt(m_sq);
    const double s_lo = -40.0, s_hi = 4.5;
    auto f = [p](double s) {
        const double r = std::exp(s);
        const double g = std::cyl_bessel_k(0.0, r) / constants::two_pi;
        return std::pow(r, 2 * p + 2) * g * g * g;
    };
    int n = 256;
    double h = (s_hi - s_lo) / n;
    double sum = 0.5 * (f(s_lo) + f(s_hi));
    for (int k = 1; k < n; ++k)
        sum += f(s_lo + k * h);
    double prev = sum * h, cur = prev;
    for (int level = 0; level < 20; ++level) {
        for (int k = 0; k < n; ++k)
            sum += f(s_lo + (k + 0.5) * h);
        n *= 2;
        h *= 0.5;
        cur = sum * h;
        if (std::fabs(cur - prev) <= tol * std::fabs(cur))
            break;
        if (level == 19)
            throw ConvergenceError("sunrise: radial quadrature did not converge", std::fabs(cur - prev));
        prev = cur;
    }
    return constants::two_pi * cur / std::pow(m, 2 * p + 2);
}

// cutoff is accepted for symmetry with the other pieces; both integrals are UV finite in 2D
inline SunriseResult sunrise(double m_sq, double lambda, double cutoff)
{
    (void)cutoff;
    detail::require_positive_mass(m_sq, "sunrise");
    SunriseResult r;
    if (lambda == 0.0)
        return r;
    const double l2 = lambda * lambda;
    r.sigma0 = -(l2 / 6.0) * sunrise_moment(m_sq, 0);
    r.dsigma_dk2 = -(l2 / 24.0) * sunrise_moment(m_sq, 1);
    return r;
}

inline RenormalizedParams renormalized_params(const RGState& st)
{
    detail::require_positive_mass(st.m0_sq, "renormalized_params");
    RenormalizedParams out;
    const double m2 = st.m0_sq, lam = st.lambda0, L = st.cutoff;
    out.sigma_parts.tadpole1 = tadpole1(m2, lam, L);
    out.sigma_parts.tadpole2 = tadpole2(m2, lam, L);
    const auto sr = sunrise(m2, lam, L);
    out.sigma_parts.sunrise = sr.sigma0;
    out.dsigma_dk2 = sr.dsigma_dk2;
    out.z = 1.0 / (1.0 - sr.dsigma_dk2);
    const double sigma = out.sigma_parts.tadpole1 + out.sigma_parts.tadpole2 + out.sigma_parts.sunrise;
    out.m_r_sq = (m2 + sigma) * out.z;
    out.vertex = vertex_correction(m2, lam, L);
    out.lambda_r = (lam + out.vertex) * out.z * out.z;
    out.J_scale = std::sqrt(out.z);
    return out;
}

struct RGTrajectory {
    std::vector<RGState> states;
    bool diverged = false;
};

namespace detail {

struct Flow2 {
    double m2, lam; // cutoff units
};

// interaction part of the flow; the linear 2 m^2, 2 lambda scaling is integrated exactly
inline Flow2 flow_nonlinear(const Flow2& s)
{
    const double d = 1.0 + s.m2;
    const double c = 1.0 / (4.0 * constants::pi);
    return {c * s.lam / d, -3.0 * c * s.lam * s.lam / (d * d)};
}

// integrating-factor (Lawson) RK4: exact for the free flow, fourth order otherwise
inline Flow2 rk4_step(const Flow2& s, double h)
{
    const double e1 = std::exp(2.0 * h), eh = std::exp(h);
    auto lin = [](const Flow2& a, double f, const Flow2& b, double g) {
        return Flow2{f * a.m2 + g * b.m2, f * a.lam + g * b.lam};
    };
    const Flow2 k1 = flow_nonlinear(s);
    const Flow2 k2 = flow_nonlinear(lin(s, eh, k1, 0.5 * h * eh));
    const Flow2 k3 = flow_nonlinear(lin(s, eh, k2, 0.5 * h));
    const Flow2 k4 = flow_nonlinear(lin(s, e1, k3, h * eh));
    return {e1 * s.m2 + h / 6.0 * (e1 * k1.m2 + 2 * eh * (k2.m2 + k3.m2) + k4.m2),
            e1 * s.lam + h / 6.0 * (e1 * k1.lam + 2 * eh * (k2.lam + k3.lam) + k4.lam)};
}

inline bool flow_blown(const Flow2& s)
{
    return !std::isfinite(s.m2) || !std::isfinite(s.lam) || std::fabs(s.m2) > 1e8 || std::fabs(s.lam) > 1e8 ||
           1.0 + s.m2 <= 1e-6;
}

} // namespace detail

inline RGTrajectory rg_flow(const RGState& start, double d_ell, int n_steps)
{
    if (!(d_ell > 0.0 && d_ell <= 0.01))
        throw DomainError("rg_flow: d_ell must be in (0, 0.01]");
    if (n_steps < 1)
        throw DomainError("rg_flow: n_steps must be >= 1");
    if (!(start.cutoff > 0.0))
        throw DomainError("rg_flow: cutoff must be > 0");
    const double L2 = start.cutoff * start.cutoff;
    RGTrajectory tr;
    tr.states.reserve(n_steps + 1);
    tr.states.push_back(start);
    detail::Flow2 s{start.m0_sq / L2, start.lambda0 / L2};
    for (int k = 0; k < n_steps; ++k) {
        s = detail::rk4_step(s, d_ell);
        if (detail::flow_blown(s)) {
            tr.diverged = true;
            break;
        }
        RGState st = start;
        st.m0_sq = s.m2 * L2;
        st.lambda0 = s.lam * L2;
        st.flow_time = start.flow_time + (k + 1) * d_ell;
        tr.states.push_back(st);
    }
    return tr;
}

enum class FlowFate { up, down };

// where a flow started at (m2, lam) (cutoff units) ends up
inline FlowFate classify_flow(double m2, double lam, double d_ell = 0.01, double ell_max = 60.0)
{
    detail::Flow2 s{m2, lam};
    const int n = static_cast<int>(ell_max / d_ell);
    for (int k = 0; k < n; ++k) {
        s = detail::rk4_step(s, d_ell);
        if (s.m2 > 1.0)
            return FlowFate::up;
        if (s.m2 < -0.9 || detail::flow_blown(s))
            return FlowFate::down;
    }
    return s.m2 >= 0.0 ? FlowFate::up : FlowFate::down;
}

// separatrix bare mass m0^2_c(lambda0) in cutoff units by bisection
inline double critical_mass_flow(double lam_hat, double d_ell = 0.01, double tol = 1e-13)
{
    double lo = -0.8, hi = 1.0;
    if (classify_flow(lo, lam_hat, d_ell) != FlowFate::down || classify_flow(hi, lam_hat, d_ell) != FlowFate::up)
        throw ConvergenceError("critical_mass_flow: separatrix not bracketed", lam_hat);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (classify_flow(mid, lam_hat, d_ell) == FlowFate::up)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

struct CriticalShift {
    double m_c_sq_natural = 0.0;    // 1/m^2
    double delta_omega_zz_sq = 0.0; // rad^2/s^2
    double ratio = 0.0;             // sqrt(delta)/omega_zz
    bool below_threshold = false;
    double lambda_nat = 0.0;
    // independent estimate from the full flow: -m0^2_c c_t^2
    std::optional<double> m_c_sq_flow;
    std::optional<double> delta_omega_zz_sq_flow;
};

// linearised critical shift; lambda_nat overrides the crystal value when given
inline CriticalShift critical_shift(const LongWavelengthParams& lw, std::optional<double> lambda_nat = {},
                                    bool with_flow = false)
{
    CriticalShift out;
    out.lambda_nat = lambda_nat ? *lambda_nat : lw.lambda0_nat;
    if (lw.K <= constants::K_star) {
        out.below_threshold = true;
        return out;
    }
    out.m_c_sq_natural = out.lambda_nat / (8.0 * constants::pi) * (std::log(lw.K) - std::log(constants::K_star));
    out.delta_omega_zz_sq = lw.c_t * lw.c_t * out.m_c_sq_natural;
    out.ratio = std::sqrt(out.delta_omega_zz_sq) / lw.omega_zz;
    if (with_flow) {
        const double L2 = lw.cutoff * lw.cutoff;
        const double mc = out.lambda_nat == 0.0 ? 0.0 : -critical_mass_flow(out.lambda_nat / L2) * L2;
        out.m_c_sq_flow = mc;
        out.delta_omega_zz_sq_flow = lw.c_t * lw.c_t * mc;
    }
    return out;
}

// coarse couplings with omega_zz^2 -> omega_zz^2 + delta and sources scaled by J_scale
inline IsingCouplings renormalized_couplings(const ChainParams& p, const SourceConfig& src,
                                             const Eigen::VectorXd& positions, double delta_omega_zz_sq,
                                             double J_scale = 1.0, bool true_positions = true)
{
    const auto dec = decompose_pole_cut(p, src.beatnote_omega, delta_omega_zz_sq);
    CoarseOptions opt;
    opt.true_positions = true_positions;
    opt.j_scale = J_scale * J_scale; // J_ij is quadratic in the sources
    auto out = coarse_from_decomposition(dec, coarse_coupling_scale(p, src), positions, src, opt);
    out.provenance = Provenance::renormalized;
    return out;
}

} // namespace trapfield

#endif
