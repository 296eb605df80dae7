// N=50 Yb+ chain: exact vs coarse-grained couplings along the bulk, one detuning
#include <cstdio>

#include <trapfield/trapfield.hpp>

using namespace trapfield;

int main()
{
    const auto sp = IonSpecies::from_amu(170.936323);
    TrapConfig trap{constants::two_pi * 0.1e6, constants::two_pi * 10e6, constants::two_pi * 3.75e6, 50};
    const auto chain = solve_equilibrium(sp, trap);
    const auto modes = transverse_modes(chain);
    const auto p = ChainParams::from_chain(chain);

    SourceConfig src;
    src.rabi_L = constants::two_pi * 1e5;
    src.k_proj_z = 2.0 * constants::two_pi / 355e-9;
    src.beatnote_omega = std::sqrt(zigzag_frequency_sq(p)) - constants::two_pi * 937.5e3;

    const auto ex = exact_mode_couplings(modes, chain, src);
    const auto co = coarse_grained_couplings(p, src, chain.positions);
    std::printf("l = %.4g um, a = %.4g um, xi_eff/a = %.3f\n", chain.length_scale_l * 1e6, p.a * 1e6,
                effective_range(p, src.beatnote_omega) / p.a);
    const int i = 25;
    for (int j = i + 1; j <= i + 15; ++j)
        std::printf("%2d  J_exact/h = %+10.4f Hz   J_coarse/h = %+10.4f Hz\n", j - i,
                    ex.j_matrix(i, j) / (constants::two_pi * constants::hbar),
                    co.j_matrix(i, j) / (constants::two_pi * constants::hbar));
}
