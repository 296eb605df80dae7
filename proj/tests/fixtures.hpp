#ifndef TRAPFIELD_TESTS_FIXTURES_HPP
#define TRAPFIELD_TESTS_FIXTURES_HPP

#include <trapfield/trapfield.hpp>

namespace fx {

using namespace trapfield;

inline constexpr double mhz = constants::two_pi * 1e6;
inline constexpr double khz = constants::two_pi * 1e3;
inline constexpr double target_a = 4.4e-6;

inline IonSpecies yb() { return IonSpecies::from_amu(170.936323); }

inline TrapConfig yb50_trap(int n = 50) { return {0.1 * mhz, 10.0 * mhz, 3.75 * mhz, n}; }

// solved once per process
inline const ChainModel& yb50_chain()
{
    static const ChainModel c = solve_equilibrium(yb(), yb50_trap());
    return c;
}

inline const ModeSpectrum& yb50_modes()
{
    static const ModeSpectrum s = transverse_modes(yb50_chain());
    return s;
}

inline ChainParams yb50_params() { return ChainParams::from_chain(yb50_chain()); }

inline const double yb50_detunings_khz[5] = {18.75, 37.5, 93.75, 187.5, 937.5};

inline SourceConfig yb50_source(const ChainParams& p, double detuning_khz)
{
    SourceConfig s;
    s.rabi_L = constants::two_pi * 1e5;
    s.k_proj_z = 2.0 * constants::two_pi / 355e-9;
    s.beatnote_omega = std::sqrt(zigzag_frequency_sq(p)) - detuning_khz * khz;
    return s;
}

// two-ion oracle operating point: rocking mode 0.32 MHz, beat note 100 kHz below it
struct OraclePoint {
    ChainModel chain;
    ModeSpectrum spectrum;
    SourceConfig source;
};

inline OraclePoint oracle_point(double detuning_khz = 100.0, double margin = 0.05, double rabi = 0.0)
{
    OraclePoint o;
    o.chain = solve_equilibrium(yb(), TrapConfig{1.0 * mhz, 5.0 * mhz, 1.05 * mhz, 2});
    o.spectrum = transverse_modes(o.chain);
    o.source.k_proj_z = 2.0 * constants::two_pi / 355e-9;
    o.source.beatnote_omega = o.spectrum.frequencies(0) - detuning_khz * khz;
    o.source.rabi_L = 1.0;
    o.source.rabi_L = rabi > 0.0 ? rabi : margin / validity_margin(o.spectrum, o.chain, o.source);
    return o;
}

} // namespace fx

#endif
