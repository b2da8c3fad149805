#ifndef EFRES_SYSTEM_PARAMS_HPP
#define EFRES_SYSTEM_PARAMS_HPP

#include <cmath>

#include "efres/errors.hpp"

namespace efres {

// Measured constants of the coupled transmon-oscillator system plus the two
// model knobs (transmon level count, photon truncation). Frequencies follow
// the units they are usually quoted in: oscillator and qubit frequencies in
// GHz, couplings/anharmonicity in MHz, coherence times in microseconds.
struct SystemParams {
    double nu_o_ghz = 6.4;      // oscillator frequency
    double nu_ge_ghz = 6.661;   // transmon g-e transition
    double alpha_mhz = -261.0;  // anharmonicity nu_ef - nu_ge (signed)
    double g_o_mhz = 7.45;      // transmon-oscillator coupling (> 0)
    double h_offset_mhz = -848.0; // |h> energy relative to 3*nu_ge, used when levels == 4
    int levels = 3;             // transmon levels kept (3 or 4)
    int n_max = 20;             // photon truncation (>= 2)
    double t1_us = 1.9;         // transmon relaxation
    double t2s_us = 2.4;        // transmon Ramsey coherence
    double t_osc_us = 54.0;     // oscillator energy relaxation
    double n_thermal = 0.0;     // oscillator bath occupation (0: zero temperature)

    double alpha_ghz() const { return alpha_mhz * 1e-3; }
    double g_o_ghz() const { return g_o_mhz * 1e-3; }
    double h_offset_ghz() const { return h_offset_mhz * 1e-3; }

    // reduced coupling, controls every perturbative expansion
    double epsilon() const { return -g_o_mhz / alpha_mhz; }

    // qubit-oscillator detuning Delta = nu_ge - nu_O
    double delta_ghz() const { return nu_ge_ghz - nu_o_ghz; }

    // distance from the ef-resonant condition; zero means exact resonance
    double ef_mismatch_ghz() const { return (nu_ge_ghz + alpha_ghz()) - nu_o_ghz; }

    bool ef_resonant(double tol_ghz = 1e-9) const {
        return std::abs(ef_mismatch_ghz()) < tol_ghz;
    }

    // transmon level energy in GHz (level index 0..levels-1)
    double transmon_level_ghz(int level) const {
        switch (level) {
        case 0: return 0.0;
        case 1: return nu_ge_ghz;
        case 2: return 2.0 * nu_ge_ghz + alpha_ghz();
        case 3: return 3.0 * nu_ge_ghz + h_offset_ghz();
        default: throw invalid_parameter_error("transmon level out of range");
        }
    }

    void validate() const {
        if (alpha_mhz == 0.0)
            throw invalid_parameter_error("alpha must be nonzero");
        if (g_o_mhz < 0.0)
            throw invalid_parameter_error("g_O must not be negative");
        if (std::abs(epsilon()) >= 0.2)
            throw invalid_parameter_error("reduced coupling |g_O/alpha| >= 0.2, outside model validity");
        if (levels != 3 && levels != 4)
            throw invalid_parameter_error("levels must be 3 or 4");
        if (n_max < 2)
            throw invalid_parameter_error("n_max must be >= 2");
        if (t1_us <= 0.0 || t2s_us <= 0.0 || t_osc_us <= 0.0)
            throw invalid_parameter_error("coherence times must be positive");
        if (n_thermal < 0.0)
            throw invalid_parameter_error("thermal occupation must be >= 0");
        if (t2s_us > 2.0 * t1_us + 1e-12)
            throw physicality_error("T2* > 2*T1: negative pure-dephasing rate");
    }

    // The measured working point: ef-resonant, all constants as characterized.
    static SystemParams paper_preset() {
        SystemParams p;
        p.nu_o_ghz = 6.4;
        p.alpha_mhz = -261.0;
        p.nu_ge_ghz = p.nu_o_ghz - p.alpha_ghz(); // exact ef resonance
        p.g_o_mhz = 7.45;
        p.h_offset_mhz = -848.0;
        p.levels = 3;
        p.n_max = 20;
        p.t1_us = 1.9;
        p.t2s_us = 2.4;
        p.t_osc_us = 54.0;
        return p;
    }
};

} // namespace efres

#endif
