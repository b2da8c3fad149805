#ifndef EFRES_SPECTRUM_HPP
#define EFRES_SPECTRUM_HPP

#include <array>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "efres/operators.hpp"

namespace efres {

enum class LadderMethod { exact3, series, numeric };

std::string to_string(LadderMethod m);

// One dressed level: energy, components in the excitation-block basis of its
// block, and the classification weight on its nominal template state.
struct LadderState {
    double energy_ghz = 0.0;
    VectorXcd components;
    double overlap = 1.0;
};

// The three dressed ladders {|g~n>}, {|+n>}, {|-n>}, indexed by n with the
// conventions |+0> = |-0> = |g~0> and |+1> = |-1> = |e~0>. Energies are
// relative to E(|g~0>) = 0.
struct EnergyLadders {
    LadderMethod method = LadderMethod::numeric;
    SystemParams params;
    std::vector<LadderState> g;      // |g~n>, n = 0..n_cap
    std::vector<LadderState> plus;   // |+n>
    std::vector<LadderState> minus;  // |-n>

    int n_cap() const { return static_cast<int>(g.size()) - 1; }

    double e_g(int n) const;
    double e_plus(int n) const;
    double e_minus(int n) const;
};

// Three real roots of x^3 - 2x^2 + (1 + 2e^2 - 3ne^2)x + ne^2 = 0, ascending.
// The scaled variable is x = (n nu_O - E/h)/alpha on the n-th excitation
// block at exact ef resonance. Throws domain_error if roots leave the real
// axis (coupling too large for the analytic regime).
std::array<double, 3> cubic_roots(int n, double eps);

// Closed-form ladders for the 3-level transmon at exact ef resonance:
// scalar/2x2 blocks solved directly, n >= 2 through cubic_roots.
EnergyLadders ladders_exact3(const SystemParams& p);

// Low-order expansions in the reduced coupling: g~ ladder through eps^4,
// +/- ladders through eps^2, eigenvectors from the same expansions.
EnergyLadders ladders_series(const SystemParams& p, int n_cap);

// Block-wise Hermitian eigensolve (3 or 4 transmon levels, any detuning).
// Eigenstates are classified by overlap against |gn> and the symmetric /
// antisymmetric combinations of |e(n-1)>, |f(n-2)>; degenerate subspaces are
// re-mixed onto the templates before classification.
EnergyLadders ladders_numeric(const SystemParams& p);

// Fock-state-dependent manipulation frequencies nu_{+-n} for the
// |g~n> -> |+-(n+1)> transitions, with the closed-form approximation and the
// parabolic model for comparison.
struct TransitionRow {
    int n = 0;
    double nu_plus_ghz = 0.0;
    double nu_minus_ghz = 0.0;
    double approx_plus_ghz = 0.0;  // nu_ge +- sqrt(2n) g + (3n+1) g eps / 2
    double approx_minus_ghz = 0.0;
    double parabolic_plus_ghz = 0.0; // nu_ge +- sqrt(2n) g
    double parabolic_minus_ghz = 0.0;
};

std::vector<TransitionRow> transition_table(const EnergyLadders& l);

// Kerr profile of the g~ ladder: series constant 2 alpha eps^4 and per-n
// second differences of the ladder energies.
struct KerrReport {
    double nu_tilde_o_ghz = 0.0;
    double k_series_hz = 0.0;
    std::vector<double> k_n_hz;       // K_n for n = 1.., second difference at n
    int first_n = 1;                  // n of k_n_hz.front()
    std::optional<int> sign_change_n; // first n where K_n flips sign
};

KerrReport kerr_report(const EnergyLadders& l);

// Kerr suppression of the ef-resonant scheme against a far-dispersive
// transmon and a two-level system at equal Fock-selectivity separation S.
struct SchemeComparison {
    double s_mhz = 0.0;            // S = sqrt(2) g_O
    double k_hz = 0.0;             // ef-resonant Kerr 2 alpha (g/alpha)^4
    double k_dispersive_hz = 0.0;  // K'' = S^2 / (4 alpha'')
    double reduction_factor = 0.0; // K''/K = (alpha/alpha'')(alpha/S)^2/2

    // two-level value at equal separation, one free detuning parameter
    double k_two_level_hz(double delta_prime_mhz) const;
};

SchemeComparison compare_schemes(double alpha_mhz, double g_o_mhz, double alpha_pp_mhz);

// columns: n, E_g, E_plus, E_minus, nu_plus, nu_minus, K_n, method
void write_ladder_csv(std::ostream& os, const EnergyLadders& l);

} // namespace efres

#endif
