#ifndef EFRES_TOMOGRAPHY_HPP
#define EFRES_TOMOGRAPHY_HPP

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "efres/lindblad.hpp"
#include "efres/operators.hpp"
#include "efres/rng.hpp"

namespace efres {

struct TomogramRecord {
    Complex gamma;
    int n = 0;
    double f = 0.0; // measured probability
};

struct TomogramDataset {
    std::vector<TomogramRecord> records;
    int n_range = 7;          // highest probed Fock index
    std::string meta;

    // physicality: per-gamma probability sums bounded, finite entries
    void validate(double sigma_noise = 0.0) const;

    void write_csv(std::ostream& os) const; // re_gamma, im_gamma, n, f
    static TomogramDataset read_csv(std::istream& is);
};

// Normalized coherent state truncated to n_max+1 Fock states; requires
// |beta|^2 <= n_max/4 so the discarded tail is negligible.
VectorXcd coherent_state(Complex beta, int n_max);

// Same amplitudes without the truncation guard, for synthesis targets where
// the tail is accounted for explicitly.
VectorXcd coherent_amplitudes(Complex beta, int n_max);

// Displaced-Fock POVM for one displacement: probing the state displaced by
// +gamma, so Pi_{n,gamma} = D(gamma)† |n><n| D(gamma) cropped to the
// n_trunc+1 reconstruction space, plus the completeness remainder.
struct PovmSet {
    std::vector<MatrixXcd> elements; // n = 0..n_range
    MatrixXcd remainder;             // I - sum
};

PovmSet povm_elements(Complex gamma, int n_range, int n_trunc);

struct MleOptions {
    int max_iterations = 5000;
    double min_gain = 1e-10;
};

struct MleResult {
    DensityMatrix rho;
    int iterations = 0;
    double log_likelihood = 0.0;
    bool rank_deficient = false;        // under-determined warning
    std::vector<double> loglike_trace;  // accepted value per iteration
};

// Diluted RrhoR fixed point: the full step is taken when it improves the
// likelihood, otherwise the iteration operator is diluted toward the
// identity; the log-likelihood never decreases.
MleResult mle_reconstruct(const TomogramDataset& d, int n_trunc, const MleOptions& opts = {});

// Fidelity to a pure target, sqrt(<t|rho|t>).
double fidelity(const DensityMatrix& rho, const VectorXcd& target);

// Wigner function W(alpha) = (2/pi) Tr[D(alpha)† rho D(alpha) P], evaluated
// through the displaced parity identity D(alpha) P D(alpha)† = D(2 alpha) P
// with exact Fock matrix elements.
std::vector<double> wigner(const MatrixXcd& rho_osc, const std::vector<Complex>& points);

struct WignerMap {
    std::vector<double> re_axis;
    std::vector<double> im_axis;
    std::vector<std::vector<double>> values; // [im][re]
};

WignerMap wigner_map(const MatrixXcd& rho_osc, Complex center, double halfwidth, int n_side);
void write_wigner_csv(std::ostream& os, const WignerMap& map);

// 240-point default probe layout: radii x angles disk centered at -beta_est
// so the displaced states concentrate at low photon number.
std::vector<Complex> default_displacement_layout(Complex beta_est, int n_radii = 15,
                                                 int n_angles = 16, double radius = 3.0);

// Noiseless probabilities use the exact coherent-state Poisson law; optional
// multiplicative and additive Gaussian noise, clamped to [0, 1].
TomogramDataset synthesize_coherent_dataset(Complex beta, const std::vector<Complex>& gammas,
                                            int n_range, double mult_sigma, double add_sigma,
                                            Rng& rng);

} // namespace efres

#endif
