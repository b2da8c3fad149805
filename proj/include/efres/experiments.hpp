#ifndef EFRES_EXPERIMENTS_HPP
#define EFRES_EXPERIMENTS_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "efres/lindblad.hpp"
#include "efres/rng.hpp"
#include "efres/spectrum.hpp"
#include "efres/tomography.hpp"

namespace efres {

// ---- spectroscopy -----------------------------------------------------

struct SpectroscopyPeak {
    int n = 0;
    int sign = +1; // +1 for |+(n+1)>, -1 for |-(n+1)>
    double nu_ghz = 0.0;
    double amplitude = 0.0; // Poisson weight of |g~n>
};

struct SpectroscopyTrace {
    std::vector<SpectroscopyPeak> peaks;
    std::vector<double> nu_grid_ghz;
    std::vector<double> response;
    double fwhm_ghz = 0.0; // 1/(pi T2*)
};

// Two-tone spectrum of a coherently filled oscillator: Lorentzians at the
// numeric four-level nu_{+-n} with Poisson amplitudes.
SpectroscopyTrace spectroscopy_trace(const SystemParams& p, Complex beta,
                                     const std::vector<double>& nu_grid_ghz);

void write_spectroscopy_csv(std::ostream& os, const SpectroscopyTrace& t);

// ---- p(n) calibration fit ----------------------------------------------

struct CalibrationDataset {
    std::vector<double> amplitudes_v;  // drive amplitudes A
    Eigen::MatrixXd signal;            // signal s(n, A), row n, column A
    // synthesis truth, kept for round-trip tests
    std::vector<double> truth_c;
    double truth_k = 0.0;
    double truth_sigma = 0.0;

    int n_levels() const { return static_cast<int>(signal.rows()); }

    void write_csv(std::ostream& os) const;
    static CalibrationDataset read_csv(std::istream& is);
};

std::vector<double> default_amplitude_list(); // 26 values, 0..1.3 V
std::vector<double> measured_calibration_coefficients(); // the eleven c_n

// s(n,A) = c_n Poisson((kA)^2; n) + Gaussian noise, clamped to [0,1]
CalibrationDataset synth_calibration(const std::vector<double>& c, double k_per_v, double sigma,
                                     const std::vector<double>& a_list, Rng& rng);

struct FitResult {
    std::vector<double> c;
    double k_per_v = 0.0;
    double residual_sigma = 0.0;
    double residual_mean = 0.0;
    Eigen::MatrixXd covariance; // (n_levels+1) x (n_levels+1), c then k
};

// Separable least squares: closed-form c_n at fixed k, multistart plus
// golden/parabolic refinement of the one-dimensional k problem.
FitResult fit_calibration(const CalibrationDataset& d);

// ---- driven steady-state power sweep ------------------------------------

// In-situ anchor: eps_ref tuned so the full model driven at the dressed
// resonance reaches <n> = 1, the way the experimental power scale was fixed.
DriveCalibration in_situ_anchor(const SystemParams& p);

// dressed oscillator frequency from the numeric ladders
double dressed_frequency_ghz(const SystemParams& p);

struct SweepOptions {
    int jobs = 1;
    double n_est_floor = 0.5;
    int n_max_limit = 140;
    int serialize_above_n_max = 125; // large factorizations run one at a time
    bool refine_peak = false;        // second finer pass around the coarse peak
    double convergence_rel = 0.01; // 20% truncation bump must move <n> less than this
    int distribution_levels = 24;  // p(n) entries kept at the peak
};

struct PowerCurve {
    double p1_dbm = 0.0;
    double eps_d_mhz = 0.0;
    std::vector<double> nu_ghz;
    std::vector<double> n_mean;
    std::vector<double> purity;
    double peak_nu_ghz = 0.0; // quadratic interpolation over the 3 top samples
    double peak_n = 0.0;
    std::vector<double> peak_distribution;
    bool single_peaked = true;
};

struct PowerSweepResult {
    std::vector<PowerCurve> curves;
    DriveCalibration calibration;
    double nu_tilde_ghz = 0.0;
};

PowerSweepResult power_sweep(const SystemParams& p, const std::vector<double>& p1_list_dbm,
                             const std::vector<double>& nu_grid_ghz,
                             const SweepOptions& opts = {});

void write_sweep_csv(std::ostream& os, const PowerSweepResult& r);

// single steady-state point with the adaptive truncation policy
struct SweepPoint {
    double n_mean = 0.0;
    double purity = 0.0;
    int n_max_used = 0;
    std::vector<double> distribution;
};

SweepPoint steady_point(const SystemParams& base, double nu_drive_ghz, double eps_d_mhz,
                        double n_est, const SweepOptions& opts = {});

// ---- drive-then-dephase scan --------------------------------------------

struct DecayPoint {
    double t_us = 0.0;
    double n_mean = 0.0;
    double purity = 0.0;
    double coherent_fidelity = 0.0; // best-fit coherent state
    Complex best_beta;
};

struct DecayScan {
    std::vector<DecayPoint> points;
    std::optional<DecayPoint> steady; // appended when requested
};

struct DecayOptions {
    double eps_d_mhz = 0.0;     // 0: derive from target_beta over t_pulse
    Complex target_beta = Complex(std::sqrt(5.0), -std::sqrt(2.0));
    double t_pulse_us = 0.3;
    bool include_steady = false;
    int n_max = 0;              // 0: choose from target
    double rtol = 1e-9;         // purity/fidelity observables need far less
    double atol = 1e-11;
};

DecayScan coherence_decay_scan(const SystemParams& p, const std::vector<double>& t_list_us,
                               const DecayOptions& opts = {});

void write_decay_csv(std::ostream& os, const DecayScan& scan);

// ---- scenario manifests ---------------------------------------------------

void write_manifest(std::ostream& os, const std::string& scenario,
                    const std::vector<std::pair<std::string, std::string>>& entries);

} // namespace efres

#endif
