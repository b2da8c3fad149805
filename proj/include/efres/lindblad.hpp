#ifndef EFRES_LINDBLAD_HPP
#define EFRES_LINDBLAD_HPP

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "efres/operators.hpp"

namespace efres {

using SpMat = Eigen::SparseMatrix<Complex>;

// angular frequency per GHz when time is measured in microseconds
inline constexpr double rad_per_us_per_ghz = 2.0 * 3.14159265358979323846 * 1e3;

struct DensityMatrix {
    MatrixXcd rho;

    int dim() const { return static_cast<int>(rho.rows()); }
    double trace_real() const { return rho.trace().real(); }
    double purity() const { return (rho * rho).trace().real(); }
};

// Trace-1, Hermitian, PSD within tolerances; throws efres::error on violation.
void check_density_matrix(const DensityMatrix& dm, double trace_tol = 1e-9,
                          double herm_tol = 1e-10, double psd_floor = -1e-8);

struct CollapseChannel {
    MatrixXcd op;
    double rate_per_us = 0.0;
    std::string label;
};

// Rotating-frame master-equation model: H in GHz, rates in 1/us.
struct LindbladModel {
    OperatorMatrix h_rot;
    std::vector<CollapseChannel> collapses;
    double drive_eps_mhz = 0.0;
    double drive_phase_rad = 0.0;
    double nu_drive_ghz = 0.0;
    SystemParams params;
};

// Channels from the measured coherence times: oscillator decay a at 1/T_O,
// transmon decay a_q at 1/T1, transmon pure dephasing a_q†a_q at 2*Gamma_phi
// with Gamma_phi = 1/T2* - 1/(2 T1). The bath is zero temperature unless a
// thermal occupation is configured, which adds the upward oscillator
// channel. Passing n_thermal >= 0 overrides the configured value.
std::vector<CollapseChannel> collapse_ops(const SystemParams& p, double n_thermal = -1.0);

double pure_dephasing_rate(const SystemParams& p); // Gamma_phi in 1/us

// H_rot = H - nu_drive (a†a + a_q†a_q); exact in this model since the
// coupling conserves total excitation.
LindbladModel rotating_frame(const SystemParams& p, double nu_drive_ghz);

// Adds the coherent oscillator drive eps_d (e^{i phase} a + e^{-i phase} a†),
// eps_d in MHz.
LindbladModel add_drive(LindbladModel m, double eps_d_mhz, double phase_rad = 0.0);

// Sparse Liouvillian over column-stacked rho, in 1/us units.
SpMat liouvillian_matrix(const LindbladModel& m);

// The same generator restricted to Hermitian matrices, expressed on the real
// orthonormal basis {E_ii, (E_ij+E_ji)/sqrt2, i(E_ij-E_ji)/sqrt2}. Direct
// solves on it cost a quarter of the complex LU flops.
struct HermitianBasisLiouvillian {
    Eigen::SparseMatrix<double> l_real;
    std::vector<int> diag_coords; // coordinates carrying the trace
    int dim = 0;                  // Hilbert-space dimension d

    MatrixXcd unpack(const Eigen::VectorXd& x) const;
    Eigen::VectorXd pack(const MatrixXcd& rho) const;
};

HermitianBasisLiouvillian hermitian_liouvillian(const LindbladModel& m);

struct EvolveOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step_us = 1e-4;
    double min_step_us = 1e-12;
    double trace_drift_per_us = 1e-8;
};

// Adaptive Dormand-Prince integration of the master equation; returns the
// state at each requested time. No renormalization is applied; trace drift
// beyond the bound raises an error instead of being hidden.
std::vector<DensityMatrix> evolve(const LindbladModel& m, const DensityMatrix& rho0,
                                  const std::vector<double>& t_grid_us,
                                  const EvolveOptions& opts = {});

enum class SteadySolver {
    automatic,   // direct for small systems, sector GMRES for large ones
    direct,      // sparse LU on the Hermitian-basis generator
    sector_gmres // GMRES preconditioned by transmon-sector-diagonal blocks
};

struct SteadyStateOptions {
    double residual_rel = 1e-10;
    int max_refine = 4;
    double psd_floor = -1e-8;
    SteadySolver solver = SteadySolver::automatic;
    int gmres_restart = 40;
    int gmres_max_outer = 60;
};

// Kernel of the Liouvillian with the trace row replacing one equation,
// solved by sparse LU plus iterative refinement.
DensityMatrix steady_state(const LindbladModel& m, const SteadyStateOptions& opts = {});

// Input-power anchor: eps_d(P1) = eps_ref * 10^((P1 - P_ref)/20) with the
// reference fixed so a resonantly driven linear cavity with kappa = 1/T_O
// sits at <n> = 1 for P_ref = -149.6 dBm.
struct DriveCalibration {
    double p_ref_dbm = -149.6;
    double eps_ref_mhz = 0.0;

    static DriveCalibration linear_cavity_anchor(const SystemParams& p);
    double eps_d_mhz(double p1_dbm) const;
};

double drive_from_dbm(double p1_dbm, const SystemParams& p);

// observables on the tensor basis
DensityMatrix ground_state(const SystemParams& p);
double mean_photons(const DensityMatrix& dm, const SystemParams& p);
VectorXd photon_distribution(const DensityMatrix& dm, const SystemParams& p);
MatrixXcd reduced_oscillator(const DensityMatrix& dm, const SystemParams& p);
Complex oscillator_amplitude(const DensityMatrix& dm, const SystemParams& p); // <a>

// columns: t or nu, n_mean, purity, p0..p{n_show}
void write_trajectory_csv(std::ostream& os, const std::string& x_name,
                          const std::vector<double>& x,
                          const std::vector<DensityMatrix>& states,
                          const SystemParams& p, int n_show);

} // namespace efres

#endif
