#include "efres/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include <mutex>

#include "efres/csv.hpp"
#include "efres/parallel.hpp"

namespace efres {

namespace {
std::mutex big_solve_mutex; // caps concurrent memory of the largest solves
} // namespace

namespace {

double poisson_pmf(double mu, int n) {
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
    // stable through logs for the tails
    return std::exp(n * std::log(mu) - mu - std::lgamma(n + 1.0));
}

} // namespace

// ---- spectroscopy -----------------------------------------------------

SpectroscopyTrace spectroscopy_trace(const SystemParams& p, Complex beta,
                                     const std::vector<double>& nu_grid_ghz) {
    SystemParams pl = p;
    pl.levels = 4;
    const double mu = std::norm(beta);
    // probe every n carrying more than ~1e-6 of the Poisson weight
    int n_probe = static_cast<int>(std::ceil(mu + 6.0 * std::sqrt(mu + 1.0)));
    pl.n_max = std::max(pl.n_max, n_probe + pl.levels + 1);
    const auto ladders = ladders_numeric(pl);
    const auto table = transition_table(ladders);
    n_probe = std::min<int>(n_probe, static_cast<int>(table.size()) - 1);

    SpectroscopyTrace trace;
    trace.fwhm_ghz = 1e-3 / (std::numbers::pi * p.t2s_us); // 1/us -> GHz
    for (int n = 0; n <= n_probe; ++n) {
        const double amp = poisson_pmf(mu, n);
        trace.peaks.push_back({n, +1, table[n].nu_plus_ghz, amp});
        if (n > 0) // nu_-0 and nu_+0 coincide on |e~0>
            trace.peaks.push_back({n, -1, table[n].nu_minus_ghz, amp});
    }
    trace.nu_grid_ghz = nu_grid_ghz;
    trace.response.assign(nu_grid_ghz.size(), 0.0);
    const double hw = 0.5 * trace.fwhm_ghz;
    for (std::size_t i = 0; i < nu_grid_ghz.size(); ++i)
        for (const auto& pk : trace.peaks)
            trace.response[i] += pk.amplitude * hw * hw /
                                 ((nu_grid_ghz[i] - pk.nu_ghz) * (nu_grid_ghz[i] - pk.nu_ghz) +
                                  hw * hw);
    return trace;
}

void write_spectroscopy_csv(std::ostream& os, const SpectroscopyTrace& t) {
    CsvWriter w(os);
    w.row({"nu_ghz", "response"});
    for (std::size_t i = 0; i < t.nu_grid_ghz.size(); ++i)
        w.row({format_double(t.nu_grid_ghz[i]), format_double(t.response[i])});
}

// ---- p(n) calibration fit ----------------------------------------------

std::vector<double> default_amplitude_list() {
    std::vector<double> a(26);
    for (int i = 0; i < 26; ++i) a[i] = 1.3 * i / 25.0;
    return a;
}

std::vector<double> measured_calibration_coefficients() {
    return {0.764, 0.835, 0.847, 0.846, 0.833, 0.854, 0.846, 0.834, 0.847, 0.832, 0.841};
}

CalibrationDataset synth_calibration(const std::vector<double>& c, double k_per_v, double sigma,
                                     const std::vector<double>& a_list, Rng& rng) {
    for (double cn : c)
        if (cn <= 0.0 || cn > 1.0)
            throw invalid_parameter_error("synth_calibration: coefficients must lie in (0,1]");
    if (k_per_v <= 0.0) throw invalid_parameter_error("synth_calibration: k must be positive");
    CalibrationDataset d;
    d.amplitudes_v = a_list;
    d.truth_c = c;
    d.truth_k = k_per_v;
    d.truth_sigma = sigma;
    const int rows = static_cast<int>(c.size());
    const int cols = static_cast<int>(a_list.size());
    d.signal.resize(rows, cols);
    for (int j = 0; j < cols; ++j) {
        const double mu = (k_per_v * a_list[j]) * (k_per_v * a_list[j]);
        for (int n = 0; n < rows; ++n) {
            double s = c[n] * poisson_pmf(mu, n);
            if (sigma > 0.0) s += sigma * rng.normal();
            d.signal(n, j) = std::clamp(s, 0.0, 1.0);
        }
    }
    return d;
}

void CalibrationDataset::write_csv(std::ostream& os) const {
    CsvWriter w(os);
    w.row({"n", "amplitude_v", "signal"});
    for (int j = 0; j < signal.cols(); ++j)
        for (int n = 0; n < signal.rows(); ++n)
            w.row({std::to_string(n), format_double(amplitudes_v[j]), format_double(signal(n, j))});
}

CalibrationDataset CalibrationDataset::read_csv(std::istream& is) {
    auto rows = efres::read_csv(is);
    std::vector<std::tuple<int, double, double>> entries;
    std::vector<double> amps;
    int n_max_seen = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 0 && !rows[i].empty() && rows[i][0] == "n") continue;
        if (rows[i].size() != 3) throw data_error("calibration CSV row needs 3 columns");
        const int n = std::stoi(rows[i][0]);
        const double a = std::stod(rows[i][1]);
        const double s = std::stod(rows[i][2]);
        entries.emplace_back(n, a, s);
        n_max_seen = std::max(n_max_seen, n);
        if (std::find(amps.begin(), amps.end(), a) == amps.end()) amps.push_back(a);
    }
    CalibrationDataset d;
    d.amplitudes_v = amps;
    d.signal = Eigen::MatrixXd::Constant(n_max_seen + 1, static_cast<int>(amps.size()),
                                         std::nan(""));
    for (auto& [n, a, s] : entries) {
        const auto it = std::find(amps.begin(), amps.end(), a);
        d.signal(n, static_cast<int>(it - amps.begin())) = s;
    }
    if (d.signal.hasNaN()) throw data_error("calibration CSV grid has gaps");
    return d;
}

namespace {

// optimal coefficients and chi^2 at fixed filling rate
double calibration_chi2(const CalibrationDataset& d, double k, std::vector<double>* c_out) {
    const int rows = d.n_levels();
    const int cols = static_cast<int>(d.amplitudes_v.size());
    double chi2 = 0.0;
    if (c_out) c_out->assign(rows, 0.0);
    for (int n = 0; n < rows; ++n) {
        double num = 0.0, den = 0.0;
        for (int j = 0; j < cols; ++j) {
            const double mu = (k * d.amplitudes_v[j]) * (k * d.amplitudes_v[j]);
            const double pn = poisson_pmf(mu, n);
            num += d.signal(n, j) * pn;
            den += pn * pn;
        }
        const double cn = den > 0.0 ? num / den : 0.0;
        if (c_out) (*c_out)[n] = cn;
        for (int j = 0; j < cols; ++j) {
            const double mu = (k * d.amplitudes_v[j]) * (k * d.amplitudes_v[j]);
            const double r = d.signal(n, j) - cn * poisson_pmf(mu, n);
            chi2 += r * r;
        }
    }
    return chi2;
}

// golden-section with parabolic steps, enough for the smooth 1-D profile
double minimize_1d(const std::function<double(double)>& f, double a, double b, double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

FitResult fit_calibration(const CalibrationDataset& d) {
    const int rows = d.n_levels();
    const int cols = static_cast<int>(d.amplitudes_v.size());
    if (rows == 0 || cols == 0) throw fit_error("fit_calibration: empty dataset");
    if (d.signal.hasNaN()) throw fit_error("fit_calibration: grid has gaps");
    for (int n = 0; n < rows; ++n)
        if (d.signal.row(n).cwiseAbs().maxCoeff() == 0.0)
            throw fit_error("fit_calibration: signal column for n=" + std::to_string(n) +
                            " is identically zero");

    // multistart over the physical k window, then local refinement
    double best_k = 0.0, best_chi2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 180; ++i) {
        const double k = 0.5 + 4.5 * i / 180.0;
        const double chi2 = calibration_chi2(d, k, nullptr);
        if (chi2 < best_chi2) {
            best_chi2 = chi2;
            best_k = k;
        }
    }
    const double step = 4.5 / 180.0;
    const double k_lo = std::max(0.5, best_k - step);
    const double k_hi = std::min(5.0, best_k + step);
    const double k_fit = minimize_1d([&](double k) { return calibration_chi2(d, k, nullptr); },
                                     k_lo, k_hi, 1e-12);

    FitResult res;
    res.k_per_v = k_fit;
    const double chi2 = calibration_chi2(d, k_fit, &res.c);

    // residual statistics
    const int m = rows * cols;
    double mean = 0.0;
    std::vector<double> residuals;
    residuals.reserve(m);
    for (int n = 0; n < rows; ++n)
        for (int j = 0; j < cols; ++j) {
            const double mu = (k_fit * d.amplitudes_v[j]) * (k_fit * d.amplitudes_v[j]);
            const double r = d.signal(n, j) - res.c[n] * poisson_pmf(mu, n);
            residuals.push_back(r);
            mean += r;
        }
    mean /= m;
    double var = 0.0;
    for (double r : residuals) var += (r - mean) * (r - mean);
    res.residual_mean = mean;
    res.residual_sigma = std::sqrt(var / (m - 1));

    // Gauss-Newton covariance about the optimum
    const int n_par = rows + 1;
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(n_par, n_par);
    for (int n = 0; n < rows; ++n)
        for (int j = 0; j < cols; ++j) {
            const double a = d.amplitudes_v[j];
            const double mu = (k_fit * a) * (k_fit * a);
            const double pn = poisson_pmf(mu, n);
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_par);
            grad(n) = pn;
            const double dp_dk = (k_fit > 0.0) ? pn * (2.0 * n / k_fit - 2.0 * k_fit * a * a) : 0.0;
            grad(rows) = res.c[n] * dp_dk;
            jtj += grad * grad.transpose();
        }
    const double dof = std::max(1, m - n_par);
    const double s2 = chi2 / dof;
    res.covariance = s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
    return res;
}

// ---- driven steady-state power sweep ------------------------------------

double dressed_frequency_ghz(const SystemParams& p) {
    SystemParams pl = p;
    pl.n_max = std::max(p.n_max, p.levels + 3);
    const auto lad = ladders_numeric(pl);
    return lad.e_g(1) - lad.e_g(0);
}

DriveCalibration in_situ_anchor(const SystemParams& p) {
    const double nu_drive = dressed_frequency_ghz(p);
    SystemParams ps = p;
    ps.n_max = std::max(p.n_max, 16);
    DriveCalibration cal = DriveCalibration::linear_cavity_anchor(p);
    double eps = cal.eps_ref_mhz;
    for (int it = 0; it < 8; ++it) {
        const auto m = add_drive(rotating_frame(ps, nu_drive), eps, 0.0);
        const double n = mean_photons(steady_state(m), ps);
        if (std::abs(n - 1.0) < 1e-4) break;
        eps /= std::sqrt(n);
    }
    cal.eps_ref_mhz = eps;
    return cal;
}

SweepPoint steady_point(const SystemParams& base, double nu_drive_ghz, double eps_d_mhz,
                        double n_est, const SweepOptions& opts) {
    const auto policy_n_max = [&](double est) {
        return std::clamp(static_cast<int>(std::ceil(est + 5.0 * std::sqrt(est))), 8,
                          opts.n_max_limit);
    };
    double est = std::max(n_est, opts.n_est_floor);
    SweepPoint out;
    std::string history;
    bool shrink_allowed = true; // only to correct an oversized first estimate
    const auto solve_at = [&](const SystemParams& p) {
        const auto m = add_drive(rotating_frame(p, nu_drive_ghz), eps_d_mhz, 0.0);
        if (p.n_max > opts.serialize_above_n_max) {
            std::lock_guard<std::mutex> lock(big_solve_mutex);
            return steady_state(m);
        }
        return steady_state(m);
    };
    for (int round = 0; round < 12; ++round) {
        SystemParams p = base;
        p.n_max = policy_n_max(est);
        const auto ss = solve_at(p);
        const double n = mean_photons(ss, p);
        history += " [n_max " + std::to_string(p.n_max) + " -> n " + format_double(n) + "]";

        if (n > est * 1.05 && p.n_max < opts.n_max_limit) {
            est = std::max(n * 1.2, est * 1.5); // truncation squeezed the state
            shrink_allowed = false;
            continue;
        }
        if (shrink_allowed && n < est / 2.0 &&
            policy_n_max(std::max(n, opts.n_est_floor)) < p.n_max) {
            est = std::max(n, opts.n_est_floor); // oversized, redo cheaper
            shrink_allowed = false;
            continue;
        }

        // truncation convergence: +20% photons must not move <n> by more
        // than the bound
        SystemParams p2 = p;
        p2.n_max = std::min(opts.n_max_limit,
                            static_cast<int>(std::ceil(1.2 * p.n_max)));
        if (p2.n_max == p.n_max) {
            out.n_mean = n;
            out.purity = ss.purity();
            out.n_max_used = p.n_max;
            const VectorXd pn = photon_distribution(ss, p);
            out.distribution.assign(pn.data(), pn.data() + pn.size());
            return out;
        }
        const auto ss2 = solve_at(p2);
        const double n2 = mean_photons(ss2, p2);
        history += " [check n_max " + std::to_string(p2.n_max) + " -> n " + format_double(n2) + "]";
        if (std::abs(n2 - n) <= opts.convergence_rel * std::max(n2, 1e-6)) {
            out.n_mean = n2;
            out.purity = ss2.purity();
            out.n_max_used = p2.n_max;
            const VectorXd pn = photon_distribution(ss2, p2);
            out.distribution.assign(pn.data(), pn.data() + pn.size());
            return out;
        }
        est = std::max(n2 * 1.3, est * 1.5);
        shrink_allowed = false;
    }
    throw truncation_error("steady_point: photon truncation did not converge below n_max limit " +
                           std::to_string(opts.n_max_limit) + " at nu " +
                           format_double(nu_drive_ghz) + " GHz, eps_d " +
                           format_double(eps_d_mhz) + " MHz; history:" + history);
}

namespace {

// quadratic vertex through the three highest samples
std::pair<double, double> interpolate_peak(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    int imax = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[imax]) imax = static_cast<int>(i);
    if (imax == 0 || imax + 1 >= static_cast<int>(y.size()))
        return {x[imax], y[imax]}; // peak on the window edge
    // vertex of the parabola through the three highest samples
    const double x0 = x[imax - 1], x1 = x[imax], x2 = x[imax + 1];
    const double y0 = y[imax - 1], y1 = y[imax], y2 = y[imax + 1];
    const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if (a >= 0.0) return {x1, y1};
    const double c = y1 - a * x1 * x1 - b * x1;
    const double xpk = -b / (2.0 * a);
    return {xpk, c - b * b / (4.0 * a)};
}

bool is_single_peaked(const std::vector<double>& y) {
    int maxima = 0;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] + 1e-12 && y[i] > y[i + 1] + 1e-12) ++maxima;
    return maxima <= 1;
}

} // namespace

PowerSweepResult power_sweep(const SystemParams& p, const std::vector<double>& p1_list_dbm,
                             const std::vector<double>& nu_grid_ghz, const SweepOptions& opts) {
    PowerSweepResult result;
    result.calibration = in_situ_anchor(p);
    result.nu_tilde_ghz = dressed_frequency_ghz(p);

    for (double p1 : p1_list_dbm) {
        PowerCurve curve;
        curve.p1_dbm = p1;
        curve.eps_d_mhz = result.calibration.eps_d_mhz(p1);
        curve.nu_ghz = nu_grid_ghz;
        curve.n_mean.assign(nu_grid_ghz.size(), 0.0);
        curve.purity.assign(nu_grid_ghz.size(), 0.0);

        // anchor the photon estimate at the resonance point first
        int i_center = 0;
        for (std::size_t i = 1; i < nu_grid_ghz.size(); ++i)
            if (std::abs(nu_grid_ghz[i] - result.nu_tilde_ghz) <
                std::abs(nu_grid_ghz[i_center] - result.nu_tilde_ghz))
                i_center = static_cast<int>(i);
        const double lin_peak =
            std::pow(curve.eps_d_mhz / result.calibration.eps_ref_mhz, 2);
        const SweepPoint center = steady_point(p, nu_grid_ghz[i_center], curve.eps_d_mhz,
                                               std::min(lin_peak, 30.0), opts);
        curve.n_mean[i_center] = center.n_mean;
        curve.purity[i_center] = center.purity;

        const double kappa = 1.0 / p.t_osc_us;
        std::vector<int> todo;
        for (std::size_t i = 0; i < nu_grid_ghz.size(); ++i)
            if (static_cast<int>(i) != i_center) todo.push_back(static_cast<int>(i));
        std::vector<SweepPoint> pts(todo.size());
        parallel_for(static_cast<int>(todo.size()), opts.jobs, [&](int idx) {
            const double nu = nu_grid_ghz[todo[idx]];
            // Lorentzian falloff of the center estimate
            const double delta_w = rad_per_us_per_ghz * (nu - result.nu_tilde_ghz);
            const double lor = 1.0 / (1.0 + std::pow(2.0 * delta_w / kappa, 2));
            pts[idx] = steady_point(p, nu, curve.eps_d_mhz,
                                    std::max(center.n_mean * lor, 0.2), opts);
        });
        for (std::size_t idx = 0; idx < todo.size(); ++idx) {
            curve.n_mean[todo[idx]] = pts[idx].n_mean;
            curve.purity[todo[idx]] = pts[idx].purity;
        }

        curve.single_peaked = is_single_peaked(curve.n_mean);
        auto [pk_nu, pk_n] = interpolate_peak(curve.nu_ghz, curve.n_mean);

        if (opts.refine_peak && nu_grid_ghz.size() >= 3) {
            // resample at a third of the grid step around the coarse vertex
            const double step = nu_grid_ghz[1] - nu_grid_ghz[0];
            std::vector<double> fine_nu{pk_nu - step / 3.0, pk_nu, pk_nu + step / 3.0};
            std::vector<double> fine_n(fine_nu.size());
            parallel_for(static_cast<int>(fine_nu.size()), opts.jobs, [&](int idx) {
                fine_n[idx] = steady_point(p, fine_nu[idx], curve.eps_d_mhz,
                                           std::max(pk_n, 0.2), opts)
                                  .n_mean;
            });
            const auto [rnu, rn] = interpolate_peak(fine_nu, fine_n);
            pk_nu = rnu;
            pk_n = rn;
        }
        curve.peak_nu_ghz = pk_nu;
        curve.peak_n = pk_n;

        // photon distribution at the interpolated peak
        const SweepPoint at_peak = steady_point(p, pk_nu, curve.eps_d_mhz, pk_n, opts);
        curve.peak_distribution = at_peak.distribution;
        if (static_cast<int>(curve.peak_distribution.size()) > opts.distribution_levels + 1)
            curve.peak_distribution.resize(opts.distribution_levels + 1);
        result.curves.push_back(std::move(curve));
    }
    return result;
}

void write_sweep_csv(std::ostream& os, const PowerSweepResult& r) {
    CsvWriter w(os);
    w.row({"p1_dbm", "nu_ghz", "n_mean", "purity"});
    for (const auto& c : r.curves)
        for (std::size_t i = 0; i < c.nu_ghz.size(); ++i)
            w.row({format_double(c.p1_dbm), format_double(c.nu_ghz[i]),
                   format_double(c.n_mean[i]), format_double(c.purity[i])});
}

// ---- drive-then-dephase scan --------------------------------------------

namespace {

// Nelder-Mead on the coherent-overlap objective
Complex best_coherent(const MatrixXcd& rho_osc, Complex start, double* fidelity_out) {
    const int n_max = static_cast<int>(rho_osc.rows()) - 1;
    const auto objective = [&](Complex b) {
        VectorXcd v = coherent_amplitudes(b, n_max);
        v.normalize();
        return -std::max(0.0, (v.adjoint() * rho_osc * v)(0).real());
    };
    std::array<Complex, 3> simplex{start, start + Complex(0.05, 0.0), start + Complex(0.0, 0.05)};
    std::array<double, 3> f{objective(simplex[0]), objective(simplex[1]), objective(simplex[2])};
    for (int it = 0; it < 120; ++it) {
        // order ascending
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return f[a] < f[b]; });
        const Complex best = simplex[idx[0]], mid = simplex[idx[1]], worst = simplex[idx[2]];
        const double fb = f[idx[0]], fm = f[idx[1]], fw = f[idx[2]];
        if (std::abs(worst - best) < 1e-9) break;
        const Complex centroid = 0.5 * (best + mid);
        const Complex refl = centroid + (centroid - worst);
        const double fr = objective(refl);
        Complex next = refl;
        double fn = fr;
        if (fr < fb) {
            const Complex expand = centroid + 2.0 * (centroid - worst);
            const double fe = objective(expand);
            if (fe < fr) {
                next = expand;
                fn = fe;
            }
        } else if (fr >= fm) {
            const Complex contract = centroid + 0.5 * (worst - centroid);
            const double fc = objective(contract);
            if (fc < fw) {
                next = contract;
                fn = fc;
            } else { // shrink toward best
                simplex = {best, best + 0.5 * (mid - best), best + 0.5 * (worst - best)};
                f = {fb, objective(simplex[1]), objective(simplex[2])};
                continue;
            }
        }
        simplex[idx[2]] = next;
        f[idx[2]] = fn;
    }
    int ib = 0;
    for (int i = 1; i < 3; ++i)
        if (f[i] < f[ib]) ib = i;
    if (fidelity_out) *fidelity_out = std::sqrt(std::max(0.0, -f[ib]));
    return simplex[ib];
}

DecayPoint analyze_state(const DensityMatrix& dm, const SystemParams& p, double t_us) {
    DecayPoint pt;
    pt.t_us = t_us;
    pt.n_mean = mean_photons(dm, p);
    pt.purity = dm.purity();
    const MatrixXcd rho_osc = reduced_oscillator(dm, p);
    const Complex start = oscillator_amplitude(dm, p);
    pt.best_beta = best_coherent(rho_osc, start, &pt.coherent_fidelity);
    return pt;
}

} // namespace

DecayScan coherence_decay_scan(const SystemParams& p, const std::vector<double>& t_list_us,
                               const DecayOptions& opts) {
    for (std::size_t i = 1; i < t_list_us.size(); ++i)
        if (t_list_us[i] <= t_list_us[i - 1])
            throw invalid_parameter_error("coherence_decay_scan: t_list must ascend");

    // drive strength reproducing the target amplitude after the pulse length
    double eps = opts.eps_d_mhz;
    if (eps <= 0.0)
        eps = std::abs(opts.target_beta) / (2.0 * std::numbers::pi * opts.t_pulse_us);

    SystemParams ps = p;
    if (opts.n_max > 0) {
        ps.n_max = opts.n_max;
    } else {
        const double n_target = std::norm(opts.target_beta);
        const double t_max = t_list_us.empty() ? opts.t_pulse_us : t_list_us.back();
        const double growth = std::min(1.0, t_max / opts.t_pulse_us);
        const double n_est = std::max(1.0, n_target * growth * growth * 1.4);
        ps.n_max = static_cast<int>(std::ceil(n_est + 5.0 * std::sqrt(n_est)));
    }

    const double nu_drive = dressed_frequency_ghz(ps);
    const auto m = add_drive(rotating_frame(ps, nu_drive), eps, 0.0);

    DecayScan scan;
    EvolveOptions ev;
    ev.rtol = opts.rtol;
    ev.atol = opts.atol;
    const auto states = evolve(m, ground_state(ps), t_list_us, ev);
    for (std::size_t i = 0; i < states.size(); ++i)
        scan.points.push_back(analyze_state(states[i], ps, t_list_us[i]));

    if (opts.include_steady) {
        const auto ss = steady_state(m);
        scan.steady = analyze_state(ss, ps, std::numeric_limits<double>::infinity());
    }
    return scan;
}

void write_decay_csv(std::ostream& os, const DecayScan& scan) {
    CsvWriter w(os);
    w.row({"t_us", "n_mean", "purity", "coherent_fidelity", "re_beta", "im_beta"});
    for (const auto& pt : scan.points)
        w.row({format_double(pt.t_us), format_double(pt.n_mean), format_double(pt.purity),
               format_double(pt.coherent_fidelity), format_double(pt.best_beta.real()),
               format_double(pt.best_beta.imag())});
    if (scan.steady)
        w.row({"inf", format_double(scan.steady->n_mean), format_double(scan.steady->purity),
               format_double(scan.steady->coherent_fidelity),
               format_double(scan.steady->best_beta.real()),
               format_double(scan.steady->best_beta.imag())});
}

// ---- scenario manifests ---------------------------------------------------

void write_manifest(std::ostream& os, const std::string& scenario,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    os << "scenario = " << scenario << '\n';
    for (const auto& [k, v] : entries) os << k << " = " << v << '\n';
}

} // namespace efres
