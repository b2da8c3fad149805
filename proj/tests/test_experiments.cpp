#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "efres/experiments.hpp"

using namespace efres;

namespace {

double poisson(double mu, int n) {
    return std::exp(n * std::log(mu) - mu - std::lgamma(n + 1.0));
}

} // namespace

TEST_CASE("spectroscopy of the empty oscillator shows only the first line") {
    SystemParams p = SystemParams::paper_preset();
    p.n_max = 12;
    std::vector<double> grid{p.nu_ge_ghz};
    const auto trace = spectroscopy_trace(p, 0.0, grid);
    int strong = 0;
    for (const auto& pk : trace.peaks)
        if (pk.amplitude > 1e-6) ++strong;
    CHECK(strong == 1);
    CHECK(trace.peaks[0].n == 0);
    CHECK(trace.fwhm_ghz == doctest::Approx(1e-3 / (std::numbers::pi * 2.4)));
}

TEST_CASE("spectroscopy amplitudes follow the Poisson weights") {
    SystemParams p = SystemParams::paper_preset();
    p.n_max = 18;
    const Complex beta(std::sqrt(4.5), 0.0);
    const auto trace = spectroscopy_trace(p, beta, {p.nu_ge_ghz});
    for (const auto& pk : trace.peaks)
        CHECK(pk.amplitude == doctest::Approx(poisson(4.5, pk.n)).epsilon(1e-12));
}

TEST_CASE("spectroscopy peak positions track the parabolic law") {
    SystemParams p = SystemParams::paper_preset();
    p.n_max = 30;
    const Complex beta(std::sqrt(10.0), 0.0);
    const auto trace = spectroscopy_trace(p, beta, {p.nu_ge_ghz});
    const double g = p.g_o_ghz();
    const double eps = p.epsilon();
    for (const auto& pk : trace.peaks) {
        if (pk.n > 16) continue;
        const double parabolic =
            p.nu_ge_ghz + pk.sign * std::sqrt(2.0 * pk.n) * g;
        const double allowance = (3.0 * pk.n + 1.0) * g * eps / 2.0 + 2.5e-3;
        CHECK(std::abs(pk.nu_ghz - parabolic) < 1.6 * allowance);
    }
}

TEST_CASE("synthetic calibration dataset basics") {
    Rng rng(1);
    const auto c = measured_calibration_coefficients();
    const auto a_list = default_amplitude_list();
    REQUIRE(a_list.size() == 26);
    CHECK(a_list.front() == 0.0);
    CHECK(a_list.back() == doctest::Approx(1.3));

    const auto d = synth_calibration(c, 2.29, 0.0, a_list, rng);
    REQUIRE(d.n_levels() == 11);
    // A = 0 drives nothing: only the n=0 row responds
    CHECK(d.signal(0, 0) == doctest::Approx(c[0]));
    for (int n = 1; n < 11; ++n) CHECK(d.signal(n, 0) == 0.0);

    // partial Poisson sums stay below one at strong filling
    double total = 0.0;
    const double mu = std::pow(2.29 * a_list.back(), 2);
    for (int n = 0; n < 11; ++n) total += d.signal(n, 25) / c[n];
    double expect = 0.0;
    for (int n = 0; n < 11; ++n) expect += poisson(mu, n);
    CHECK(total == doctest::Approx(expect).epsilon(1e-10));
    CHECK(total < 1.0);

    CHECK_THROWS_AS(synth_calibration({1.2}, 2.0, 0.0, a_list, rng), invalid_parameter_error);
    CHECK_THROWS_AS(synth_calibration(c, -1.0, 0.0, a_list, rng), invalid_parameter_error);
}

TEST_CASE("noiseless calibration fit inverts the model exactly") {
    Rng rng(2);
    const auto c = measured_calibration_coefficients();
    const auto d = synth_calibration(c, 2.29, 0.0, default_amplitude_list(), rng);
    const auto fit = fit_calibration(d);
    CHECK(std::abs(fit.k_per_v - 2.29) / 2.29 < 1e-8);
    for (int n = 0; n < 11; ++n) CHECK(std::abs(fit.c[n] - c[n]) / c[n] < 1e-8);
    CHECK(fit.residual_sigma < 1e-10);
}

TEST_CASE("noisy calibration fit recovers the parameters") {
    // bounds frozen from a 100-seed scan of the synthetic oracle: k lands
    // within 0.36% always; the c_n spread grows with n as the Poisson weight
    // thins out (95% quantile 0.6% at n=0 up to 7.1% at n=10)
    const auto c = measured_calibration_coefficients();
    int k_ok = 0, c_low_ok = 0, c_all_ok = 0;
    double sigma_min = 1.0, sigma_max = 0.0;
    const int n_seeds = 20;
    for (int seed = 0; seed < n_seeds; ++seed) {
        Rng rng(1000 + seed);
        const auto d = synth_calibration(c, 2.29, 0.006, default_amplitude_list(), rng);
        const auto fit = fit_calibration(d);
        if (std::abs(fit.k_per_v - 2.29) / 2.29 < 0.01) ++k_ok;
        bool low = true, all = true;
        for (int n = 0; n < 11; ++n) {
            const double rel = std::abs(fit.c[n] - c[n]) / c[n];
            if (n <= 3 && rel > 0.03) low = false;
            if (rel > 0.09) all = false;
        }
        if (low) ++c_low_ok;
        if (all) ++c_all_ok;
        sigma_min = std::min(sigma_min, fit.residual_sigma);
        sigma_max = std::max(sigma_max, fit.residual_sigma);
    }
    CHECK(k_ok == n_seeds);
    CHECK(c_low_ok >= 19);
    CHECK(c_all_ok >= 19);
    CHECK(sigma_min > 0.004);
    CHECK(sigma_max < 0.008);
}

TEST_CASE("degenerate calibration column is rejected") {
    Rng rng(3);
    const auto c = measured_calibration_coefficients();
    auto d = synth_calibration(c, 2.29, 0.0, default_amplitude_list(), rng);
    d.signal.row(7).setZero();
    CHECK_THROWS_WITH_AS(fit_calibration(d), doctest::Contains("n=7"), fit_error);
}

TEST_CASE("calibration covariance scale") {
    Rng rng(4);
    const auto c = measured_calibration_coefficients();
    const auto d = synth_calibration(c, 2.29, 0.006, default_amplitude_list(), rng);
    const auto fit = fit_calibration(d);
    // one-sigma uncertainty on k should sit well below the 1% recovery bound
    const double sig_k = std::sqrt(fit.covariance(11, 11));
    CHECK(sig_k > 1e-4);
    CHECK(sig_k < 0.023);
}

TEST_CASE("calibration CSV round trip") {
    Rng rng(5);
    const auto d = synth_calibration(measured_calibration_coefficients(), 2.29, 0.0,
                                     default_amplitude_list(), rng);
    std::stringstream ss;
    d.write_csv(ss);
    const auto back = CalibrationDataset::read_csv(ss);
    CHECK(back.n_levels() == d.n_levels());
    CHECK((back.signal - d.signal).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("in-situ anchor reaches one photon on the full model") {
    SystemParams p = SystemParams::paper_preset();
    p.levels = 4;
    p.n_max = 16;
    const auto cal = in_situ_anchor(p);
    const double nu = dressed_frequency_ghz(p);
    auto m = add_drive(rotating_frame(p, nu), cal.eps_d_mhz(-149.6), 0.0);
    CHECK(mean_photons(steady_state(m), p) == doctest::Approx(1.0).epsilon(2e-4));
    // in-situ amplitude exceeds the bare linear-cavity anchor
    CHECK(cal.eps_ref_mhz > DriveCalibration::linear_cavity_anchor(p).eps_ref_mhz);
}

TEST_CASE("steady point honors the truncation policy") {
    SystemParams p = SystemParams::paper_preset();
    p.levels = 4;
    const double nu = p.nu_o_ghz - 2.1248e-4;
    SweepOptions opts;
    const auto pt = steady_point(p, nu, 8e-3, 1.0, opts);
    CHECK(pt.n_mean > 1.0);
    CHECK(pt.n_max_used >= pt.n_mean + 5.0 * std::sqrt(pt.n_mean));
    CHECK(pt.distribution.size() == static_cast<std::size_t>(pt.n_max_used + 1));
}

TEST_CASE("decay scan starts pure and coherent") {
    SystemParams p = SystemParams::paper_preset();
    p.levels = 4;
    DecayOptions opts;
    opts.target_beta = Complex(1.3, 0.0);
    opts.t_pulse_us = 0.3;
    opts.n_max = 10;
    const auto scan = coherence_decay_scan(p, {0.05, 0.15, 0.3}, opts);
    REQUIRE(scan.points.size() == 3);
    CHECK(scan.points[0].purity > 0.995);
    CHECK(scan.points[0].coherent_fidelity > 0.99);
    // the drive reaches the target amplitude at the pulse length
    CHECK(std::abs(scan.points[2].best_beta) == doctest::Approx(1.3).epsilon(0.06));
    // purity decays monotonically over the scan window
    CHECK(scan.points[2].purity < scan.points[0].purity);
}

TEST_CASE("decay scan approaches the steady state at long times") {
    SystemParams p = SystemParams::paper_preset();
    p.levels = 3;
    // every relaxation scale well below the horizon
    p.t_osc_us = 0.8;
    p.t1_us = 0.4;
    p.t2s_us = 0.6;
    DecayOptions opts;
    opts.target_beta = Complex(0.9, 0.0);
    opts.t_pulse_us = 0.25;
    opts.n_max = 8;
    opts.include_steady = true;
    const auto scan = coherence_decay_scan(p, {0.4, 14.0}, opts);
    REQUIRE(scan.steady.has_value());
    CHECK(scan.points.back().n_mean ==
          doctest::Approx(scan.steady->n_mean).epsilon(0.01));
    CHECK(scan.points.back().purity == doctest::Approx(scan.steady->purity).epsilon(0.02));
}

TEST_CASE("manifest output is deterministic") {
    std::stringstream a, b;
    const std::vector<std::pair<std::string, std::string>> entries{
        {"seed", "7"}, {"params.n_max", "20"}};
    write_manifest(a, "sweep", entries);
    write_manifest(b, "sweep", entries);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("scenario = sweep\n", 0) == 0);
}
