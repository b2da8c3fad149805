#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>

#include "efres/config.hpp"
#include "efres/csv.hpp"
#include "efres/experiments.hpp"
#include "efres/parallel.hpp"
#include "efres/svg.hpp"
#include "efres/version.hpp"

namespace fs = std::filesystem;
using namespace efres;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string preset;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    int jobs = default_jobs();
    std::string format = "csv";
};

RunConfig load_config(const GlobalArgs& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig() : RunConfig::from_file(g.config_path);
    if (g.preset == "paper") cfg.apply_paper_preset();
    else if (!g.preset.empty()) throw std::runtime_error("unknown params preset: " + g.preset);
    return cfg;
}

class ScenarioOutput {
public:
    ScenarioOutput(const GlobalArgs& g, const RunConfig& cfg, const std::string& scenario)
        : dir_(g.output_dir), svg_(g.format == "csv+svg") {
        if (g.format != "csv" && g.format != "csv+svg")
            throw std::runtime_error("unknown format: " + g.format);
        fs::create_directories(dir_);
        std::ofstream mf(dir_ / "manifest");
        if (!mf) throw std::runtime_error("cannot write manifest in " + dir_.string());
        std::vector<std::pair<std::string, std::string>> entries;
        entries.emplace_back("version", version_string);
        entries.emplace_back("seed", std::to_string(g.seed));
        entries.emplace_back("jobs", std::to_string(g.jobs));
        for (const auto& [k, v] : cfg.entries()) entries.emplace_back(k, v);
        write_manifest(mf, scenario, entries);
    }

    std::ofstream stream(const std::string& name) const {
        std::ofstream f(dir_ / name);
        if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
        return f;
    }

    bool svg() const { return svg_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    bool svg_ = false;
};

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0);
    return v;
}

// ---- scenarios -----------------------------------------------------------

int run_spectrum(const GlobalArgs& g, const RunConfig& cfg, int levels_override) {
    SystemParams p = cfg.system_params();
    if (levels_override > 0) p.levels = levels_override;
    const std::string method = cfg.get("spectrum", "method");

    EnergyLadders ladders;
    if (method == "numeric") ladders = ladders_numeric(p);
    else if (method == "exact3") ladders = ladders_exact3(p);
    else if (method == "series") ladders = ladders_series(p, p.n_max - 3);
    else throw std::runtime_error("spectrum.method must be numeric, exact3 or series");

    ScenarioOutput out(g, cfg, "spectrum");
    auto f = out.stream("data.csv");
    write_ladder_csv(f, ladders);

    const auto kerr = kerr_report(ladders);
    std::cout << "epsilon = " << format_double(p.epsilon()) << "\n"
              << "nu_tilde_O = " << format_double(kerr.nu_tilde_o_ghz) << " GHz\n"
              << "K_series = " << format_double(kerr.k_series_hz) << " Hz\n";
    if (kerr.sign_change_n)
        std::cout << "K_n sign change at n = " << *kerr.sign_change_n << "\n";
    else
        std::cout << "K_n sign change: none within truncation\n";

    if (out.svg()) {
        SvgSeries kn;
        for (std::size_t i = 0; i < kerr.k_n_hz.size(); ++i) {
            kn.x.push_back(kerr.first_n + static_cast<double>(i));
            kn.y.push_back(kerr.k_n_hz[i]);
        }
        kn.label = "K_n (Hz)";
        auto sf = out.stream("plot.svg");
        write_line_plot_svg(sf, {kn}, "Kerr per photon (" + method + ")", "n", "K_n (Hz)");
    }
    return 0;
}

int run_spectroscopy(const GlobalArgs& g, const RunConfig& cfg) {
    const SystemParams p = cfg.system_params();
    const Complex beta(cfg.get_double("spectroscopy", "re_beta"),
                       cfg.get_double("spectroscopy", "im_beta"));
    const double span = cfg.get_double("spectroscopy", "nu_span_mhz") * 1e-3;
    const int points = cfg.get_int("spectroscopy", "nu_points");
    const auto grid = linspace(p.nu_ge_ghz - 0.5 * span, p.nu_ge_ghz + 0.5 * span, points);

    const auto trace = spectroscopy_trace(p, beta, grid);
    ScenarioOutput out(g, cfg, "spectroscopy");
    auto f = out.stream("data.csv");
    write_spectroscopy_csv(f, trace);
    auto pf = out.stream("peaks.csv");
    CsvWriter w(pf);
    w.row({"n", "branch", "nu_ghz", "amplitude"});
    for (const auto& pk : trace.peaks)
        w.row({std::to_string(pk.n), pk.sign > 0 ? "+" : "-", format_double(pk.nu_ghz),
               format_double(pk.amplitude)});
    std::cout << "peaks: " << trace.peaks.size() << ", fwhm = "
              << format_double(trace.fwhm_ghz * 1e6) << " kHz\n";
    if (out.svg()) {
        SvgSeries s;
        s.x = trace.nu_grid_ghz;
        s.y = trace.response;
        auto sf = out.stream("plot.svg");
        write_line_plot_svg(sf, {s}, "two-tone spectrum", "nu (GHz)", "response");
    }
    return 0;
}

int run_calibrate(const GlobalArgs& g, const RunConfig& cfg, bool synthetic,
                  const std::string& input) {
    CalibrationDataset data;
    if (!input.empty()) {
        std::ifstream f(input);
        if (!f) throw std::runtime_error("cannot open " + input);
        data = CalibrationDataset::read_csv(f);
    } else if (synthetic) {
        Rng rng(g.seed);
        data = synth_calibration(measured_calibration_coefficients(),
                                 cfg.get_double("calibrate", "k_per_v"),
                                 cfg.get_double("calibrate", "sigma"),
                                 default_amplitude_list(), rng);
    } else {
        throw std::runtime_error("calibrate needs --synthetic or --input FILE");
    }

    const FitResult fit = fit_calibration(data);
    ScenarioOutput out(g, cfg, "calibrate");
    auto df = out.stream("data.csv");
    data.write_csv(df);
    auto ff = out.stream("fit.txt");
    ff << "k_per_v = " << format_double(fit.k_per_v) << "\n";
    for (std::size_t n = 0; n < fit.c.size(); ++n)
        ff << "c_" << n << " = " << format_double(fit.c[n]) << "\n";
    ff << "residual_sigma = " << format_double(fit.residual_sigma) << "\n";
    ff << "residual_mean = " << format_double(fit.residual_mean) << "\n";
    std::cout << "k = " << format_double(fit.k_per_v)
              << " 1/V, residual sigma = " << format_double(fit.residual_sigma) << "\n";
    if (out.svg()) {
        std::vector<SvgSeries> series;
        const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
        for (int n = 0; n < std::min(4, data.n_levels()); ++n) {
            SvgSeries s;
            s.color = colors[n];
            s.label = "n=" + std::to_string(n);
            for (std::size_t j = 0; j < data.amplitudes_v.size(); ++j) {
                s.x.push_back(data.amplitudes_v[j]);
                s.y.push_back(data.signal(n, static_cast<int>(j)));
            }
            series.push_back(std::move(s));
        }
        auto sf = out.stream("plot.svg");
        write_line_plot_svg(sf, series, "p(n) calibration data", "A (V)", "signal");
    }
    return 0;
}

int run_tomo(const GlobalArgs& g, const RunConfig& cfg) {
    const Complex beta(cfg.get_double("tomo", "re_beta"), cfg.get_double("tomo", "im_beta"));
    const int n_range = cfg.get_int("tomo", "n_range");
    const int n_trunc = cfg.get_int("tomo", "n_trunc");

    Rng rng(g.seed);
    const auto gammas = default_displacement_layout(beta);
    const auto data = synthesize_coherent_dataset(beta, gammas, n_range,
                                                  cfg.get_double("tomo", "noise_mult"),
                                                  cfg.get_double("tomo", "noise_add"), rng);
    const auto mle = mle_reconstruct(data, n_trunc);
    VectorXcd target = coherent_amplitudes(beta, n_trunc);
    target.normalize();
    const double fid = fidelity(mle.rho, target);

    ScenarioOutput out(g, cfg, "tomo");
    auto df = out.stream("dataset.csv");
    data.write_csv(df);
    auto sf = out.stream("summary.txt");
    sf << "fidelity = " << format_double(fid) << "\n"
       << "iterations = " << mle.iterations << "\n"
       << "log_likelihood = " << format_double(mle.log_likelihood) << "\n"
       << "rank_deficient = " << (mle.rank_deficient ? "true" : "false") << "\n";
    std::cout << "reconstruction fidelity = " << format_double(fid) << " after "
              << mle.iterations << " iterations\n";

    const auto map = wigner_map(mle.rho.rho, beta, cfg.get_double("tomo", "wigner_halfwidth"),
                                cfg.get_int("tomo", "wigner_points"));
    auto wf = out.stream("wigner.csv");
    write_wigner_csv(wf, map);
    if (out.svg()) {
        auto pf = out.stream("plot.svg");
        write_heatmap_svg(pf, map.re_axis, map.im_axis, map.values, "reconstructed Wigner function");
    }
    return 0;
}

int run_sweep(const GlobalArgs& g, const RunConfig& cfg) {
    SystemParams p = cfg.system_params();
    p.levels = 4; // the quantitative model needs the fourth level
    const double p1_start = cfg.get_double("sweep", "p1_start_dbm");
    const double p1_stop = cfg.get_double("sweep", "p1_stop_dbm");
    const double p1_step = cfg.get_double("sweep", "p1_step_db");
    std::vector<double> p1_list;
    for (double x = p1_start; x <= p1_stop + 1e-9; x += p1_step) p1_list.push_back(x);

    const double nu0 = dressed_frequency_ghz(p);
    const double span = cfg.get_double("sweep", "nu_span_khz") * 1e-6;
    const auto grid = linspace(nu0 - 0.75 * span, nu0 + 0.25 * span,
                               cfg.get_int("sweep", "nu_points"));

    SweepOptions opts;
    opts.jobs = g.jobs;
    opts.n_max_limit = cfg.get_int("sweep", "n_max_limit");
    opts.refine_peak = cfg.get_bool("sweep", "refine_peak");
    const auto result = power_sweep(p, p1_list, grid, opts);

    ScenarioOutput out(g, cfg, "sweep");
    auto df = out.stream("data.csv");
    write_sweep_csv(df, result);
    auto pf = out.stream("peaks.csv");
    CsvWriter w(pf);
    w.row({"p1_dbm", "eps_d_mhz", "peak_nu_ghz", "peak_n", "shift_hz"});
    for (const auto& c : result.curves)
        w.row({format_double(c.p1_dbm), format_double(c.eps_d_mhz),
               format_double(c.peak_nu_ghz), format_double(c.peak_n),
               format_double((c.peak_nu_ghz - result.nu_tilde_ghz) * 1e9)});
    auto distf = out.stream("distributions.csv");
    CsvWriter dw(distf);
    dw.row({"p1_dbm", "n", "p_n"});
    for (const auto& c : result.curves)
        for (std::size_t n = 0; n < c.peak_distribution.size(); ++n)
            dw.row({format_double(c.p1_dbm), std::to_string(n),
                    format_double(c.peak_distribution[n])});

    for (const auto& c : result.curves)
        std::cout << "P1 = " << format_double(c.p1_dbm) << " dBm: peak <n> = "
                  << format_double(c.peak_n) << ", shift = "
                  << format_double((c.peak_nu_ghz - result.nu_tilde_ghz) * 1e9) << " Hz\n";

    if (out.svg()) {
        std::vector<SvgSeries> series;
        const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};
        for (std::size_t i = 0; i < result.curves.size(); ++i) {
            SvgSeries s;
            s.color = colors[i % 5];
            s.label = format_double(result.curves[i].p1_dbm) + " dBm";
            for (std::size_t j = 0; j < grid.size(); ++j) {
                s.x.push_back((grid[j] - nu0) * 1e6); // kHz from resonance
                s.y.push_back(result.curves[i].n_mean[j]);
            }
            series.push_back(std::move(s));
        }
        auto sf = out.stream("plot.svg");
        write_line_plot_svg(sf, series, "driven steady state", "nu - nu~ (kHz)", "<n>");
    }
    return 0;
}

int run_decay(const GlobalArgs& g, const RunConfig& cfg) {
    SystemParams p = cfg.system_params();
    p.levels = 4;
    DecayOptions opts;
    opts.target_beta = Complex(cfg.get_double("decay", "re_beta"),
                               cfg.get_double("decay", "im_beta"));
    opts.t_pulse_us = cfg.get_double("decay", "t_pulse_us");
    opts.include_steady = cfg.get_bool("decay", "include_steady");
    const auto t_grid = linspace(0.0, cfg.get_double("decay", "t_max_us"),
                                 cfg.get_int("decay", "t_points"));
    std::vector<double> grid(t_grid.begin(), t_grid.end());
    const auto scan = coherence_decay_scan(p, grid, opts);

    ScenarioOutput out(g, cfg, "decay");
    auto df = out.stream("data.csv");
    write_decay_csv(df, scan);
    std::cout << "final purity = " << format_double(scan.points.back().purity)
              << ", coherent fidelity = "
              << format_double(scan.points.back().coherent_fidelity) << "\n";
    if (out.svg()) {
        SvgSeries pur, fid;
        pur.label = "purity";
        fid.label = "coherent fidelity";
        fid.color = "#d62728";
        for (const auto& pt : scan.points) {
            pur.x.push_back(pt.t_us);
            pur.y.push_back(pt.purity);
            fid.x.push_back(pt.t_us);
            fid.y.push_back(pt.coherent_fidelity);
        }
        auto sf = out.stream("plot.svg");
        write_line_plot_svg(sf, {pur, fid}, "drive-then-dephase scan", "t (us)", "");
    }
    return 0;
}

int run_compare(const GlobalArgs& g, const RunConfig& cfg) {
    const auto cmp = compare_schemes(cfg.get_double("compare", "alpha_mhz"),
                                     cfg.get_double("compare", "g_o_mhz"),
                                     cfg.get_double("compare", "alpha_pp_mhz"));
    ScenarioOutput out(g, cfg, "compare");
    auto sf = out.stream("summary.txt");
    sf << "s_mhz = " << format_double(cmp.s_mhz) << "\n"
       << "k_hz = " << format_double(cmp.k_hz) << "\n"
       << "k_dispersive_hz = " << format_double(cmp.k_dispersive_hz) << "\n"
       << "reduction_factor = " << format_double(cmp.reduction_factor) << "\n";
    auto cf = out.stream("data.csv");
    CsvWriter w(cf);
    w.row({"delta_prime_ghz", "k_two_level_hz"});
    const double lo = cfg.get_double("compare", "delta_prime_min_ghz");
    const double hi = cfg.get_double("compare", "delta_prime_max_ghz");
    const int pts = cfg.get_int("compare", "delta_prime_points");
    for (int i = 0; i < pts; ++i) {
        const double d = lo + (hi - lo) * i / std::max(1, pts - 1);
        w.row({format_double(d), format_double(cmp.k_two_level_hz(d * 1e3))});
    }
    std::cout << "S = " << format_double(cmp.s_mhz) << " MHz, K''/K = "
              << format_double(cmp.reduction_factor) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(version_string) +
                 " - ef-resonant transmon-oscillator simulation toolkit"};
    app.footer(config_help_text());
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "config file (strict INI schema)");
    app.add_option("--params-preset", g.preset, "parameter preset: paper");
    app.add_option("--output", g.output_dir, "output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads")->capture_default_str();
    app.add_option("--format", g.format, "csv or csv+svg")->capture_default_str();

    int levels_override = 0;
    auto* sc_spectrum = app.add_subcommand("spectrum", "energy ladders, transitions and Kerr profile");
    sc_spectrum->add_option("--levels", levels_override, "transmon levels (3 or 4)");
    auto* sc_spectroscopy = app.add_subcommand("spectroscopy", "synthetic two-tone qubit spectrum");
    bool synthetic = false;
    std::string input;
    auto* sc_calibrate = app.add_subcommand("calibrate", "p(n) calibration dataset fit");
    sc_calibrate->add_flag("--synthetic", synthetic, "generate the dataset before fitting");
    sc_calibrate->add_option("--input", input, "fit an existing dataset CSV");
    auto* sc_tomo = app.add_subcommand("tomo", "synthetic tomography and MLE reconstruction");
    auto* sc_sweep = app.add_subcommand("sweep", "driven steady-state power sweep");
    auto* sc_decay = app.add_subcommand("decay", "coherence decay under constant drive");
    auto* sc_compare = app.add_subcommand("compare", "Kerr comparison across coupling schemes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        const RunConfig cfg = load_config(g);
        if (sc_spectrum->parsed()) return run_spectrum(g, cfg, levels_override);
        if (sc_spectroscopy->parsed()) return run_spectroscopy(g, cfg);
        if (sc_calibrate->parsed()) return run_calibrate(g, cfg, synthetic, input);
        if (sc_tomo->parsed()) return run_tomo(g, cfg);
        if (sc_sweep->parsed()) return run_sweep(g, cfg);
        if (sc_decay->parsed()) return run_decay(g, cfg);
        if (sc_compare->parsed()) return run_compare(g, cfg);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const efres::error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
