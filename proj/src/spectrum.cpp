#include "efres/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "efres/csv.hpp"

namespace efres {

std::string to_string(LadderMethod m) {
    switch (m) {
    case LadderMethod::exact3: return "exact3";
    case LadderMethod::series: return "series";
    case LadderMethod::numeric: return "numeric";
    }
    return "?";
}

namespace {

double checked(const std::vector<LadderState>& v, int n, const char* what) {
    if (n < 0 || n >= static_cast<int>(v.size()))
        throw range_error(std::string(what) + ": index " + std::to_string(n) +
                          " beyond truncation guard (cap " + std::to_string(v.size() - 1) + ")");
    return v[n].energy_ghz;
}

} // namespace

double EnergyLadders::e_g(int n) const { return checked(g, n, "E_g"); }
double EnergyLadders::e_plus(int n) const { return checked(plus, n, "E_plus"); }
double EnergyLadders::e_minus(int n) const { return checked(minus, n, "E_minus"); }

std::array<double, 3> cubic_roots(int n, double eps) {
    if (n < 2) throw invalid_parameter_error("cubic_roots: n must be >= 2");
    const double e2 = eps * eps;
    const double b = -2.0;
    const double c = 1.0 + 2.0 * e2 - 3.0 * n * e2;
    const double d = n * e2;

    // depressed cubic t^3 + p t + q with x = t + 2/3
    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    if (p >= 0.0)
        throw domain_error("cubic_roots: coupling too large for three real roots");
    const double m = 2.0 * std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (p * m);
    if (std::abs(arg) > 1.0 + 1e-10)
        throw domain_error("cubic_roots: complex roots detected (eps too large)");
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg);

    std::array<double, 3> roots{};
    for (int k = 0; k < 3; ++k) {
        const double t = m * std::cos((phi + 2.0 * std::numbers::pi * k) / 3.0);
        double x = t + 2.0 / 3.0;
        // one Newton polish pass on the original cubic
        for (int it = 0; it < 3; ++it) {
            const double f = ((x + b) * x + c) * x + d;
            const double df = (3.0 * x + 2.0 * b) * x + c;
            if (df == 0.0) break;
            x -= f / df;
        }
        roots[k] = x;
    }
    std::sort(roots.begin(), roots.end());
    for (double x : roots) {
        const double res = std::abs(((x + b) * x + c) * x + d);
        if (res > 1e-12)
            throw domain_error("cubic_roots: residual " + std::to_string(res) + " above bound");
    }
    return roots;
}

namespace {

double x_g_series(int n, double eps) {
    const double e2 = eps * eps;
    return -(n * e2 + n * (n - 2.0) * e2 * e2);
}

double x_pm_series(int n, double eps, int sign) {
    if (n == 1) return 1.0 + eps * eps;
    return 1.0 + sign * std::sqrt(2.0 * (n - 1.0)) * eps + 0.5 * n * eps * eps;
}

void require_ef_resonance(const SystemParams& p, const char* who) {
    if (!p.ef_resonant(1e-9))
        throw invalid_parameter_error(std::string(who) +
                                      ": requires exact ef resonance (nu_ge + alpha == nu_O)");
}

VectorXcd unit_vector(int dim, int pos) {
    VectorXcd v = VectorXcd::Zero(dim);
    v(pos) = 1.0;
    return v;
}

// null vector of the scaled n>=2 block matrix M - xI, analytic form
VectorXcd block3_vector(int n, double eps, double x) {
    VectorXcd v(3);
    if (eps == 0.0) {
        // degenerate limit: x=0 -> |gn>, x=1 twice handled by caller
        if (x < 0.5) return unit_vector(3, 0);
        return unit_vector(3, 1);
    }
    const double a = std::sqrt(static_cast<double>(n)) * eps;
    const double bb = std::sqrt(2.0 * (n - 1.0)) * eps;
    if (std::abs(1.0 - x) > 1e-7) {
        v(0) = 1.0;
        v(1) = x / a;
        v(2) = -bb * (x / a) / (1.0 - x);
    } else {
        // x ~ 1: use the second/third rows instead
        v(1) = 1.0;
        v(0) = a / x;
        v(2) = -bb / (1.0 - x); // only reached when bb ~ 0 as well
    }
    v.normalize();
    // fix the global sign so the dominant component is positive
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax).real() < 0.0) v = -v;
    return v;
}

double overlap_weight(const VectorXcd& tmpl, const VectorXcd& v) {
    return std::norm(tmpl.dot(v));
}

} // namespace

EnergyLadders ladders_exact3(const SystemParams& p) {
    p.validate();
    if (p.levels != 3)
        throw invalid_parameter_error("ladders_exact3: requires a 3-level transmon");
    require_ef_resonance(p, "ladders_exact3");

    const double eps = p.epsilon();
    const double alpha = p.alpha_ghz();
    const int n_cap = p.n_max - 3;
    if (n_cap < 1) throw invalid_parameter_error("ladders_exact3: n_max too small");

    EnergyLadders l;
    l.method = LadderMethod::exact3;
    l.params = p;
    l.g.resize(n_cap + 1);
    l.plus.resize(n_cap + 1);
    l.minus.resize(n_cap + 1);

    // N = 0
    l.g[0] = {0.0, unit_vector(1, 0), 1.0};
    l.plus[0] = l.g[0];
    l.minus[0] = l.g[0];

    // N = 1: 2x2 block, x = (1 -+ sqrt(1+4eps^2))/2
    {
        const double root = std::sqrt(1.0 + 4.0 * eps * eps);
        const double x_g = 0.5 * (1.0 - root);
        const double x_e = 0.5 * (1.0 + root);
        VectorXcd vg(2), ve(2);
        if (eps == 0.0) {
            vg << 1.0, 0.0;
            ve << 0.0, 1.0;
        } else {
            vg << 1.0, x_g / eps;
            ve << 1.0, x_e / eps;
            vg.normalize();
            ve.normalize();
            if (ve(1).real() < 0) ve = -ve;
        }
        l.g[1] = {p.nu_o_ghz - alpha * x_g, vg, std::norm(vg(0))};
        l.plus[1] = {p.nu_o_ghz - alpha * x_e, ve, std::norm(ve(1))};
        l.minus[1] = l.plus[1];
    }

    for (int n = 2; n <= n_cap; ++n) {
        const auto roots = cubic_roots(n, eps);
        // match roots against series predictions; the g~ root sits near 0
        std::array<double, 3> pred = {x_g_series(n, eps), x_pm_series(n, eps, -1),
                                      x_pm_series(n, eps, +1)};
        std::array<int, 3> pick{-1, -1, -1};
        std::array<bool, 3> used{false, false, false};
        for (int t = 0; t < 3; ++t) {
            double best = 1e300;
            for (int r = 0; r < 3; ++r) {
                if (used[r]) continue;
                const double dist = std::abs(roots[r] - pred[t]);
                if (dist < best) {
                    best = dist;
                    pick[t] = r;
                }
            }
            used[pick[t]] = true;
        }
        const double x_g = roots[pick[0]];
        const double x_m = roots[pick[1]];
        const double x_p = roots[pick[2]];
        const double base = n * p.nu_o_ghz;

        VectorXcd vg = block3_vector(n, eps, x_g);
        VectorXcd vm = block3_vector(n, eps, x_m);
        VectorXcd vp = block3_vector(n, eps, x_p);
        if (eps == 0.0) {
            vm = VectorXcd(3);
            vp = VectorXcd(3);
            vm << 0.0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
            vp << 0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        }
        const VectorXcd tp = (unit_vector(3, 1) + unit_vector(3, 2)) / std::sqrt(2.0);
        const VectorXcd tm = (unit_vector(3, 1) - unit_vector(3, 2)) / std::sqrt(2.0);
        l.g[n] = {base - alpha * x_g, vg, std::norm(vg(0))};
        l.minus[n] = {base - alpha * x_m, vm, overlap_weight(tm, vm)};
        l.plus[n] = {base - alpha * x_p, vp, overlap_weight(tp, vp)};
    }
    return l;
}

EnergyLadders ladders_series(const SystemParams& p, int n_cap) {
    p.validate();
    if (p.levels != 3)
        throw invalid_parameter_error("ladders_series: requires a 3-level transmon");
    require_ef_resonance(p, "ladders_series");
    if (n_cap < 1) throw invalid_parameter_error("ladders_series: n_cap must be >= 1");

    const double eps = p.epsilon();
    const double alpha = p.alpha_ghz();

    EnergyLadders l;
    l.method = LadderMethod::series;
    l.params = p;
    l.g.resize(n_cap + 1);
    l.plus.resize(n_cap + 1);
    l.minus.resize(n_cap + 1);

    l.g[0] = {0.0, unit_vector(1, 0), 1.0};
    l.plus[0] = l.g[0];
    l.minus[0] = l.g[0];

    {
        VectorXcd vg(2), ve(2);
        vg << 1.0 - 0.5 * eps * eps, -eps;
        ve << eps, 1.0 - 0.5 * eps * eps;
        vg.normalize();
        ve.normalize();
        l.g[1] = {p.nu_o_ghz - alpha * x_g_series(1, eps), vg, std::norm(vg(0))};
        l.plus[1] = {p.nu_o_ghz - alpha * x_pm_series(1, eps, +1), ve, std::norm(ve(1))};
        l.minus[1] = l.plus[1];
    }

    const VectorXcd tp3 = (unit_vector(3, 1) + unit_vector(3, 2)) / std::sqrt(2.0);
    const VectorXcd tm3 = (unit_vector(3, 1) - unit_vector(3, 2)) / std::sqrt(2.0);
    for (int n = 2; n <= n_cap; ++n) {
        const double base = n * p.nu_o_ghz;
        const double sq_n = std::sqrt(static_cast<double>(n));
        const double sq_nm1 = std::sqrt(n - 1.0);

        VectorXcd vg(3);
        vg << 1.0 - 0.5 * n * eps * eps, -sq_n * eps, std::sqrt(2.0 * n * (n - 1.0)) * eps * eps;
        vg.normalize();
        l.g[n] = {base - alpha * x_g_series(n, eps), vg, std::norm(vg(0))};

        for (int sign : {+1, -1}) {
            VectorXcd v(3);
            v(0) = eps * std::sqrt(n / 2.0) + sign * std::sqrt(n / (n - 1.0)) * (7.0 * n - 8.0) / 8.0 * eps * eps;
            v(1) = 1.0 / std::sqrt(2.0) + sign * n / (8.0 * sq_nm1) * eps +
                   (33.0 * n - 32.0) * n / (64.0 * std::sqrt(2.0) * (n - 1.0)) * eps * eps;
            v(2) = sign / std::sqrt(2.0) - n / (8.0 * sq_nm1) * eps +
                   sign * n * n / (64.0 * std::sqrt(2.0) * (n - 1.0)) * eps * eps;
            v.normalize();
            LadderState st{base - alpha * x_pm_series(n, eps, sign), v,
                           overlap_weight(sign > 0 ? tp3 : tm3, v)};
            (sign > 0 ? l.plus : l.minus)[n] = std::move(st);
        }
    }
    return l;
}

namespace {

struct BlockLabels {
    std::vector<VectorXcd> templates; // in label order
    std::vector<std::string> names;
};

BlockLabels block_templates(const ExcitationBlock& b) {
    BlockLabels out;
    const int sz = b.size();
    if (sz == 1) {
        out.templates.push_back(unit_vector(1, 0));
        out.names = {"g"};
    } else if (sz == 2) {
        out.templates = {unit_vector(2, 0), unit_vector(2, 1)};
        out.names = {"g", "pm"};
    } else {
        out.templates = {unit_vector(sz, 0),
                         (unit_vector(sz, 1) + unit_vector(sz, 2)) / std::sqrt(2.0),
                         (unit_vector(sz, 1) - unit_vector(sz, 2)) / std::sqrt(2.0)};
        out.names = {"g", "plus", "minus"};
        if (sz == 4) {
            out.templates.push_back(unit_vector(4, 3));
            out.names.push_back("h");
        }
    }
    return out;
}

// Re-mix near-degenerate eigenvector groups onto the templates so the
// classification is stable in the uncoupled / crossing limits.
void remix_degenerate(Eigen::VectorXd& evals, MatrixXcd& evecs,
                      const std::vector<VectorXcd>& templates) {
    const int sz = static_cast<int>(evals.size());
    int start = 0;
    while (start < sz) {
        int end = start;
        while (end + 1 < sz &&
               std::abs(evals(end + 1) - evals(end)) < 1e-9 + 1e-12 * std::abs(evals(end)))
            ++end;
        const int gsz = end - start + 1;
        if (gsz >= 2) {
            // project templates onto the group span, keep the strongest ones
            std::vector<std::pair<double, VectorXcd>> proj;
            for (const auto& t : templates) {
                VectorXcd pt = VectorXcd::Zero(sz);
                for (int k = start; k <= end; ++k) pt += evecs.col(k).dot(t) * evecs.col(k);
                const double nrm2 = pt.squaredNorm();
                if (nrm2 > 1e-6) proj.emplace_back(nrm2, std::move(pt));
            }
            std::stable_sort(proj.begin(), proj.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            // Gram-Schmidt within the span
            std::vector<VectorXcd> replacement;
            for (auto& [nrm2, v] : proj) {
                for (const auto& r : replacement) v -= r.dot(v) * r;
                if (v.squaredNorm() > 1e-10) {
                    v.normalize();
                    replacement.push_back(v);
                }
                if (static_cast<int>(replacement.size()) == gsz) break;
            }
            if (static_cast<int>(replacement.size()) == gsz)
                for (int k = 0; k < gsz; ++k) evecs.col(start + k) = replacement[k];
        }
        start = end + 1;
    }
}

} // namespace

EnergyLadders ladders_numeric(const SystemParams& p) {
    p.validate();
    const auto h = build_hamiltonian(p);
    const auto blocks = excitation_blocks(h, p);
    const int n_cap = p.n_max - p.levels;
    if (n_cap < 1) throw invalid_parameter_error("ladders_numeric: n_max too small");

    EnergyLadders l;
    l.method = LadderMethod::numeric;
    l.params = p;
    l.g.resize(n_cap + 1);
    l.plus.resize(n_cap + 1);
    l.minus.resize(n_cap + 1);

    for (int total = 0; total <= n_cap; ++total) {
        const auto& b = blocks[total];
        const auto labels = block_templates(b);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(b.matrix);
        Eigen::VectorXd evals = es.eigenvalues();
        MatrixXcd evecs = es.eigenvectors();
        remix_degenerate(evals, evecs, labels.templates);

        const int sz = b.size();
        const int n_labels = static_cast<int>(labels.templates.size());
        // score matrix and best assignment over permutations
        Eigen::MatrixXd score(n_labels, sz);
        for (int t = 0; t < n_labels; ++t)
            for (int k = 0; k < sz; ++k)
                score(t, k) = overlap_weight(labels.templates[t], evecs.col(k));

        std::vector<int> perm(sz);
        for (int k = 0; k < sz; ++k) perm[k] = k;
        std::vector<int> best_perm = perm;
        double best_score = -1.0;
        do {
            double s = 0.0;
            for (int t = 0; t < n_labels; ++t) s += score(t, perm[t]);
            if (s > best_score) {
                best_score = s;
                best_perm = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));

        for (int t = 0; t < n_labels; ++t) {
            const int k = best_perm[t];
            if (score(t, k) < 0.4)
                throw classification_error(
                    "ladders_numeric: ambiguous classification in block N=" +
                    std::to_string(total) + " for label " + labels.names[t] +
                    " (overlap " + std::to_string(score(t, k)) + ")");
            LadderState st{evals(k), evecs.col(k), score(t, k)};
            if (labels.names[t] == "g") l.g[total] = st;
            else if (labels.names[t] == "pm") {
                l.plus[total] = st;
                l.minus[total] = st;
            } else if (labels.names[t] == "plus") l.plus[total] = st;
            else if (labels.names[t] == "minus") l.minus[total] = st;
            // the h~ ladder is classified for consistency but not reported
        }
        if (sz == 1) {
            l.plus[total] = l.g[total];
            l.minus[total] = l.g[total];
        }
    }

    const double e0 = l.g[0].energy_ghz;
    for (auto* ladder : {&l.g, &l.plus, &l.minus})
        for (auto& st : *ladder) st.energy_ghz -= e0;
    return l;
}

std::vector<TransitionRow> transition_table(const EnergyLadders& l) {
    const SystemParams& p = l.params;
    const double g = p.g_o_ghz();
    const double eps = p.epsilon();
    std::vector<TransitionRow> rows;
    for (int n = 0; n + 1 <= l.n_cap(); ++n) {
        TransitionRow r;
        r.n = n;
        r.nu_plus_ghz = l.e_plus(n + 1) - l.e_g(n);
        r.nu_minus_ghz = l.e_minus(n + 1) - l.e_g(n);
        const double split = std::sqrt(2.0 * n) * g;
        const double tilt = (3.0 * n + 1.0) * g * eps / 2.0;
        r.approx_plus_ghz = p.nu_ge_ghz + split + tilt;
        r.approx_minus_ghz = p.nu_ge_ghz - split + tilt;
        r.parabolic_plus_ghz = p.nu_ge_ghz + split;
        r.parabolic_minus_ghz = p.nu_ge_ghz - split;
        rows.push_back(r);
    }
    if (rows.empty()) throw range_error("transition_table: ladders too short");
    return rows;
}

KerrReport kerr_report(const EnergyLadders& l) {
    KerrReport rep;
    const double eps = l.params.epsilon();
    rep.nu_tilde_o_ghz = l.e_g(1) - l.e_g(0);
    rep.k_series_hz = 2.0 * l.params.alpha_ghz() * 1e9 * std::pow(eps, 4);
    rep.first_n = 1;
    for (int n = 1; n + 1 <= l.n_cap(); ++n)
        rep.k_n_hz.push_back((l.e_g(n + 1) - 2.0 * l.e_g(n) + l.e_g(n - 1)) * 1e9);
    if (!rep.k_n_hz.empty()) {
        const double ref = rep.k_n_hz.front();
        for (std::size_t i = 1; i < rep.k_n_hz.size(); ++i) {
            if (rep.k_n_hz[i] * ref < 0.0) {
                rep.sign_change_n = rep.first_n + static_cast<int>(i);
                break;
            }
        }
    }
    return rep;
}

double SchemeComparison::k_two_level_hz(double delta_prime_mhz) const {
    if (delta_prime_mhz == 0.0)
        throw domain_error("compare_schemes: two-level detuning must be nonzero");
    return s_mhz * s_mhz / (2.0 * delta_prime_mhz) * 1e6;
}

SchemeComparison compare_schemes(double alpha_mhz, double g_o_mhz, double alpha_pp_mhz) {
    if (alpha_mhz == 0.0 || alpha_pp_mhz == 0.0)
        throw domain_error("compare_schemes: zero anharmonicity");
    if (g_o_mhz == 0.0) throw domain_error("compare_schemes: zero coupling");
    SchemeComparison c;
    c.s_mhz = std::sqrt(2.0) * g_o_mhz;
    const double eps = g_o_mhz / alpha_mhz;
    c.k_hz = 2.0 * alpha_mhz * 1e6 * std::pow(eps, 4);
    // equal-separation constraint S = 2 alpha'' (g''/Delta'')^2 pins g''/Delta''
    c.k_dispersive_hz = c.s_mhz * c.s_mhz / (4.0 * alpha_pp_mhz) * 1e6;
    c.reduction_factor = (alpha_mhz / alpha_pp_mhz) *
                         (alpha_mhz / c.s_mhz) * (alpha_mhz / c.s_mhz) / 2.0;
    return c;
}

void write_ladder_csv(std::ostream& os, const EnergyLadders& l) {
    CsvWriter w(os);
    w.row({"n", "E_g", "E_plus", "E_minus", "nu_plus", "nu_minus", "K_n", "method"});
    const auto trans = transition_table(l);
    const auto kerr = kerr_report(l);
    for (int n = 0; n <= l.n_cap(); ++n) {
        std::vector<std::string> cells;
        cells.push_back(std::to_string(n));
        cells.push_back(format_double(l.e_g(n)));
        cells.push_back(format_double(l.e_plus(n)));
        cells.push_back(format_double(l.e_minus(n)));
        if (n < static_cast<int>(trans.size())) {
            cells.push_back(format_double(trans[n].nu_plus_ghz));
            cells.push_back(format_double(trans[n].nu_minus_ghz));
        } else {
            cells.push_back("");
            cells.push_back("");
        }
        const int ki = n - kerr.first_n;
        if (ki >= 0 && ki < static_cast<int>(kerr.k_n_hz.size()))
            cells.push_back(format_double(kerr.k_n_hz[ki]));
        else
            cells.push_back("");
        cells.push_back(to_string(l.method));
        w.row(cells);
    }
}

} // namespace efres
