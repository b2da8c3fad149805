#include "efres/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "efres/csv.hpp"

namespace efres {

void TomogramDataset::validate(double sigma_noise) const {
    std::map<std::pair<double, double>, double> sums;
    for (const auto& r : records) {
        if (!std::isfinite(r.f))
            throw data_error("tomogram dataset contains a non-finite frequency");
        if (r.n < 0 || r.n > n_range)
            throw data_error("tomogram record outside the probed Fock range");
        sums[{r.gamma.real(), r.gamma.imag()}] += r.f;
    }
    for (const auto& [g, s] : sums)
        if (s > 1.0 + 3.0 * sigma_noise + 1e-12)
            throw data_error("probabilities at displacement (" + format_double(g.first) + "," +
                             format_double(g.second) + ") sum to " + format_double(s));
}

void TomogramDataset::write_csv(std::ostream& os) const {
    CsvWriter w(os);
    w.row({"re_gamma", "im_gamma", "n", "f"});
    for (const auto& r : records)
        w.row({format_double(r.gamma.real()), format_double(r.gamma.imag()),
               std::to_string(r.n), format_double(r.f)});
}

TomogramDataset TomogramDataset::read_csv(std::istream& is) {
    TomogramDataset d;
    d.n_range = 0;
    auto rows = efres::read_csv(is);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 0 && !rows[i].empty() && rows[i][0] == "re_gamma") continue;
        if (rows[i].size() != 4) throw data_error("tomogram CSV row needs 4 columns");
        TomogramRecord r;
        r.gamma = Complex(std::stod(rows[i][0]), std::stod(rows[i][1]));
        r.n = std::stoi(rows[i][2]);
        r.f = std::stod(rows[i][3]);
        d.n_range = std::max(d.n_range, r.n);
        d.records.push_back(r);
    }
    return d;
}

VectorXcd coherent_amplitudes(Complex beta, int n_max) {
    VectorXcd v(n_max + 1);
    // c_n = e^{-|b|^2/2} b^n / sqrt(n!) built by recurrence
    v(0) = std::exp(-0.5 * std::norm(beta));
    for (int n = 1; n <= n_max; ++n) v(n) = v(n - 1) * beta / std::sqrt(static_cast<double>(n));
    return v;
}

VectorXcd coherent_state(Complex beta, int n_max) {
    if (std::norm(beta) > n_max / 4.0)
        throw truncation_error("coherent_state: |beta|^2 = " + format_double(std::norm(beta)) +
                               " exceeds n_max/4 truncation guard");
    VectorXcd v = coherent_amplitudes(beta, n_max);
    v.normalize();
    return v;
}

PovmSet povm_elements(Complex gamma, int n_range, int n_trunc) {
    if (n_range > n_trunc)
        throw invalid_parameter_error("povm_elements: n_range beyond truncation");
    const int n_work = n_trunc + static_cast<int>(std::ceil(10.0 * std::abs(gamma)));
    const MatrixXcd d = displacement_operator(gamma, n_trunc, n_work);
    PovmSet set;
    set.elements.reserve(n_range + 1);
    // Pi_n = (D† e_n)(D† e_n)†, rank one and PSD by construction
    for (int n = 0; n <= n_range; ++n) {
        const VectorXcd v = d.adjoint().col(n);
        set.elements.push_back(v * v.adjoint());
    }
    MatrixXcd rest = MatrixXcd::Identity(n_trunc + 1, n_trunc + 1);
    for (const auto& e : set.elements) rest -= e;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rest, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw truncation_error("povm_elements: completeness remainder not PSD (min eig " +
                               format_double(es.eigenvalues().minCoeff()) + ")");
    set.remainder = std::move(rest);
    return set;
}

namespace {

struct MleProblem {
    std::vector<MatrixXcd> ops;
    std::vector<double> freqs;
    double total_freq = 0.0;
};

MleProblem assemble_problem(const TomogramDataset& d, int n_trunc) {
    // group records by displacement, attach the completeness remainder with
    // the leftover frequency so each gamma forms a proper POVM
    std::map<std::pair<double, double>, std::vector<const TomogramRecord*>> by_gamma;
    for (const auto& r : d.records) by_gamma[{r.gamma.real(), r.gamma.imag()}].push_back(&r);

    MleProblem prob;
    for (const auto& [key, recs] : by_gamma) {
        const Complex gamma(key.first, key.second);
        const auto set = povm_elements(gamma, d.n_range, n_trunc);
        double seen = 0.0;
        for (const auto* r : recs) {
            prob.ops.push_back(set.elements[r->n]);
            prob.freqs.push_back(r->f);
            seen += r->f;
        }
        prob.ops.push_back(set.remainder);
        prob.freqs.push_back(std::max(0.0, 1.0 - seen));
    }
    for (double f : prob.freqs) prob.total_freq += f;
    return prob;
}

double log_likelihood(const MleProblem& prob, const std::vector<double>& p) {
    double ll = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (prob.freqs[j] > 0.0) ll += prob.freqs[j] * std::log(std::max(p[j], 1e-300));
    return ll;
}

std::vector<double> probabilities(const MleProblem& prob, const MatrixXcd& rho) {
    std::vector<double> p(prob.ops.size());
    for (std::size_t j = 0; j < prob.ops.size(); ++j)
        p[j] = std::max(0.0, prob.ops[j].transpose().cwiseProduct(rho).sum().real());
    return p;
}

MatrixXcd r_operator(const MleProblem& prob, const std::vector<double>& p, int dim) {
    MatrixXcd r = MatrixXcd::Zero(dim, dim);
    for (std::size_t j = 0; j < prob.ops.size(); ++j)
        if (prob.freqs[j] > 0.0) r += (prob.freqs[j] / std::max(p[j], 1e-14)) * prob.ops[j];
    return r / prob.total_freq;
}

// rank of the measurement map on the Hermitian operator space
bool map_rank_deficient(const MleProblem& prob, int dim) {
    const int n_coords = dim * dim;
    Eigen::MatrixXd a(static_cast<int>(prob.ops.size()), n_coords);
    for (std::size_t j = 0; j < prob.ops.size(); ++j) {
        int c = 0;
        for (int col = 0; col < dim; ++col) {
            a(static_cast<int>(j), c++) = prob.ops[j](col, col).real();
            for (int row = 0; row < col; ++row) {
                a(static_cast<int>(j), c++) = std::numbers::sqrt2 * prob.ops[j](row, col).real();
                a(static_cast<int>(j), c++) = std::numbers::sqrt2 * prob.ops[j](row, col).imag();
            }
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    return qr.rank() < n_coords;
}

} // namespace

MleResult mle_reconstruct(const TomogramDataset& d, int n_trunc, const MleOptions& opts) {
    d.validate(1.0); // basic finiteness/range checks; noise-scale slack
    if (d.records.empty()) throw data_error("mle_reconstruct: empty dataset");
    const int dim = n_trunc + 1;
    const MleProblem prob = assemble_problem(d, n_trunc);

    MleResult res;
    res.rank_deficient = map_rank_deficient(prob, dim);

    MatrixXcd rho = MatrixXcd::Identity(dim, dim) / dim;
    std::vector<double> p = probabilities(prob, rho);
    double ll = log_likelihood(prob, p);
    res.loglike_trace.push_back(ll);

    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const MatrixXcd r = r_operator(prob, p, dim);

        MatrixXcd cand = r * rho * r;
        cand /= cand.trace().real();
        std::vector<double> p_cand = probabilities(prob, cand);
        double ll_cand = log_likelihood(prob, p_cand);

        // dilute toward the identity until the likelihood is non-decreasing
        double lambda = 0.5;
        while (ll_cand < ll && lambda > 1e-8) {
            const MatrixXcd g =
                (MatrixXcd::Identity(dim, dim) + lambda * r) / (1.0 + lambda);
            cand = g * rho * g;
            cand /= cand.trace().real();
            p_cand = probabilities(prob, cand);
            ll_cand = log_likelihood(prob, p_cand);
            lambda *= 0.5;
        }
        if (ll_cand < ll) break; // no ascent direction left
        const double gain = ll_cand - ll;
        rho = std::move(cand);
        p = std::move(p_cand);
        ll = ll_cand;
        res.loglike_trace.push_back(ll);
        if (gain < opts.min_gain) break;
    }

    // project exactly onto the density-matrix set
    rho = 0.5 * (rho + rho.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
    VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    ev /= ev.sum();
    res.rho.rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    res.rho.rho = 0.5 * (res.rho.rho + res.rho.rho.adjoint()).eval();
    res.iterations = it;
    res.log_likelihood = ll;
    return res;
}

double fidelity(const DensityMatrix& rho, const VectorXcd& target) {
    VectorXcd t = target.normalized();
    const double overlap = std::max(0.0, (t.adjoint() * rho.rho * t)(0).real());
    return std::min(1.0, std::sqrt(overlap));
}

std::vector<double> wigner(const MatrixXcd& rho_osc, const std::vector<Complex>& points) {
    const int dim = static_cast<int>(rho_osc.rows());
    std::vector<double> out;
    out.reserve(points.size());
    for (const Complex& alpha : points) {
        const MatrixXcd d2 = displacement_exact(2.0 * alpha, dim - 1);
        // Tr[rho D(2a) P], parity flips the sign of odd columns
        Complex tr = 0.0;
        for (int m = 0; m < dim; ++m) {
            const double parity = (m % 2 == 0) ? 1.0 : -1.0;
            tr += parity * (rho_osc.row(m) * d2.col(m))(0, 0);
        }
        out.push_back(2.0 / std::numbers::pi * tr.real());
    }
    return out;
}

WignerMap wigner_map(const MatrixXcd& rho_osc, Complex center, double halfwidth, int n_side) {
    WignerMap map;
    map.re_axis.resize(n_side);
    map.im_axis.resize(n_side);
    for (int i = 0; i < n_side; ++i) {
        const double t = n_side == 1 ? 0.0 : -halfwidth + 2.0 * halfwidth * i / (n_side - 1);
        map.re_axis[i] = center.real() + t;
        map.im_axis[i] = center.imag() + t;
    }
    map.values.resize(n_side);
    std::vector<Complex> row(n_side);
    for (int iy = 0; iy < n_side; ++iy) {
        for (int ix = 0; ix < n_side; ++ix) row[ix] = Complex(map.re_axis[ix], map.im_axis[iy]);
        map.values[iy] = wigner(rho_osc, row);
    }
    return map;
}

void write_wigner_csv(std::ostream& os, const WignerMap& map) {
    CsvWriter w(os);
    w.row({"re_alpha", "im_alpha", "wigner"});
    for (std::size_t iy = 0; iy < map.im_axis.size(); ++iy)
        for (std::size_t ix = 0; ix < map.re_axis.size(); ++ix)
            w.row({format_double(map.re_axis[ix]), format_double(map.im_axis[iy]),
                   format_double(map.values[iy][ix])});
}

std::vector<Complex> default_displacement_layout(Complex beta_est, int n_radii, int n_angles,
                                                 double radius) {
    std::vector<Complex> gammas;
    gammas.reserve(static_cast<std::size_t>(n_radii) * n_angles);
    for (int k = 0; k < n_radii; ++k) {
        const double r = radius * (k + 1.0) / n_radii;
        for (int j = 0; j < n_angles; ++j) {
            const double th = 2.0 * std::numbers::pi * j / n_angles;
            gammas.push_back(-beta_est + r * Complex(std::cos(th), std::sin(th)));
        }
    }
    return gammas;
}

TomogramDataset synthesize_coherent_dataset(Complex beta, const std::vector<Complex>& gammas,
                                            int n_range, double mult_sigma, double add_sigma,
                                            Rng& rng) {
    TomogramDataset d;
    d.n_range = n_range;
    d.meta = "synthetic coherent state";
    for (const Complex& g : gammas) {
        const double mu = std::norm(beta + g);
        double pn = std::exp(-mu); // Poisson(mu; 0)
        for (int n = 0; n <= n_range; ++n) {
            if (n > 0) pn *= mu / n;
            double f = pn;
            if (mult_sigma > 0.0) f *= 1.0 + mult_sigma * rng.normal();
            if (add_sigma > 0.0) f += add_sigma * rng.normal();
            d.records.push_back({g, n, std::clamp(f, 0.0, 1.0)});
        }
    }
    return d;
}

} // namespace efres
