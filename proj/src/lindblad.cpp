#include "efres/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>

#include <Eigen/SparseLU>

#include "efres/csv.hpp"

namespace efres {

void check_density_matrix(const DensityMatrix& dm, double trace_tol, double herm_tol,
                          double psd_floor) {
    if (std::abs(dm.rho.trace().real() - 1.0) > trace_tol ||
        std::abs(dm.rho.trace().imag()) > trace_tol)
        throw error("density matrix trace deviates from 1 by " +
                    std::to_string(std::abs(dm.rho.trace().real() - 1.0)));
    if (hermiticity_defect(dm.rho) > herm_tol)
        throw error("density matrix not Hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(dm.rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < psd_floor)
        throw error("density matrix has eigenvalue " +
                    std::to_string(es.eigenvalues().minCoeff()) + " below PSD floor");
}

double pure_dephasing_rate(const SystemParams& p) {
    return 1.0 / p.t2s_us - 0.5 / p.t1_us;
}

std::vector<CollapseChannel> collapse_ops(const SystemParams& p, double n_thermal) {
    p.validate();
    if (n_thermal < 0.0) n_thermal = p.n_thermal;
    const double gamma_phi = pure_dephasing_rate(p);
    if (gamma_phi < -1e-12)
        throw physicality_error("negative pure-dephasing rate: T2* exceeds 2*T1");
    std::vector<CollapseChannel> ch;
    const auto a = oscillator_lowering(p);
    const auto aq = transmon_lowering(p);
    const double kappa = 1.0 / p.t_osc_us;
    ch.push_back({a.entries, kappa * (1.0 + n_thermal), "oscillator decay"});
    if (n_thermal > 0.0)
        ch.push_back({a.entries.adjoint(), kappa * n_thermal, "oscillator thermal excitation"});
    ch.push_back({aq.entries, 1.0 / p.t1_us, "transmon decay"});
    ch.push_back({aq.entries.adjoint() * aq.entries, 2.0 * std::max(0.0, gamma_phi),
                  "transmon dephasing"});
    return ch;
}

LindbladModel rotating_frame(const SystemParams& p, double nu_drive_ghz) {
    LindbladModel m;
    m.params = p;
    m.nu_drive_ghz = nu_drive_ghz;
    m.h_rot = build_hamiltonian(p);
    m.h_rot.entries -= nu_drive_ghz * excitation_number(p).entries;
    m.collapses = collapse_ops(p);
    return m;
}

LindbladModel add_drive(LindbladModel m, double eps_d_mhz, double phase_rad) {
    if (eps_d_mhz < 0.0) throw invalid_parameter_error("drive amplitude must be >= 0");
    if (eps_d_mhz == 0.0) return m;
    const auto a = oscillator_lowering(m.params);
    const Complex i_unit(0.0, 1.0);
    const Complex phase = std::exp(i_unit * phase_rad);
    const double eps_ghz = eps_d_mhz * 1e-3;
    m.h_rot.entries += eps_ghz * (phase * a.entries + std::conj(phase) * a.entries.adjoint());
    m.drive_eps_mhz = eps_d_mhz;
    m.drive_phase_rad = phase_rad;
    return m;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<Complex>>;

SpMat sparsify(const MatrixXcd& a) {
    const int d = static_cast<int>(a.rows());
    Triplets t;
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            if (a(i, j) != Complex(0.0, 0.0)) t.emplace_back(i, j, a(i, j));
    SpMat s(d, d);
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

// out += factor * kron(A, B) on the d^2 space (column-stacked rho)
void kron_accumulate(Triplets& out, const SpMat& a, const SpMat& b, Complex factor) {
    const int d = static_cast<int>(b.rows());
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SpMat::InnerIterator ita(a, ka); ita; ++ita)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SpMat::InnerIterator itb(b, kb); itb; ++itb)
                    out.emplace_back(ita.row() * d + itb.row(), ita.col() * d + itb.col(),
                                     factor * ita.value() * itb.value());
}

} // namespace

SpMat liouvillian_matrix(const LindbladModel& m) {
    const int d = m.h_rot.dim();
    const SpMat eye = sparsify(MatrixXcd::Identity(d, d));
    const SpMat h = sparsify(m.h_rot.entries);
    const SpMat h_t = sparsify(m.h_rot.entries.transpose());

    Triplets trip;
    const Complex minus_i(0.0, -rad_per_us_per_ghz);
    // -i [H, rho]  ->  -i (I (x) H - H^T (x) I), H in GHz
    kron_accumulate(trip, eye, h, minus_i);
    kron_accumulate(trip, h_t, eye, -minus_i);

    for (const auto& ch : m.collapses) {
        if (ch.rate_per_us == 0.0) continue;
        const SpMat c = sparsify(ch.op);
        const SpMat c_conj = sparsify(ch.op.conjugate());
        const MatrixXcd cdc_dense = ch.op.adjoint() * ch.op;
        const SpMat cdc = sparsify(cdc_dense);
        const SpMat cdc_t = sparsify(cdc_dense.transpose());
        const Complex g(ch.rate_per_us, 0.0);
        kron_accumulate(trip, c_conj, c, g);            // C rho C†
        kron_accumulate(trip, eye, cdc, -0.5 * g);      // -1/2 C†C rho
        kron_accumulate(trip, cdc_t, eye, -0.5 * g);    // -1/2 rho C†C
    }

    SpMat l(d * d, d * d);
    l.setFromTriplets(trip.begin(), trip.end());
    return l;
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640, E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

} // namespace

std::vector<DensityMatrix> evolve(const LindbladModel& m, const DensityMatrix& rho0,
                                  const std::vector<double>& t_grid_us,
                                  const EvolveOptions& opts) {
    if (t_grid_us.empty()) return {};
    if (t_grid_us.front() < 0.0)
        throw invalid_parameter_error("evolve: t_grid must start at t >= 0");
    for (std::size_t i = 1; i < t_grid_us.size(); ++i)
        if (t_grid_us[i] <= t_grid_us[i - 1])
            throw invalid_parameter_error("evolve: t_grid must be strictly ascending");
    const int d = m.h_rot.dim();
    if (rho0.dim() != d) throw invalid_parameter_error("evolve: state dimension mismatch");

    const SpMat l = liouvillian_matrix(m);
    VectorXcd y = rho0.rho.reshaped();
    double t = 0.0;
    if (t_grid_us.front() == 0.0 && t_grid_us.size() == 1) return {rho0};

    std::vector<DensityMatrix> out;
    std::size_t next = 0;
    if (t_grid_us.front() == 0.0) {
        out.push_back(rho0);
        next = 1;
    }

    double h = opts.initial_step_us;
    VectorXcd k1 = l * y, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
    const double t_end = t_grid_us.back();

    while (next < t_grid_us.size()) {
        bool hit_output = false;
        if (t + h >= t_grid_us[next] - 1e-15) {
            h = t_grid_us[next] - t;
            hit_output = true;
        }
        ytmp = y + h * (A21 * k1);
        k2 = l * ytmp;
        ytmp = y + h * (A31 * k1 + A32 * k2);
        k3 = l * ytmp;
        ytmp = y + h * (A41 * k1 + A42 * k2 + A43 * k3);
        k4 = l * ytmp;
        ytmp = y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4);
        k5 = l * ytmp;
        ytmp = y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
        k6 = l * ytmp;
        ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        k7 = l * ynew;
        yerr = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

        // scaled RMS error norm
        double err2 = 0.0;
        const double ynorm = std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < yerr.size(); ++i) {
            const double sc = opts.atol + opts.rtol * ynorm;
            const double e = std::abs(yerr(i)) / sc;
            err2 += e * e;
        }
        const double err = std::sqrt(err2 / static_cast<double>(yerr.size()));

        if (err <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7); // FSAL
            if (hit_output) {
                DensityMatrix dm{Eigen::Map<MatrixXcd>(y.data(), d, d)};
                const double drift = std::abs(dm.rho.trace().real() - 1.0);
                if (drift > opts.trace_drift_per_us * std::max(1.0, t))
                    throw error("evolve: trace drift " + std::to_string(drift) + " at t=" +
                                std::to_string(t) + " us exceeds bound");
                out.push_back(std::move(dm));
                ++next;
            }
        }
        const double factor = (err == 0.0) ? 5.0 : 0.9 * std::pow(err, -0.2);
        h *= std::clamp(factor, 0.2, 5.0);
        h = std::min(h, t_end - t + 1e-30);
        if (h < opts.min_step_us && t < t_end)
            throw stiffness_error("evolve: step size underflow at t=" + std::to_string(t) + " us");
    }
    return out;
}

namespace {

// coordinate layout: column j holds (s,a) pairs for i<j then the diagonal,
// base offset j^2, so the diagonal of (j,j) sits at (j+1)^2 - 1
int herm_coord_s(int i, int j) { return j * j + 2 * i; }
int herm_coord_a(int i, int j) { return j * j + 2 * i + 1; }
int herm_coord_diag(int j) { return (j + 1) * (j + 1) - 1; }

SpMat hermitian_basis_map(int d) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Triplets t;
    t.reserve(2 * d * d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < j; ++i) {
            t.emplace_back(i + d * j, herm_coord_s(i, j), Complex(inv_sqrt2, 0.0));
            t.emplace_back(j + d * i, herm_coord_s(i, j), Complex(inv_sqrt2, 0.0));
            t.emplace_back(i + d * j, herm_coord_a(i, j), Complex(0.0, inv_sqrt2));
            t.emplace_back(j + d * i, herm_coord_a(i, j), Complex(0.0, -inv_sqrt2));
        }
        t.emplace_back(j + d * j, herm_coord_diag(j), Complex(1.0, 0.0));
    }
    SpMat q(d * d, d * d);
    q.setFromTriplets(t.begin(), t.end());
    return q;
}

} // namespace

MatrixXcd HermitianBasisLiouvillian::unpack(const Eigen::VectorXd& x) const {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    MatrixXcd rho(dim, dim);
    for (int j = 0; j < dim; ++j) {
        rho(j, j) = x(herm_coord_diag(j));
        for (int i = 0; i < j; ++i) {
            const Complex v(inv_sqrt2 * x(herm_coord_s(i, j)), inv_sqrt2 * x(herm_coord_a(i, j)));
            rho(i, j) = v;
            rho(j, i) = std::conj(v);
        }
    }
    return rho;
}

Eigen::VectorXd HermitianBasisLiouvillian::pack(const MatrixXcd& rho) const {
    const double sqrt2 = std::sqrt(2.0);
    Eigen::VectorXd x(dim * dim);
    for (int j = 0; j < dim; ++j) {
        x(herm_coord_diag(j)) = rho(j, j).real();
        for (int i = 0; i < j; ++i) {
            x(herm_coord_s(i, j)) = sqrt2 * rho(i, j).real();
            x(herm_coord_a(i, j)) = sqrt2 * rho(i, j).imag();
        }
    }
    return x;
}

HermitianBasisLiouvillian hermitian_liouvillian(const LindbladModel& m) {
    const int d = m.h_rot.dim();
    const SpMat l = liouvillian_matrix(m);
    const SpMat q = hermitian_basis_map(d);
    const SpMat lq = l * q;
    const SpMat lr_c = q.adjoint() * lq;

    HermitianBasisLiouvillian out;
    out.dim = d;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(lr_c.nonZeros());
    double max_imag = 0.0;
    double max_abs = 0.0;
    for (int k = 0; k < lr_c.outerSize(); ++k)
        for (SpMat::InnerIterator it(lr_c, k); it; ++it) {
            max_imag = std::max(max_imag, std::abs(it.value().imag()));
            max_abs = std::max(max_abs, std::abs(it.value().real()));
            if (it.value().real() != 0.0)
                t.emplace_back(it.row(), it.col(), it.value().real());
        }
    if (max_imag > 1e-9 * std::max(1.0, max_abs))
        throw error("hermitian_liouvillian: generator does not preserve Hermiticity");
    out.l_real.resize(d * d, d * d);
    out.l_real.setFromTriplets(t.begin(), t.end());
    out.diag_coords.resize(d);
    for (int j = 0; j < d; ++j) out.diag_coords[j] = herm_coord_diag(j);
    return out;
}

namespace {

// Steady state by restarted GMRES, right-preconditioned with the exact
// inverses of the transmon-sector-diagonal Liouvillian blocks. The blocks
// are cavity-sized with 2D-grid sparsity, so their LU factors stay small;
// the neglected couplings (exchange hops, T1 refill) are weak against the
// sector detunings and decay, which is what makes the iteration contract.
DensityMatrix steady_state_sector_gmres(const LindbladModel& m, const SteadyStateOptions& opts) {
    const int d = m.h_rot.dim();
    const int levels = m.params.levels;
    const int n2 = d * d;

    // Rotate everything into the eigenbasis of the excitation-conserving part
    // of H_rot (the drive does not conserve N and is rotated as-is). The
    // conserving part diagonalizes block by block, the rotated drive and jump
    // operators stay sparse between adjacent rungs. In the dressed basis the
    // strong ef-resonant hybridization is gone; what remains between ladder
    // sectors are weak dissipative cross rates and epsilon-small drive leaks.
    const auto basis = tensor_basis(levels, m.params.n_max);
    MatrixXcd h_cons = m.h_rot.entries;
    MatrixXcd h_rest = MatrixXcd::Zero(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            if (basis[i].photons + basis[i].level != basis[j].photons + basis[j].level) {
                h_rest(i, j) = h_cons(i, j);
                h_cons(i, j) = 0.0;
            }
    OperatorMatrix h_cons_op{std::move(h_cons), basis};
    const auto ex_blocks = excitation_blocks(h_cons_op, m.params);
    MatrixXcd u = MatrixXcd::Zero(d, d);
    VectorXd dressed_energy(d);
    std::vector<int> slot_of(d); // dressed column -> index within its rung
    {
        int col = 0;
        for (const auto& b : ex_blocks) {
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(b.matrix);
            for (int k = 0; k < b.size(); ++k, ++col) {
                dressed_energy(col) = es.eigenvalues()(k);
                slot_of[col] = k;
                for (int i = 0; i < b.size(); ++i)
                    u(tensor_index(levels, b.basis[i].level, b.basis[i].photons), col) =
                        es.eigenvectors()(i, k);
            }
        }
    }

    LindbladModel md = m;
    md.h_rot.entries = MatrixXcd(dressed_energy.cast<Complex>().asDiagonal()) +
                       u.adjoint() * h_rest * u;
    for (auto& ch : md.collapses) ch.op = u.adjoint() * ch.op * u;

    // Preconditioner blocks over dressed-slot pairs: the joint population
    // group {(k,k)} carries the slow drive-dephase-refill circulation, each
    // coherence pair (k_i != k_j) is detuned by the ladder splittings.
    const int max_slot = levels;
    std::vector<int> coh_id(max_slot * max_slot, -1);
    {
        int next = 0;
        for (int ki = 0; ki < max_slot; ++ki)
            for (int kj = 0; kj < max_slot; ++kj)
                if (ki != kj) coh_id[ki * max_slot + kj] = next++;
    }

    // enumerate vec coordinates sector by sector to build the permutation
    std::vector<int> perm(n2, -1);
    std::vector<std::pair<int, int>> blocks; // offset, size
    std::vector<int> block_index(n2, -1);
    {
        int pos = 0;
        // population group first
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i)
                if (slot_of[i] == slot_of[j]) {
                    perm[i + d * j] = pos;
                    block_index[pos] = 0;
                    ++pos;
                }
        blocks.emplace_back(0, pos);
        for (int s = 0; s < max_slot * max_slot; ++s) {
            const int start = pos;
            for (int j = 0; j < d; ++j)
                for (int i = 0; i < d; ++i)
                    if (slot_of[i] != slot_of[j] &&
                        coh_id[slot_of[i] * max_slot + slot_of[j]] == s) {
                        perm[i + d * j] = pos;
                        block_index[pos] = static_cast<int>(blocks.size());
                        ++pos;
                    }
            if (pos > start) blocks.emplace_back(start, pos - start);
        }
    }
    const int n_blocks = static_cast<int>(blocks.size());
    const auto block_of = [&](int pidx) { return block_index[pidx]; };

    const SpMat l = liouvillian_matrix(md);
    Triplets ltrip;
    ltrip.reserve(l.nonZeros() + d);
    std::vector<Triplets> diag_trips(n_blocks);
    const int trace_row = perm[0];
    for (int k = 0; k < l.outerSize(); ++k)
        for (SpMat::InnerIterator it(l, k); it; ++it) {
            if (perm[it.row()] == trace_row) continue; // replaced by the trace row
            const int pr = perm[it.row()], pc = perm[it.col()];
            ltrip.emplace_back(pr, pc, it.value());
            const int br = block_of(pr), bc = block_of(pc);
            if (br == bc)
                diag_trips[br].emplace_back(pr - blocks[br].first, pc - blocks[bc].first,
                                            it.value());
        }
    for (int k = 0; k < d; ++k) {
        const int pc = perm[k * (d + 1)]; // population group by construction
        ltrip.emplace_back(trace_row, pc, Complex(1.0, 0.0));
        diag_trips[0].emplace_back(trace_row, pc, Complex(1.0, 0.0));
    }
    SpMat lt(n2, n2);
    lt.setFromTriplets(ltrip.begin(), ltrip.end());
    lt.makeCompressed();

    std::vector<std::unique_ptr<Eigen::SparseLU<SpMat>>> block_lu(n_blocks);
    for (int s = 0; s < n_blocks; ++s) {
        SpMat bm(blocks[s].second, blocks[s].second);
        bm.setFromTriplets(diag_trips[s].begin(), diag_trips[s].end());
        bm.makeCompressed();
        block_lu[s] = std::make_unique<Eigen::SparseLU<SpMat>>();
        block_lu[s]->compute(bm);
        if (block_lu[s]->info() != Eigen::Success)
            throw degeneracy_error("steady_state: preconditioner block is singular");
    }
    const auto precond = [&](const VectorXcd& r) {
        VectorXcd z(n2);
        for (int s = 0; s < n_blocks; ++s)
            z.segment(blocks[s].first, blocks[s].second) =
                block_lu[s]->solve(r.segment(blocks[s].first, blocks[s].second));
        return z;
    };

    VectorXcd b = VectorXcd::Zero(n2);
    b(trace_row) = 1.0;

    // restarted GMRES with right preconditioning
    const int restart = opts.gmres_restart;
    VectorXcd x = VectorXcd::Zero(n2);
    double bnorm = b.norm();
    const double tol = 1e-13;
    const bool verbose = std::getenv("EFRES_GMRES_VERBOSE") != nullptr;
    bool converged = false;
    for (int outer = 0; outer < opts.gmres_max_outer && !converged; ++outer) {
        VectorXcd r = b - lt * x;
        double beta = r.norm();
        if (verbose)
            std::fprintf(stderr, "gmres outer %d: |r| = %.3e\n", outer, beta);
        if (beta <= tol * bnorm) {
            converged = true;
            break;
        }
        std::vector<VectorXcd> v;
        v.reserve(restart + 1);
        v.push_back(r / beta);
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(restart + 1, restart);
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(restart + 1);
        g(0) = beta;
        std::vector<Complex> cs(restart), sn(restart);
        int j = 0;
        for (; j < restart; ++j) {
            VectorXcd w = lt * precond(v[j]);
            for (int i = 0; i <= j; ++i) {
                h(i, j) = v[i].dot(w);
                w -= h(i, j) * v[i];
            }
            const double hj1 = w.norm();
            // Givens rotations keep a running residual estimate
            for (int i = 0; i < j; ++i) {
                const Complex t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
                h(i + 1, j) = -std::conj(sn[i]) * h(i, j) + std::conj(cs[i]) * h(i + 1, j);
                h(i, j) = t;
            }
            const double denom = std::sqrt(std::norm(h(j, j)) + hj1 * hj1);
            if (denom == 0.0) {
                ++j;
                break;
            }
            cs[j] = std::conj(h(j, j)) / denom;
            sn[j] = hj1 / denom;
            h(j, j) = denom;
            g(j + 1) = -std::conj(sn[j]) * g(j);
            g(j) = cs[j] * g(j);
            const double res = std::abs(g(j + 1));
            if (verbose && (j % 10 == 9 || res <= tol * bnorm))
                std::fprintf(stderr, "  inner %d: est |r| = %.3e\n", j, res);
            if (res <= tol * bnorm || hj1 == 0.0) {
                ++j;
                break;
            }
            v.push_back(w / hj1);
        }
        // back substitution on the triangular system
        const int k = std::max(1, j);
        Eigen::VectorXcd y = Eigen::VectorXcd::Zero(k);
        for (int i = k - 1; i >= 0; --i) {
            Complex acc = g(i);
            for (int l2 = i + 1; l2 < k; ++l2) acc -= h(i, l2) * y(l2);
            y(i) = acc / h(i, i);
        }
        VectorXcd u = VectorXcd::Zero(n2);
        for (int i = 0; i < k && i < static_cast<int>(v.size()); ++i) u += y(i) * v[i];
        x += precond(u);
        if ((b - lt * x).norm() <= tol * bnorm) converged = true;
    }
    if (!converged)
        throw degeneracy_error("steady_state: sector GMRES did not converge "
                               "(degenerate kernel or pathological parameters)");

    // residual of the physical generator (all rows except the replaced one)
    double l_norm = 0.0;
    {
        VectorXd rowsum = VectorXd::Zero(n2);
        for (int k2 = 0; k2 < lt.outerSize(); ++k2)
            for (SpMat::InnerIterator it(lt, k2); it; ++it)
                rowsum(it.row()) += std::abs(it.value());
        l_norm = rowsum.maxCoeff();
    }
    VectorXcd resid = lt * x - b;
    resid(trace_row) = 0.0;
    const double residual = resid.cwiseAbs().maxCoeff();
    if (!(residual < opts.residual_rel * l_norm * std::max(1.0, x.cwiseAbs().maxCoeff())))
        throw degeneracy_error("steady_state: residual above bound after GMRES");

    // un-permute, then rotate back from the dressed basis
    DensityMatrix dm{MatrixXcd::Zero(d, d)};
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) dm.rho(i, j) = x(perm[i + d * j]);
    dm.rho = (u * dm.rho * u.adjoint()).eval();
    dm.rho = 0.5 * (dm.rho + dm.rho.adjoint()).eval();
    dm.rho /= dm.rho.trace().real();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(dm.rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < opts.psd_floor)
        throw degeneracy_error("steady_state: solution not PSD (min eigenvalue " +
                               std::to_string(es.eigenvalues().minCoeff()) + ")");
    return dm;
}

} // namespace

DensityMatrix steady_state(const LindbladModel& m, const SteadyStateOptions& opts) {
    bool dissipative = false;
    for (const auto& ch : m.collapses)
        if (ch.rate_per_us > 0.0) dissipative = true;
    if (!dissipative)
        throw invalid_parameter_error("steady_state: needs at least one dissipative channel");

    if (opts.solver == SteadySolver::sector_gmres ||
        (opts.solver == SteadySolver::automatic && m.h_rot.dim() > 200))
        return steady_state_sector_gmres(m, opts);

    const auto hl = hermitian_liouvillian(m);
    const int d = hl.dim;
    const int n2 = d * d;

    // replace the first row (a diagonal coordinate would also do) with the
    // trace functional
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(hl.l_real.nonZeros() + d);
    for (int k = 0; k < hl.l_real.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(hl.l_real, k); it; ++it)
            if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
    for (int coord : hl.diag_coords) trip.emplace_back(0, coord, 1.0);
    Eigen::SparseMatrix<double> lt(n2, n2);
    lt.setFromTriplets(trip.begin(), trip.end());
    lt.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(lt);
    if (lu.info() != Eigen::Success)
        throw degeneracy_error("steady_state: Liouvillian kernel is not one-dimensional "
                               "(factorization failed)");

    Eigen::VectorXd b = Eigen::VectorXd::Zero(n2);
    b(0) = 1.0;
    Eigen::VectorXd x = lu.solve(b);
    for (int it = 0; it < opts.max_refine; ++it) {
        Eigen::VectorXd r = b - lt * x;
        if (r.norm() < 1e-16 * std::max(1.0, x.norm())) break;
        x += lu.solve(r);
    }

    // residual against the unmodified generator, scaled by its row norm
    double l_norm = 0.0;
    {
        VectorXd rowsum = VectorXd::Zero(n2);
        for (int k = 0; k < hl.l_real.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(hl.l_real, k); it; ++it)
                rowsum(it.row()) += std::abs(it.value());
        l_norm = rowsum.maxCoeff();
    }
    const double residual = (hl.l_real * x).cwiseAbs().maxCoeff();
    if (!(residual < opts.residual_rel * l_norm * std::max(1.0, x.cwiseAbs().maxCoeff())))
        throw degeneracy_error("steady_state: residual " + std::to_string(residual) +
                               " above bound (kernel degenerate or solver failure)");

    DensityMatrix dm{hl.unpack(x)};
    dm.rho /= dm.rho.trace().real();

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(dm.rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < opts.psd_floor)
        throw degeneracy_error("steady_state: solution not PSD (min eigenvalue " +
                               std::to_string(es.eigenvalues().minCoeff()) + ")");
    return dm;
}

DriveCalibration DriveCalibration::linear_cavity_anchor(const SystemParams& p) {
    DriveCalibration cal;
    // <n> = (2 Omega / kappa)^2 with Omega = 2 pi eps[MHz] rad/us; <n> = 1
    // at resonance fixes eps_ref = kappa / (4 pi).
    const double kappa = 1.0 / p.t_osc_us;
    cal.eps_ref_mhz = kappa / (4.0 * std::numbers::pi);
    return cal;
}

double DriveCalibration::eps_d_mhz(double p1_dbm) const {
    return eps_ref_mhz * std::pow(10.0, (p1_dbm - p_ref_dbm) / 20.0);
}

double drive_from_dbm(double p1_dbm, const SystemParams& p) {
    return DriveCalibration::linear_cavity_anchor(p).eps_d_mhz(p1_dbm);
}

DensityMatrix ground_state(const SystemParams& p) {
    const int d = p.levels * (p.n_max + 1);
    DensityMatrix dm{MatrixXcd::Zero(d, d)};
    dm.rho(0, 0) = 1.0;
    return dm;
}

double mean_photons(const DensityMatrix& dm, const SystemParams& p) {
    const auto basis = tensor_basis(p.levels, p.n_max);
    double n = 0.0;
    for (int i = 0; i < dm.dim(); ++i) n += basis[i].photons * dm.rho(i, i).real();
    return n;
}

VectorXd photon_distribution(const DensityMatrix& dm, const SystemParams& p) {
    VectorXd pn = VectorXd::Zero(p.n_max + 1);
    const auto basis = tensor_basis(p.levels, p.n_max);
    for (int i = 0; i < dm.dim(); ++i) pn(basis[i].photons) += dm.rho(i, i).real();
    return pn;
}

MatrixXcd reduced_oscillator(const DensityMatrix& dm, const SystemParams& p) {
    MatrixXcd r = MatrixXcd::Zero(p.n_max + 1, p.n_max + 1);
    for (int nr = 0; nr <= p.n_max; ++nr)
        for (int nc = 0; nc <= p.n_max; ++nc)
            for (int x = 0; x < p.levels; ++x)
                r(nr, nc) += dm.rho(tensor_index(p.levels, x, nr), tensor_index(p.levels, x, nc));
    return r;
}

Complex oscillator_amplitude(const DensityMatrix& dm, const SystemParams& p) {
    const auto a = oscillator_lowering(p);
    return (a.entries * dm.rho).trace();
}

void write_trajectory_csv(std::ostream& os, const std::string& x_name,
                          const std::vector<double>& x,
                          const std::vector<DensityMatrix>& states, const SystemParams& p,
                          int n_show) {
    CsvWriter w(os);
    std::vector<std::string> head{x_name, "n_mean", "purity"};
    for (int n = 0; n <= n_show; ++n) head.push_back("p" + std::to_string(n));
    w.row(head);
    for (std::size_t i = 0; i < states.size(); ++i) {
        std::vector<std::string> cells{format_double(x[i]),
                                       format_double(mean_photons(states[i], p)),
                                       format_double(states[i].purity())};
        const VectorXd pn = photon_distribution(states[i], p);
        for (int n = 0; n <= n_show && n <= p.n_max; ++n)
            cells.push_back(format_double(pn(n)));
        w.row(cells);
    }
}

} // namespace efres
