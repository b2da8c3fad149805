#include "efres/operators.hpp"

#include <algorithm>
#include <cmath>

namespace efres {

char level_char(int level) {
    static const char names[] = {'g', 'e', 'f', 'h'};
    if (level < 0 || level > 3) throw invalid_parameter_error("level index out of range");
    return names[level];
}

std::string label_string(const BasisLabel& b) {
    return std::string(1, level_char(b.level)) + std::to_string(b.photons);
}

std::vector<BasisLabel> tensor_basis(int levels, int n_max) {
    std::vector<BasisLabel> basis;
    basis.reserve(static_cast<std::size_t>(levels) * (n_max + 1));
    for (int n = 0; n <= n_max; ++n)
        for (int x = 0; x < levels; ++x)
            basis.push_back({x, n});
    return basis;
}

OperatorMatrix OperatorMatrix::with_tensor_basis(MatrixXcd m, int levels, int n_max) {
    OperatorMatrix op;
    op.entries = std::move(m);
    op.basis = tensor_basis(levels, n_max);
    if (op.dim() != levels * (n_max + 1))
        throw invalid_parameter_error("matrix dimension does not match basis");
    return op;
}

MatrixXcd mls_lowering(int levels) {
    if (levels != 3 && levels != 4)
        throw invalid_parameter_error("mls_lowering: level count must be 3 or 4");
    MatrixXcd a = MatrixXcd::Zero(levels, levels);
    for (int k = 1; k < levels; ++k)
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

MatrixXcd fock_lowering(int n_max) {
    const int dim = n_max + 1;
    MatrixXcd a = MatrixXcd::Zero(dim, dim);
    for (int n = 1; n <= n_max; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

namespace {

// kron(osc, transmon) in the (n asc, level asc) order
MatrixXcd tensor_product(const MatrixXcd& osc, const MatrixXcd& q) {
    const int no = static_cast<int>(osc.rows());
    const int nq = static_cast<int>(q.rows());
    MatrixXcd out(no * nq, no * nq);
    for (int i = 0; i < no; ++i)
        for (int j = 0; j < no; ++j)
            out.block(i * nq, j * nq, nq, nq) = osc(i, j) * q;
    return out;
}

} // namespace

OperatorMatrix oscillator_lowering(const SystemParams& p) {
    p.validate();
    return OperatorMatrix::with_tensor_basis(
        tensor_product(fock_lowering(p.n_max), MatrixXcd::Identity(p.levels, p.levels)),
        p.levels, p.n_max);
}

OperatorMatrix transmon_lowering(const SystemParams& p) {
    p.validate();
    return OperatorMatrix::with_tensor_basis(
        tensor_product(MatrixXcd::Identity(p.n_max + 1, p.n_max + 1), mls_lowering(p.levels)),
        p.levels, p.n_max);
}

OperatorMatrix excitation_number(const SystemParams& p) {
    p.validate();
    const int dim = p.levels * (p.n_max + 1);
    MatrixXcd n = MatrixXcd::Zero(dim, dim);
    const auto basis = tensor_basis(p.levels, p.n_max);
    for (int i = 0; i < dim; ++i)
        n(i, i) = static_cast<double>(basis[i].photons + basis[i].level);
    return OperatorMatrix::with_tensor_basis(std::move(n), p.levels, p.n_max);
}

OperatorMatrix build_hamiltonian(const SystemParams& p) {
    p.validate();
    const int dim = p.levels * (p.n_max + 1);
    MatrixXcd h = MatrixXcd::Zero(dim, dim);
    const auto basis = tensor_basis(p.levels, p.n_max);

    // diagonal: oscillator photons + transmon level energies
    for (int i = 0; i < dim; ++i)
        h(i, i) = p.nu_o_ghz * basis[i].photons + p.transmon_level_ghz(basis[i].level);

    // exchange coupling g_O (a† aq + a aq†)
    const MatrixXcd aq = mls_lowering(p.levels);
    for (int n = 1; n <= p.n_max; ++n) {
        const double amp_osc = std::sqrt(static_cast<double>(n));
        for (int x = 0; x + 1 < p.levels; ++x) {
            // <x+0, n| a† aq |x+1, n-1>
            const double amp = p.g_o_ghz() * amp_osc * aq(x, x + 1).real();
            const int row = tensor_index(p.levels, x, n);
            const int col = tensor_index(p.levels, x + 1, n - 1);
            h(row, col) += amp;
            h(col, row) += amp;
        }
    }
    return OperatorMatrix::with_tensor_basis(std::move(h), p.levels, p.n_max);
}

std::vector<ExcitationBlock> excitation_blocks(const OperatorMatrix& h, const SystemParams& p) {
    if (h.dim() != p.levels * (p.n_max + 1))
        throw invalid_parameter_error("Hamiltonian dimension does not match params");
    std::vector<ExcitationBlock> blocks;
    const int n_total = p.n_max + p.levels - 1;
    blocks.reserve(n_total + 1);
    for (int total = 0; total <= n_total; ++total) {
        ExcitationBlock b;
        b.total_excitation = total;
        b.truncation_edge = total > p.n_max;
        for (int x = 0; x < p.levels && x <= total; ++x) {
            const int n = total - x;
            if (n <= p.n_max) b.basis.push_back({x, n});
        }
        const int sz = static_cast<int>(b.basis.size());
        b.matrix.resize(sz, sz);
        for (int i = 0; i < sz; ++i)
            for (int j = 0; j < sz; ++j)
                b.matrix(i, j) = h.entries(tensor_index(p.levels, b.basis[i].level, b.basis[i].photons),
                                           tensor_index(p.levels, b.basis[j].level, b.basis[j].photons));
        blocks.push_back(std::move(b));
    }
    return blocks;
}

MatrixXcd reassemble_blocks(const std::vector<ExcitationBlock>& blocks, const SystemParams& p) {
    const int dim = p.levels * (p.n_max + 1);
    MatrixXcd h = MatrixXcd::Zero(dim, dim);
    for (const auto& b : blocks) {
        const int sz = b.size();
        for (int i = 0; i < sz; ++i)
            for (int j = 0; j < sz; ++j)
                h(tensor_index(p.levels, b.basis[i].level, b.basis[i].photons),
                  tensor_index(p.levels, b.basis[j].level, b.basis[j].photons)) = b.matrix(i, j);
    }
    return h;
}

MatrixXcd displacement_working(Complex gamma, int n_work) {
    const int dim = n_work + 1;
    // gamma a† - gamma* a is anti-Hermitian; exponentiate through the
    // Hermitian generator B = -i(gamma a† - gamma* a), D = exp(iB).
    MatrixXcd b = MatrixXcd::Zero(dim, dim);
    const Complex i_unit(0.0, 1.0);
    for (int n = 1; n < dim; ++n) {
        const double s = std::sqrt(static_cast<double>(n));
        b(n, n - 1) = -i_unit * gamma * s;      // -i * gamma * a†
        b(n - 1, n) = i_unit * std::conj(gamma) * s;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(b);
    VectorXcd phases(dim);
    for (int k = 0; k < dim; ++k)
        phases(k) = std::exp(i_unit * es.eigenvalues()(k));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXcd displacement_operator(Complex gamma, int n_max, int n_work) {
    const int needed = n_max + static_cast<int>(std::ceil(10.0 * std::abs(gamma)));
    if (n_work < needed)
        throw truncation_error("displacement_operator: n_work " + std::to_string(n_work) +
                               " below guard " + std::to_string(needed));
    return displacement_working(gamma, n_work).topLeftCorner(n_max + 1, n_max + 1);
}

MatrixXcd displacement_exact(Complex gamma, int n_max) {
    const int dim = n_max + 1;
    MatrixXcd d(dim, dim);
    const double x = std::norm(gamma);
    if (std::abs(gamma) == 0.0) return MatrixXcd::Identity(dim, dim);
    // <m|D|n> = sqrt(n!/m!) gamma^(m-n) e^{-x/2} L_n^{(m-n)}(x)  for m >= n
    // <m|D|n> = sqrt(m!/n!) (-conj(gamma))^(n-m) e^{-x/2} L_m^{(n-m)}(x)  otherwise
    for (int a = 0; a <= n_max; ++a) {
        // associated Laguerre sequence L_k^{(a)}(x), k = 0..n_max
        std::vector<double> lag(n_max + 1);
        lag[0] = 1.0;
        if (n_max >= 1) lag[1] = 1.0 + a - x;
        for (int k = 1; k + 1 <= n_max; ++k)
            lag[k + 1] = ((2.0 * k + 1.0 + a - x) * lag[k] - (k + a) * lag[k - 1]) / (k + 1.0);

        for (int n = 0; n + a <= n_max; ++n) {
            const int m = n + a;
            // prefactor sqrt(n!/m!) |gamma|^a with phase gamma^a, safe in logs
            double logpref = -0.5 * x + a * std::log(std::abs(gamma));
            logpref += 0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0));
            const Complex phase = std::pow(gamma / std::abs(gamma), a);
            const Complex val = std::exp(logpref) * phase * lag[n];
            d(m, n) = val;
            // <n|D|m> from D(-gamma)† relation: <n|D(g)|m> = conj(<m|D(-g)|n>)
            if (a > 0) {
                const Complex phase2 = std::pow(-std::conj(gamma) / std::abs(gamma), a);
                d(n, m) = std::exp(logpref) * phase2 * lag[n];
            }
        }
    }
    return d;
}

double hermiticity_defect(const MatrixXcd& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

} // namespace efres
