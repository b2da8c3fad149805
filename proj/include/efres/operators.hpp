#ifndef EFRES_OPERATORS_HPP
#define EFRES_OPERATORS_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "efres/system_params.hpp"

namespace efres {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;

// One basis state |x,n>: transmon level x (0=g,1=e,2=f,3=h) and photon number n.
struct BasisLabel {
    int level = 0;
    int photons = 0;

    bool operator==(const BasisLabel&) const = default;
};

char level_char(int level);
std::string label_string(const BasisLabel& b);

// Complex square matrix carrying its (transmon level x photon number) basis.
// Global ordering is photon number ascending, then transmon level ascending,
// so index = n*levels + level.
struct OperatorMatrix {
    MatrixXcd entries;
    std::vector<BasisLabel> basis;

    int dim() const { return static_cast<int>(entries.rows()); }

    static OperatorMatrix with_tensor_basis(MatrixXcd m, int levels, int n_max);
};

// Index of |level, n> in the global tensor order.
inline int tensor_index(int levels, int level, int photons) {
    return photons * levels + level;
}

std::vector<BasisLabel> tensor_basis(int levels, int n_max);

// Hermitian submatrix at fixed total excitation N = n + level, basis ordered
// as {|gN>, |e(N-1)>, |f(N-2)>, ...}.
struct ExcitationBlock {
    int total_excitation = 0;
    std::vector<BasisLabel> basis;
    MatrixXcd matrix;
    bool truncation_edge = false; // N > n_max: photon states missing

    int size() const { return static_cast<int>(matrix.rows()); }
};

// Lowering operator of the transmon factor alone: harmonic matrix elements
// sqrt(k) restricted to `levels` states. levels must be 3 or 4.
MatrixXcd mls_lowering(int levels);

// Truncated oscillator annihilation operator on n_max+1 Fock states.
MatrixXcd fock_lowering(int n_max);

// Full tensor-space operators, global order (n ascending, level ascending).
OperatorMatrix oscillator_lowering(const SystemParams& p);
OperatorMatrix transmon_lowering(const SystemParams& p);
OperatorMatrix excitation_number(const SystemParams& p); // a†a + aq†aq

// H/h in GHz on the tensor basis: nu_O a†a + transmon level diagonal
// + g_O (a† aq + a aq†). Hermitian by construction.
OperatorMatrix build_hamiltonian(const SystemParams& p);

// Decomposition of H into total-excitation blocks (exact at any detuning).
std::vector<ExcitationBlock> excitation_blocks(const OperatorMatrix& h, const SystemParams& p);

// Reassemble the direct sum of blocks back onto the tensor basis.
MatrixXcd reassemble_blocks(const std::vector<ExcitationBlock>& blocks, const SystemParams& p);

// Displacement operator exp(gamma a† - gamma* a) on the oscillator factor,
// built by matrix exponential on an n_work-truncated space and cropped to
// n_max+1 rows/columns. Requires n_work >= n_max + ceil(10*|gamma|).
MatrixXcd displacement_operator(Complex gamma, int n_max, int n_work);

// The uncropped working-space operator, unitary to machine precision.
MatrixXcd displacement_working(Complex gamma, int n_work);

// Exact Fock-basis matrix elements <m|D(gamma)|n> for m,n <= n_max via the
// associated-Laguerre closed form; no truncation error.
MatrixXcd displacement_exact(Complex gamma, int n_max);

// max |A - A†| entrywise
double hermiticity_defect(const MatrixXcd& a);

} // namespace efres

#endif
