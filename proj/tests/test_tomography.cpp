#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "efres/tomography.hpp"

using namespace efres;

TEST_CASE("coherent state amplitudes and guard") {
    const VectorXcd vac = coherent_state(0.0, 10);
    CHECK(std::abs(vac(0) - Complex(1.0, 0.0)) < 1e-15);

    const VectorXcd one = coherent_state(1.0, 30);
    CHECK(std::norm(one(0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

    const Complex beta(-std::sqrt(5.0), std::sqrt(2.0));
    const VectorXcd psi = coherent_state(beta, 40);
    double mean = 0.0;
    for (int n = 0; n <= 40; ++n) mean += n * std::norm(psi(n));
    CHECK(mean == doctest::Approx(7.0).epsilon(1e-8));

    CHECK_THROWS_AS(coherent_state(Complex(3.0, 0.0), 20), truncation_error);
}

TEST_CASE("POVM elements at zero displacement are Fock projectors") {
    const auto set = povm_elements(0.0, 4, 8);
    for (int n = 0; n <= 4; ++n) {
        MatrixXcd expect = MatrixXcd::Zero(9, 9);
        expect(n, n) = 1.0;
        CHECK((set.elements[n] - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    // full Fock coverage leaves no remainder
    const auto full = povm_elements(0.0, 8, 8);
    CHECK(full.remainder.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("POVM completeness and positivity on random displacements") {
    Rng rng(998877);
    for (int trial = 0; trial < 100; ++trial) {
        const Complex gamma(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
        const int n_trunc = rng.uniform_int(6, 16);
        const int n_range = rng.uniform_int(2, std::min(7, n_trunc));
        const auto set = povm_elements(gamma, n_range, n_trunc);
        MatrixXcd sum = set.remainder;
        for (const auto& e : set.elements) {
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(e, Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues().minCoeff() > -1e-10);
            sum += e;
        }
        CHECK((sum - MatrixXcd::Identity(n_trunc + 1, n_trunc + 1)).cwiseAbs().maxCoeff() <
              1e-10);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> er(set.remainder, Eigen::EigenvaluesOnly);
        CHECK(er.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("probing a displaced coherent state") {
    // Tr[Pi_{0,gamma} rho_beta] = exp(-|beta+gamma|^2)
    const Complex beta(0.7, 0.3), gamma(-0.5, 0.2);
    const int n_trunc = 25;
    const VectorXcd psi = coherent_state(beta, n_trunc);
    const auto set = povm_elements(gamma, 3, n_trunc);
    const double p0 = (psi.adjoint() * set.elements[0] * psi)(0).real();
    CHECK(p0 == doctest::Approx(std::exp(-std::norm(beta + gamma))).epsilon(1e-8));
}

TEST_CASE("MLE reconstructs the vacuum from direct Fock data") {
    TomogramDataset d;
    d.n_range = 3;
    d.records = {{0.0, 0, 1.0}, {0.0, 1, 0.0}, {0.0, 2, 0.0}, {0.0, 3, 0.0}};
    const auto res = mle_reconstruct(d, 6);
    CHECK(res.rho.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-6));
    VectorXcd vac = VectorXcd::Zero(7);
    vac(0) = 1.0;
    CHECK(fidelity(res.rho, vac) > 0.999);
    CHECK(res.rank_deficient); // a single displacement cannot fix coherences
}

TEST_CASE("MLE round trip on a small coherent state") {
    const Complex beta(1.0, 0.5);
    Rng rng(3);
    const auto gammas = default_displacement_layout(beta, 8, 8, 2.0);
    const auto data = synthesize_coherent_dataset(beta, gammas, 5, 0.0, 0.0, rng);
    data.validate();
    const auto res = mle_reconstruct(data, 10);
    CHECK(!res.rank_deficient);
    VectorXcd target = coherent_amplitudes(beta, 10);
    CHECK(fidelity(res.rho, target.normalized()) > 0.995);
    check_density_matrix(res.rho, 1e-9, 1e-10, -1e-12);
}

TEST_CASE("MLE likelihood is monotone on random datasets") {
    Rng rng(616161);
    for (int trial = 0; trial < 100; ++trial) {
        const Complex beta(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const auto gammas = default_displacement_layout(beta, 4, 5, 1.5);
        auto data = synthesize_coherent_dataset(beta, gammas, 3, 0.01, 0.004, rng);
        MleOptions opts;
        opts.max_iterations = 40;
        const auto res = mle_reconstruct(data, 6, opts);
        // non-decreasing likelihood is asserted inside the iteration; a
        // finished run must report a finite value and a valid state
        CHECK(std::isfinite(res.log_likelihood));
        check_density_matrix(res.rho, 1e-9, 1e-10, -1e-12);
    }
}

TEST_CASE("dataset physicality validation") {
    TomogramDataset d;
    d.n_range = 2;
    d.records = {{0.0, 0, 0.7}, {0.0, 1, 0.6}}; // sums to 1.3
    CHECK_THROWS_AS(d.validate(0.0), data_error);
    d.records = {{0.0, 0, 0.7}, {0.0, 1, std::nan("")}};
    CHECK_THROWS_AS(d.validate(0.0), data_error);
    d.records = {{0.0, 5, 0.1}};
    CHECK_THROWS_AS(d.validate(0.0), data_error);
}

TEST_CASE("dataset CSV round trip") {
    TomogramDataset d;
    d.n_range = 2;
    d.records = {{Complex(0.25, -1.5), 0, 0.125}, {Complex(0.25, -1.5), 2, 0.5}};
    std::stringstream ss;
    d.write_csv(ss);
    const auto back = TomogramDataset::read_csv(ss);
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[1].gamma == d.records[1].gamma);
    CHECK(back.records[1].n == 2);
    CHECK(back.records[1].f == 0.5);
}

TEST_CASE("fidelity special values") {
    const int dim = 18;
    const Complex beta(1.2, -0.4);
    const VectorXcd target = coherent_amplitudes(beta, dim - 1).normalized();
    DensityMatrix pure{target * target.adjoint()};
    CHECK(fidelity(pure, target) == doctest::Approx(1.0).epsilon(1e-10));

    DensityMatrix vac{MatrixXcd::Zero(dim, dim)};
    vac.rho(0, 0) = 1.0;
    CHECK(fidelity(vac, target) ==
          doctest::Approx(std::exp(-0.5 * std::norm(beta))).epsilon(1e-6));

    DensityMatrix mixed{MatrixXcd::Identity(dim, dim) / dim};
    CHECK(fidelity(mixed, target) == doctest::Approx(1.0 / std::sqrt(18.0)).epsilon(1e-10));
}

TEST_CASE("Wigner function values and normalization") {
    const int dim = 24;
    MatrixXcd vac = MatrixXcd::Zero(dim, dim);
    vac(0, 0) = 1.0;
    CHECK(wigner(vac, {0.0})[0] == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-10));

    const Complex beta(0.9, -0.6);
    const VectorXcd psi = coherent_state(beta, dim - 1);
    const MatrixXcd rho = psi * psi.adjoint();
    CHECK(wigner(rho, {beta})[0] == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-7));

    // quadrature over a wide grid integrates to one
    const int side = 61;
    const double half = 4.5;
    double integral = 0.0;
    const double step = 2.0 * half / (side - 1);
    std::vector<Complex> pts;
    pts.reserve(side * side);
    for (int iy = 0; iy < side; ++iy)
        for (int ix = 0; ix < side; ++ix)
            pts.emplace_back(beta.real() - half + ix * step, beta.imag() - half + iy * step);
    const auto w = wigner(rho, pts);
    for (double v : w) integral += v * step * step;
    CHECK(integral == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("Wigner via displaced parity equals the direct definition") {
    Rng rng(12);
    for (int trial = 0; trial < 8; ++trial) {
        const int dim = 8;
        MatrixXcd a = MatrixXcd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j <= i; ++j) {
                a(i, j) = Complex(rng.uniform(-1, 1), i == j ? 0.0 : rng.uniform(-1, 1));
                a(j, i) = std::conj(a(i, j));
            }
        // make a physical state
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a);
        VectorXd ev = es.eigenvalues().cwiseAbs();
        ev /= ev.sum();
        const MatrixXcd rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();

        const Complex alpha(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        // direct route: (2/pi) Tr[D† rho D P] on a padded space
        const int work = dim + 30;
        MatrixXcd rho_pad = MatrixXcd::Zero(work + 1, work + 1);
        rho_pad.topLeftCorner(dim, dim) = rho;
        const MatrixXcd d_op = displacement_working(alpha, work);
        MatrixXcd shifted = d_op.adjoint() * rho_pad * d_op;
        double direct = 0.0;
        for (int n = 0; n <= work; ++n)
            direct += (n % 2 == 0 ? 1.0 : -1.0) * shifted(n, n).real();
        direct *= 2.0 / std::numbers::pi;

        CHECK(wigner(rho, {alpha})[0] == doctest::Approx(direct).epsilon(1e-7));
    }
}

TEST_CASE("Wigner bound property") {
    Rng rng(9001);
    const double bound = 2.0 / std::numbers::pi + 1e-9;
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = rng.uniform_int(2, 12);
        MatrixXcd a = MatrixXcd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j <= i; ++j) {
                a(i, j) = Complex(rng.uniform(-1, 1), i == j ? 0.0 : rng.uniform(-1, 1));
                a(j, i) = std::conj(a(i, j));
            }
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a);
        VectorXd ev = es.eigenvalues().cwiseAbs();
        ev /= ev.sum();
        const MatrixXcd rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
        const Complex alpha(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5));
        CHECK(std::abs(wigner(rho, {alpha})[0]) <= bound);
    }
}

TEST_CASE("default displacement layout geometry") {
    const Complex beta(-2.0, 1.0);
    const auto gammas = default_displacement_layout(beta);
    CHECK(gammas.size() == 240);
    for (const auto& g : gammas) CHECK(std::abs(g + beta) <= 3.0 + 1e-12);
}
