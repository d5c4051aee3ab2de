// SPDX-License-Identifier: Apache-2.0
//
// bsdoa: covariance-guided DFT-beamspace ESPRIT for hybrid receivers
// Copyright (C) 2026 The bsdoa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include "test_support.hpp"

using namespace bsdoa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    CMatrix random_toeplitz(int M, std::mt19937_64 &eng)
    {
        ToeplitzParams p;
        p.z = test::random_complex(2 * M - 1, 1, eng).real();
        return p.matrix();
    }

    CMatrix random_psd_toeplitz(int M, std::mt19937_64 &eng)
    {
        // Mixture of steering outer products plus a white floor is Toeplitz and PSD.
        CMatrix T = test::uniform(0.0, 0.5, eng) * CMatrix::Identity(M, M);
        const int d = 1 + static_cast<int>(eng() % 4);
        for (int k = 0; k < d; ++k)
        {
            const CVector a = steering_vector(test::uniform(-kPi, kPi, eng), M);
            T += test::uniform(0.1, 2.0, eng) * a * a.adjoint();
        }
        return T;
    }

    // Weighted projection onto {z : A z >= 0} by FISTA on the dual:
    //   z = zbar + D A^T lambda, D = diag(1 / 2w), maximise -0.5 l^T A D A^T l - l^T A zbar over l >= 0.
    // Diagonal means: orthogonal projection onto Toeplitz matrices in the Frobenius norm.
    CMatrix toeplitz_mean(const CMatrix &X)
    {
        const int M = static_cast<int>(X.rows());
        CMatrix T(M, M);
        for (int l = 1 - M; l < M; ++l)
        {
            const int i0 = std::max(0, l), n = M - std::abs(l);
            const cplx mean = X.diagonal(-l).sum() / static_cast<double>(n);
            for (int i = i0; i < i0 + n; ++i)
                T(i, i - l) = mean;
        }
        return T;
    }

    CMatrix psd_clip(const CMatrix &X)
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(X);
        return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().adjoint();
    }

    // Dykstra alternation between the PSD cone and the Toeplitz subspace.
    CMatrix dykstra_toeplitz_psd(const CMatrix &X0, int iterations)
    {
        CMatrix x = toeplitz_mean(X0), inc = CMatrix::Zero(X0.rows(), X0.cols());
        for (int it = 0; it < iterations; ++it)
        {
            const CMatrix y = psd_clip(x + inc);
            inc = x + inc - y;
            x = toeplitz_mean(y);
        }
        return x;
    }
} // namespace

TEST_CASE("Hermitian vectorisation", "[covariance_fit]")
{
    CHECK(vec_h(CMatrix::Zero(4, 4)).norm() == 0.0);
    auto eng = test::engine(51);
    const CMatrix R1 = test::random_hermitian(12, eng);
    const CMatrix R2 = test::random_hermitian(12, eng);
    CHECK((mat_h(vec_h(R1)) - R1).norm() < 1e-14);
    CHECK_THAT(vec_h(R1).norm(), WithinRel(R1.norm(), 1e-14));
    CHECK((vec_h(2.5 * R1 - 0.5 * R2) - (2.5 * vec_h(R1) - 0.5 * vec_h(R2))).norm() < 1e-13);
    CHECK_THAT(vec_h(R1).dot(vec_h(R2)), WithinAbs((R1.adjoint() * R2).trace().real(), 1e-12));
    CHECK_THROWS_AS(mat_h(RVector::Zero(5)), Error);
}

TEST_CASE("power design matrix", "[covariance_fit]")
{
    const RMatrix C1 = build_power_design({0.0}, contiguous_mask(0, 2));
    CHECK((mat_h(C1.col(0)) - CMatrix::Ones(2, 2)).norm() < 1e-15);
    CHECK((mat_h(C1.col(1)) - CMatrix::Identity(2, 2)).norm() < 1e-15);

    const SubarrayMask mask = centro_symmetric_mask(32, 12);
    const std::vector<double> mu{-2.1, 0.5, 2.5};
    const RMatrix C = build_power_design(mu, mask);
    CHECK(Eigen::FullPivLU<RMatrix>(C).rank() == 4);

    auto eng = test::engine(52);
    for (int rep = 0; rep < 10; ++rep)
    {
        Scenario sc;
        sc.M = 32;
        sc.mu = mu;
        sc.powers = {test::uniform(0.1, 2, eng), test::uniform(0.1, 2, eng), test::uniform(0.1, 2, eng)};
        sc.n0 = test::uniform(0.0, 1.0, eng);
        const CMatrix R = theoretical_covariance(sc);
        const CMatrix Rm = mask.rows_of(mask.rows_of(R).transpose()).transpose();
        RVector x(4);
        x << sc.powers[0], sc.powers[1], sc.powers[2], sc.n0;
        CHECK((C * x - vec_h(Rm)).norm() < 1e-12 * vec_h(Rm).norm());
    }
}

TEST_CASE("power fit on exact covariances", "[covariance_fit]")
{
    const SubarrayMask mask = centro_symmetric_mask(32, 12);
    Scenario sc = test::three_source_scenario(0.3);
    sc.M = 32;
    const CMatrix R = theoretical_covariance(sc);
    const CMatrix Rm = mask.rows_of(mask.rows_of(R).transpose()).transpose();
    const PowerFit f = fit_powers(forward_backward_average(Rm), sc.mu, mask);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK_THAT(f.p_hat[k], WithinAbs(sc.powers[k], 1e-7));
    CHECK_THAT(f.n0_hat, WithinAbs(0.3, 1e-7));
    CHECK(f.kkt_gap <= 1e-9);

    const PowerFit noise = fit_powers(0.7 * CMatrix::Identity(12, 12), {1.234}, mask);
    CHECK(noise.p_hat[0] < 1e-9);
    CHECK_THAT(noise.n0_hat, WithinAbs(0.7, 1e-9));
    CHECK(noise.kkt_gap <= 1e-9);
}

TEST_CASE("power fit with finite snapshots", "[covariance_fit]")
{
    const SubarrayMask mask = centro_symmetric_mask(32, 12);
    Scenario sc = test::three_source_scenario(asnr_to_n0(15.0, {0.95, 0.5, 0.1}));
    int within = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t)
    {
        const auto snap = generate_snapshots(sc, RngKey{52, 0, std::uint64_t(t)});
        const CoarseEstimate ce = coarse_estimate(mask.rows_of(snap.Y.data), 3, SolveMode::tls);
        const PowerFit f = fit_powers(ce.R_fba, ce.mu, mask);
        REQUIRE(f.kkt_gap <= 1e-9);
        bool ok = true;
        for (std::size_t k = 0; k < 3; ++k)
            ok = ok && std::abs(f.p_hat[k] - sc.powers[k]) <= 0.25 * sc.powers[k];
        within += ok;
    }
    CHECK(within >= 900);
}

TEST_CASE("signal covariance reconstruction", "[covariance_fit]")
{
    CHECK(reconstruct_signal_covariance({0.3, 1.0}, {0.0, 0.0}, 8).norm() == 0.0);
    const CMatrix R1 = reconstruct_signal_covariance({0.3}, {2.0}, 8);
    CHECK_THAT(R1.trace().real(), WithinRel(16.0, 1e-14));
    const RVector ev1 = Eigen::SelfAdjointEigenSolver<CMatrix>(R1).eigenvalues();
    CHECK(std::abs(ev1(6)) < 1e-12);

    const CMatrix R3 = reconstruct_signal_covariance({-2.1, 0.5, 2.5}, {0.95, 0.5, 0.1}, 32);
    const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(R3).eigenvalues();
    CHECK(ev.head(29).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(ev(29) > 1e-3);
    CHECK_THROWS_AS(reconstruct_signal_covariance({0.1}, {-1.0}, 8), Error);
}

TEST_CASE("Toeplitz averaging is the Frobenius least-squares fit", "[covariance_fit]")
{
    auto eng = test::engine(53);
    const int M = 7;
    const CMatrix R = test::random_hermitian(M, eng);
    const ToeplitzParams avg = toeplitz_average(R);

    // Independent oracle: least squares on the basis of Toeplitz generators.
    RMatrix G(M * M, 2 * M - 1);
    for (Eigen::Index i = 0; i < 2 * M - 1; ++i)
    {
        ToeplitzParams e;
        e.z = RVector::Unit(2 * M - 1, i);
        G.col(i) = vec_h(e.matrix());
    }
    const RVector z_ls = G.colPivHouseholderQr().solve(vec_h(R));
    CHECK((avg.z - z_ls).norm() < 1e-12);

    const RVector w = toeplitz_weights(M);
    CHECK_THAT(avg.matrix().squaredNorm(), WithinRel(w.dot(avg.z.cwiseAbs2()), 1e-12));
    CHECK((avg.matrix() - avg.matrix().adjoint()).norm() == 0.0);
}

TEST_CASE("spectrum operator matches the quadratic form", "[covariance_fit]")
{
    auto eng = test::engine(54);
    const int M = 9;
    const CMatrix T = random_toeplitz(M, eng);
    const ToeplitzParams p = toeplitz_average(T);
    const RMatrix A = spectrum_operator(M, 4 * M, SpectrumModel::bartlett);
    const RVector w = spectral_grid(4 * M);
    for (int m = 0; m < 4 * M; ++m)
    {
        const CVector a = steering_vector(w(m), M);
        CHECK_THAT((A * p.z)(m), WithinAbs((a.adjoint() * T * a)(0).real() / M, 1e-12));
    }
}

TEST_CASE("Toeplitz projection fixed points", "[covariance_fit]")
{
    SECTION("identity")
    {
        const ToeplitzFit f = toeplitz_psd_project(CMatrix::Identity(16, 16));
        CHECK((f.R - CMatrix::Identity(16, 16)).norm() < 1e-9);
    }
    SECTION("single steering outer product")
    {
        auto eng = test::engine(55);
        for (int rep = 0; rep < 20; ++rep)
        {
            const CVector a = steering_vector(test::uniform(-kPi, kPi, eng), 32);
            const CMatrix T = a * a.adjoint();
            CHECK((toeplitz_psd_project(T).R - T).norm() < 1e-7);
        }
    }
    SECTION("random PSD Toeplitz")
    {
        auto eng = test::engine(56);
        for (int rep = 0; rep < 20; ++rep)
        {
            const CMatrix T = random_psd_toeplitz(32, eng);
            CHECK((toeplitz_psd_project(T).R - T).norm() < 1e-7);
        }
    }
}

TEST_CASE("Toeplitz projection of an indefinite input matches a Dykstra oracle", "[covariance_fit]")
{
    // A PSD Toeplitz matrix satisfies every grid constraint, so the feasible set is
    // Toeplitz intersected with PSD and alternating projections reach the same point.
    for (int M : {8, 16})
    {
        ToeplitzParams p;
        p.z = RVector::Zero(2 * M - 1);
        p.z(1) = 1.0; // t0 = 0, t1 = 1
        const CMatrix T = p.matrix();
        const ToeplitzFit f = toeplitz_psd_project(T);
        CHECK(f.min_spectrum >= -1e-8);
        CHECK(!f.unconstrained);
        CHECK(f.eigen_cuts > 0);

        const CMatrix x = dykstra_toeplitz_psd(T, 10000);
        CHECK_THAT(f.objective, WithinAbs((x - T).squaredNorm(), 1e-4));
        CHECK((f.R - x).norm() < 1e-3);
    }
}

TEST_CASE("Toeplitz projection is idempotent and non-expansive", "[covariance_fit]")
{
    auto eng = test::engine(57);
    for (int rep = 0; rep < 20; ++rep)
    {
        const int M = 32;
        const CMatrix X = test::random_hermitian(M, eng);
        const CMatrix Y = test::random_hermitian(M, eng);
        const ToeplitzFit px = toeplitz_psd_project(X);
        const ToeplitzFit py = toeplitz_psd_project(Y);
        CHECK((toeplitz_psd_project(px.R).R - px.R).norm() < 1e-7);
        CHECK((px.R - py.R).norm() <= (X - Y).norm() + 1e-7);
        CHECK(px.min_spectrum >= -1e-8);
        CHECK(px.min_eigenvalue >= -1e-4 * px.R.trace().real() / M - 1e-12);
    }
}

TEST_CASE("Toeplitz projection of reconstructed covariances", "[covariance_fit]")
{
    const CMatrix Rs = reconstruct_signal_covariance({-2.08, 0.51, 2.49}, {0.9, 0.55, 0.12}, 32);
    const ToeplitzFit f = toeplitz_psd_project(Rs);
    CHECK((f.R - Rs).norm() < 1e-7);
    CHECK(f.eigen_cuts == 0);

    ToeplitzOptions strict;
    strict.spectrum = SpectrumModel::dirichlet;
    const ToeplitzFit g = toeplitz_psd_project(CMatrix::Identity(8, 8) + 0.1 * CMatrix::Ones(8, 8), strict);
    CHECK(g.min_spectrum >= -1e-8);
    CHECK(g.min_eigenvalue >= -1e-10);

    CHECK_THROWS_AS(toeplitz_psd_project(CMatrix::Identity(4, 4), ToeplitzOptions{5, 1e-10, SpectrumModel::bartlett}), Error);
}
