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


#pragma once

// Source power / noise fit on the subarray covariance and projection of the reconstructed
// full-aperture signal covariance onto Hermitian Toeplitz matrices with a non-negative
// spectrum on a frequency grid.

#include "bsdoa/array_model.hpp"
#include "bsdoa/hybrid_combiner.hpp"
#include "bsdoa/nnls.hpp"

#include <vector>

namespace bsdoa
{
    // Real coordinates of a Hermitian n x n matrix, length n^2:
    //   [ R(i,i) for i, sqrt2*Re R(i,j) for i<j row-major, sqrt2*Im R(i,j) for i<j row-major ].
    // The sqrt2 weights make the map an isometry: ||vec_h(R)||_2 = ||R||_F.
    inline RVector vec_h(const CMatrix &Rin)
    {
        require(Rin.rows() == Rin.cols(), "vec_h: matrix must be square");
        const CMatrix R = hermitian_part(Rin);
        const Eigen::Index n = R.rows();
        const Eigen::Index off = n * (n - 1) / 2;
        RVector v(n * n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = R(i, i).real();
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j, ++k)
            {
                v(n + k) = std::sqrt(2.0) * R(i, j).real();
                v(n + off + k) = std::sqrt(2.0) * R(i, j).imag();
            }
        return v;
    }

    inline CMatrix mat_h(const RVector &v)
    {
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
        require(n * n == v.size(), "mat_h: length is not a perfect square");
        const Eigen::Index off = n * (n - 1) / 2;
        CMatrix R(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            R(i, i) = v(i);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j, ++k)
            {
                const cplx c(v(n + k) / std::sqrt(2.0), v(n + off + k) / std::sqrt(2.0));
                R(i, j) = c;
                R(j, i) = std::conj(c);
            }
        return R;
    }

    // Steering vector restricted to the mask rows.
    inline CVector masked_steering(double mu, const SubarrayMask &mask)
    {
        CVector a(mask.size());
        for (int i = 0; i < mask.size(); ++i)
            a(i) = std::polar(1.0, mask.indices[static_cast<std::size_t>(i)] * mu);
        return a;
    }

    // Columns vec_h(a a^H) per estimate, then vec_h(I).
    inline RMatrix build_power_design(const std::vector<double> &mu, const SubarrayMask &mask)
    {
        require(!mu.empty(), "build_power_design: no estimates");
        require(mask.size() >= 1, "build_power_design: empty mask");
        const int n = mask.size();
        RMatrix C(static_cast<Eigen::Index>(n) * n, static_cast<Eigen::Index>(mu.size()) + 1);
        for (std::size_t k = 0; k < mu.size(); ++k)
        {
            const CVector a = masked_steering(mu[k], mask);
            C.col(static_cast<Eigen::Index>(k)) = vec_h(a * a.adjoint());
        }
        C.col(C.cols() - 1) = vec_h(CMatrix::Identity(n, n));
        return C;
    }

    struct PowerFit
    {
        std::vector<double> p_hat;
        double n0_hat = 0.0;
        double residual = 0.0;
        double kkt_gap = 0.0;
    };

    inline PowerFit fit_powers(const CMatrix &R_fba, const std::vector<double> &mu, const SubarrayMask &mask,
                               double ridge = 1e-10)
    {
        require(R_fba.rows() == mask.size() && R_fba.cols() == mask.size(), "fit_powers: covariance size differs from mask");
        const RMatrix C = build_power_design(mu, mask);
        const NnlsResult nn = nnls_solve(C, vec_h(R_fba), ridge);
        PowerFit out;
        out.p_hat.assign(nn.x.data(), nn.x.data() + mu.size());
        out.n0_hat = nn.x(nn.x.size() - 1);
        out.residual = nn.residual;
        out.kkt_gap = nn.kkt_gap;
        return out;
    }

    // A(mu) diag(p) A(mu)^H on the full array.
    inline CMatrix reconstruct_signal_covariance(const std::vector<double> &mu, const std::vector<double> &p, int M)
    {
        require(mu.size() == p.size(), "reconstruct_signal_covariance: length mismatch");
        CMatrix R = CMatrix::Zero(M, M);
        for (std::size_t k = 0; k < mu.size(); ++k)
        {
            require(p[k] >= 0.0, "reconstruct_signal_covariance: negative power");
            const CVector a = steering_vector(mu[k], M);
            R += p[k] * a * a.adjoint();
        }
        return hermitian_part(R);
    }

    // z = [t0, r_1..r_{M-1}, s_1..s_{M-1}] with first column t_l = r_l + j s_l.
    struct ToeplitzParams
    {
        RVector z;

        int M() const { return static_cast<int>((z.size() + 1) / 2); }

        cplx t(int l) const
        {
            const int m = M();
            if (l == 0)
                return z(0);
            if (l > 0)
                return {z(l), z(m - 1 + l)};
            return std::conj(t(-l));
        }

        CMatrix matrix() const
        {
            const int m = M();
            CMatrix T(m, m);
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < m; ++k)
                    T(i, k) = t(i - k);
            return T;
        }
    };

    // Least-squares Toeplitz fit in Frobenius norm: diagonal averages of the lower triangle.
    inline ToeplitzParams toeplitz_average(const CMatrix &Rin)
    {
        require(Rin.rows() == Rin.cols() && Rin.rows() >= 1, "toeplitz_average: matrix must be square");
        const CMatrix R = hermitian_part(Rin);
        const int M = static_cast<int>(R.rows());
        ToeplitzParams p;
        p.z.setZero(2 * M - 1);
        p.z(0) = R.diagonal().real().mean();
        for (int l = 1; l < M; ++l)
        {
            cplx acc = 0.0;
            for (int k = 0; k + l < M; ++k)
                acc += R(k + l, k);
            acc /= static_cast<double>(M - l);
            p.z(l) = acc.real();
            p.z(M - 1 + l) = acc.imag();
        }
        return p;
    }

    // Frobenius weight of each Toeplitz parameter: ||T(z)||_F^2 = sum w_i z_i^2.
    inline RVector toeplitz_weights(int M)
    {
        RVector w(2 * M - 1);
        w(0) = M;
        for (int l = 1; l < M; ++l)
            w(l) = w(M - 1 + l) = 2.0 * (M - l);
        return w;
    }

    enum class SpectrumModel
    {
        // sum_l (1 - |l|/M) t_l e^{-j l w} = a(w)^H T a(w) / M, a necessary condition for PSD
        bartlett,
        // t0 + 2 sum_l (r_l cos(l w) + s_l sin(l w)), sufficient for PSD but excludes rank-deficient T
        dirichlet,
    };

    inline RVector spectral_grid(int M_grid)
    {
        RVector w(M_grid);
        for (int m = 0; m < M_grid; ++m)
            w(m) = -kPi + 2.0 * kPi * m / M_grid;
        return w;
    }

    // Rows map z to the spectrum on the grid.
    inline RMatrix spectrum_operator(int M, int M_grid, SpectrumModel model)
    {
        const RVector w = spectral_grid(M_grid);
        RMatrix A(M_grid, 2 * M - 1);
        for (int m = 0; m < M_grid; ++m)
        {
            A(m, 0) = 1.0;
            for (int l = 1; l < M; ++l)
            {
                const double taper = model == SpectrumModel::bartlett ? 1.0 - static_cast<double>(l) / M : 1.0;
                A(m, l) = 2.0 * taper * std::cos(l * w(m));
                A(m, M - 1 + l) = 2.0 * taper * std::sin(l * w(m));
            }
        }
        return A;
    }

    struct ToeplitzFit
    {
        ToeplitzParams params;
        CMatrix R;                 // projected matrix
        double objective = 0.0;    // ||R - input||_F^2
        double min_spectrum = 0.0; // min over the constraint grid
        double min_eigenvalue = 0.0;
        bool unconstrained = false; // Toeplitz average was already feasible
        int eigen_cuts = 0;         // eigenvector constraints added on top of the grid
    };

    struct ToeplitzOptions
    {
        int M_grid = 0; // 0 selects 4M
        double ridge = 1e-10;
        SpectrumModel spectrum = SpectrumModel::bartlett;
        // The grid bounds the spectrum only at M_grid points. While the result has an
        // eigenvalue below -eig_tol * trace / M, the offending eigenvectors are added as
        // constraints v^H T(z) v >= 0 and the QP is solved again, at most max_cut_rounds times.
        int max_cut_rounds = 100;
        double eig_tol = 1e-6;
    };

    // Row r with r . z = v^H T(z) v.
    inline RVector quadratic_form_row(const CVector &v)
    {
        const int M = static_cast<int>(v.size());
        RVector r(2 * M - 1);
        r(0) = v.squaredNorm();
        for (int l = 1; l < M; ++l)
        {
            cplx c = 0.0;
            for (int k = 0; k + l < M; ++k)
                c += std::conj(v(k + l)) * v(k);
            r(l) = 2.0 * c.real();
            r(M - 1 + l) = -2.0 * c.imag();
        }
        return r;
    }

    inline ToeplitzFit toeplitz_psd_project(const CMatrix &R_in, const ToeplitzOptions &opt = {})
    {
        require(R_in.rows() == R_in.cols() && R_in.rows() >= 1, "toeplitz_psd_project: matrix must be square");
        const int M = static_cast<int>(R_in.rows());
        const int grid = opt.M_grid > 0 ? opt.M_grid : 4 * M;
        require(grid >= 2 * M, "toeplitz_psd_project: grid must have at least 2M points");
        require(opt.ridge >= 0.0, "toeplitz_psd_project: ridge must be non-negative");

        // ||T(z) - R||_F^2 = sum w_i (z_i - zbar_i)^2 + const, so H = diag(2w) + ridge I.
        const ToeplitzParams avg = toeplitz_average(R_in);
        const RVector w = toeplitz_weights(M);
        const RMatrix H = RMatrix((2.0 * w.array() + opt.ridge).matrix().asDiagonal());
        const RVector q = -2.0 * w.cwiseProduct(avg.z);
        const RMatrix A = spectrum_operator(M, grid, opt.spectrum);
        const double scale = std::max(1.0, avg.z.cwiseAbs().maxCoeff());

        QpResult qp = solve_inequality_qp(H, q, A, RVector::Zero(grid), 1e-12 * scale);

        ToeplitzFit out;
        out.unconstrained = qp.unconstrained;
        out.params.z = qp.x;
        out.R = out.params.matrix();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(out.R);
        RMatrix cuts(0, 2 * M - 1);
        for (int round = 0; round < opt.max_cut_rounds; ++round)
        {
            const double floor = -opt.eig_tol * std::max(out.R.trace().real(), 0.0) / M;
            if (es.eigenvalues()(0) >= floor)
                break;
            for (int k = 0; k < M && es.eigenvalues()(k) < floor; ++k)
            {
                cuts.conservativeResize(cuts.rows() + 1, Eigen::NoChange);
                cuts.row(cuts.rows() - 1) = quadratic_form_row(es.eigenvectors().col(k)).transpose();
            }
            RMatrix all(grid + cuts.rows(), 2 * M - 1);
            all << A, cuts;
            qp = solve_inequality_qp(H, q, all, RVector::Zero(all.rows()), 1e-12 * scale);
            out.unconstrained = false;
            out.params.z = qp.x;
            out.R = out.params.matrix();
            es.compute(out.R);
        }
        out.eigen_cuts = static_cast<int>(cuts.rows());
        out.objective = (out.R - hermitian_part(R_in)).squaredNorm();
        out.min_spectrum = (A * qp.x).minCoeff();
        out.min_eigenvalue = es.eigenvalues()(0);
        return out;
    }

} // namespace bsdoa
