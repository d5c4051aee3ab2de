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

// Element-space ESPRIT on a contiguous subarray: forward-backward averaging, principal
// subspace, LS or TLS shift-invariance solve.

#include "bsdoa/array_model.hpp"
#include "bsdoa/hybrid_combiner.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace bsdoa
{
    enum class SolveMode
    {
        ls,
        tls,
    };

    struct CoarseEstimate
    {
        std::vector<double> mu;   // ascending
        CMatrix signal_subspace;  // n x d, orthonormal
        RVector eigvals;          // descending
        CMatrix R_fba;            // forward-backward averaged sample covariance
    };

    // (R + P conj(R) P) / 2 with P the exchange matrix.
    inline CMatrix forward_backward_average(const CMatrix &R)
    {
        require(R.rows() == R.cols(), "forward_backward_average: matrix must be square");
        const CMatrix flipped = R.conjugate().reverse();
        return 0.5 * (R + flipped);
    }

    namespace detail
    {
        inline double rank_tolerance(const RVector &s, Eigen::Index rows, Eigen::Index cols)
        {
            return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * (s.size() ? s(0) : 0.0) * 16.0;
        }
    } // namespace detail

    // Solve X1 Psi = X2 for a d x d Psi, where X1/X2 hold the two shifted row blocks of a
    // subspace basis. Works for complex and real bases alike.
    template <typename Mat>
    Mat solve_shift_invariance(const Mat &X1, const Mat &X2, SolveMode mode)
    {
        const Eigen::Index d = X1.cols();
        require(X1.rows() == X2.rows() && X2.cols() == d, "solve_shift_invariance: block shapes differ");
        require(X1.rows() >= d, "solve_shift_invariance: fewer equations than unknowns");

        Eigen::JacobiSVD<Mat> svd1(X1, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto s1 = svd1.singularValues();
        if (s1(d - 1) <= detail::rank_tolerance(s1, X1.rows(), X1.cols()) || s1(d - 1) <= 1e-12 * s1(0))
            throw Error(Errc::rank_deficient, "solve_shift_invariance: first shifted block is rank deficient");

        if (mode == SolveMode::ls)
            return svd1.solve(X2);

        Mat C(X1.rows(), 2 * d);
        C << X1, X2;
        Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullV); // full V: rows may be fewer than 2d
        const Mat V = svd.matrixV();
        const Mat V12 = V.block(0, d, d, d);
        const Mat V22 = V.block(d, d, d, d);
        Eigen::FullPivLU<Mat> lu(V22);
        if (!lu.isInvertible())
            throw Error(Errc::rank_deficient, "solve_shift_invariance: TLS solution does not exist");
        return -V12 * lu.inverse();
    }

    // Consecutive-row selectors J1 = [I 0], J2 = [0 I] applied to U.
    inline CMatrix esprit_shift_invariance(const CMatrix &U, SolveMode mode)
    {
        require(U.rows() >= U.cols() + 1, "esprit_shift_invariance: need more rows than sources");
        const Eigen::Index n = U.rows();
        return solve_shift_invariance<CMatrix>(U.topRows(n - 1), U.bottomRows(n - 1), mode);
    }

    // Eigen-angles of Psi, sorted ascending.
    inline std::vector<double> eigen_angles(const CMatrix &Psi)
    {
        Eigen::ComplexEigenSolver<CMatrix> es(Psi, false);
        std::vector<double> mu;
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
            mu.push_back(std::arg(es.eigenvalues()(k)));
        std::sort(mu.begin(), mu.end());
        return mu;
    }

    // Principal-subspace ESPRIT from a subarray covariance (FBA applied here).
    inline CoarseEstimate coarse_estimate_from_covariance(const CMatrix &R, int d, SolveMode mode)
    {
        require(d >= 1, "coarse_estimate: d must be positive");
        require(d < R.rows(), "coarse_estimate: d must be smaller than the subarray size");
        CoarseEstimate out;
        out.R_fba = hermitian_part(forward_backward_average(R));
        Eigen::SelfAdjointEigenSolver<CMatrix> es(out.R_fba);
        out.eigvals = es.eigenvalues().reverse();
        out.signal_subspace = es.eigenvectors().rightCols(d).rowwise().reverse();
        out.mu = eigen_angles(esprit_shift_invariance(out.signal_subspace, mode));
        return out;
    }

    inline CoarseEstimate coarse_estimate(const CMatrix &Y_sub, int d, SolveMode mode)
    {
        require(Y_sub.rows() >= d + 1, "coarse_estimate: need at least d+1 rows");
        require(Y_sub.cols() >= d, "coarse_estimate: need at least d snapshots");
        return coarse_estimate_from_covariance(sample_covariance(Y_sub), d, mode);
    }

} // namespace bsdoa
