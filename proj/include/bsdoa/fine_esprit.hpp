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

// Sparse beamspace Unitary ESPRIT over an arbitrary sorted beam set. Only pairs of beams with
// adjacent codebook indices enter the invariance equations.

#include "bsdoa/coarse_esprit.hpp"
#include "bsdoa/hybrid_combiner.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace bsdoa
{
    // How eigenvalues of the invariance operator map to spatial frequencies.
    enum class EigenMap
    {
        // Plain row selectors on the beam pair and mu = arg(lambda).
        literal_angle,
        // Adjacent centred DFT beams satisfy tan(mu/2) [cos(g_k/2) f_k + cos(g_k+1/2) f_k+1]
        //   = sin(g_k/2) f_k + sin(g_k+1/2) f_k+1 for the real beam pattern f, so the
        // selectors carry those weights and mu = 2 atan(Re lambda).
        half_angle_tangent,
    };

    inline const char *eigen_map_name(EigenMap m)
    {
        return m == EigenMap::literal_angle ? "literal_angle" : "half_angle_tangent";
    }

    struct PairSet
    {
        std::vector<std::pair<int, int>> rows; // positions into the sorted beam list
        std::vector<std::pair<int, int>> beams; // the corresponding codebook indices

        int size() const { return static_cast<int>(rows.size()); }
    };

    inline PairSet forward_pairs(const std::vector<int> &beams)
    {
        for (std::size_t i = 1; i < beams.size(); ++i)
            require(beams[i] > beams[i - 1], "forward_pairs: beam list must be sorted and distinct");
        PairSet p;
        for (std::size_t i = 1; i < beams.size(); ++i)
            if (beams[i] == beams[i - 1] + 1)
            {
                p.rows.emplace_back(static_cast<int>(i - 1), static_cast<int>(i));
                p.beams.emplace_back(beams[i - 1], beams[i]);
            }
        return p;
    }

    // sqrt(2) [Re Y, Im Y]
    inline RMatrix unitary_real_transform(const CMatrix &Y)
    {
        RMatrix out(Y.rows(), 2 * Y.cols());
        out << Y.real(), Y.imag();
        return std::sqrt(2.0) * out;
    }

    struct FineEstimate
    {
        std::vector<double> mu; // ascending
        CVector eigvals;
        int pair_count = 0;
        int max_decomposition_dim = 0; // largest matrix dimension handed to an SVD/eigensolver
    };

    // Pair selectors (|P| x n) for the chosen map.
    inline std::pair<RMatrix, RMatrix> pair_selectors(const PairSet &P, int n, const DftCodebook &cb, EigenMap map)
    {
        RMatrix J1 = RMatrix::Zero(P.size(), n), J2 = RMatrix::Zero(P.size(), n);
        for (int r = 0; r < P.size(); ++r)
        {
            const auto [i, j] = P.rows[static_cast<std::size_t>(r)];
            const auto [bi, bj] = P.beams[static_cast<std::size_t>(r)];
            if (map == EigenMap::literal_angle)
            {
                J1(r, i) = 1.0;
                J2(r, j) = 1.0;
            }
            else
            {
                J1(r, i) = std::cos(0.5 * cb.gamma(bi));
                J1(r, j) = std::cos(0.5 * cb.gamma(bj));
                J2(r, i) = std::sin(0.5 * cb.gamma(bi));
                J2(r, j) = std::sin(0.5 * cb.gamma(bj));
            }
        }
        return {J1, J2};
    }

    inline std::vector<double> map_eigenvalues(const CVector &ev, EigenMap map)
    {
        std::vector<double> mu;
        for (Eigen::Index k = 0; k < ev.size(); ++k)
            mu.push_back(map == EigenMap::literal_angle ? std::arg(ev(k)) : 2.0 * std::atan(ev(k).real()));
        std::sort(mu.begin(), mu.end());
        return mu;
    }

    // Y_b rows must follow the sorted beam list.
    inline FineEstimate sparse_beamspace_esprit(const CMatrix &Y_b, const std::vector<int> &beams, int d, const DftCodebook &cb,
                                                SolveMode mode = SolveMode::ls, EigenMap map = EigenMap::half_angle_tangent)
    {
        require(d >= 1, "sparse_beamspace_esprit: d must be positive");
        require(Y_b.rows() == static_cast<Eigen::Index>(beams.size()), "sparse_beamspace_esprit: row count differs from beam list");
        const PairSet P = forward_pairs(beams);
        if (P.size() < d)
            throw Error(Errc::insufficient_pairs, "sparse_beamspace_esprit: insufficient shift-invariant pairs (" +
                                                      std::to_string(P.size()) + " < " + std::to_string(d) + ")");
        const int n = static_cast<int>(beams.size());
        require(d <= n, "sparse_beamspace_esprit: more sources than beams");

        const RMatrix X = unitary_real_transform(Y_b);
        Eigen::BDCSVD<RMatrix> svd(X, Eigen::ComputeThinU);
        const RMatrix Us = svd.matrixU().leftCols(d);

        const auto [J1, J2] = pair_selectors(P, n, cb, map);
        const RMatrix Phi = solve_shift_invariance<RMatrix>(J1 * Us, J2 * Us, mode);

        FineEstimate out;
        out.eigvals = Eigen::EigenSolver<RMatrix>(Phi, false).eigenvalues();
        out.mu = map_eigenvalues(out.eigvals, map);
        out.pair_count = P.size();
        out.max_decomposition_dim = std::max({n, 2 * d, P.size()});
        return out;
    }

} // namespace bsdoa
