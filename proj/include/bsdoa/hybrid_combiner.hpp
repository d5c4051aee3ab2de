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

// Phase-shifted DFT codebook, virtual-subarray masks, the digital combiner that maps the
// analog beams back onto a subarray, and beamspace projection.
// Beam and element indices are 0-based throughout.

#include "bsdoa/array_model.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace bsdoa
{
    struct DftCodebook
    {
        CMatrix B;           // M x M, orthonormal columns
        RVector gamma;       // beam spatial frequencies, ascending
        int M = 0;

        double spacing() const { return 2.0 * kPi / M; }

        // Unit-modulus analog weights for a set of beams: sqrt(M) * B(:, beams).
        CMatrix analog_weights(const std::vector<int> &beams) const
        {
            CMatrix W(M, static_cast<Eigen::Index>(beams.size()));
            for (std::size_t i = 0; i < beams.size(); ++i)
                W.col(static_cast<Eigen::Index>(i)) = std::sqrt(static_cast<double>(M)) * B.col(beams[i]);
            return W;
        }

        // Beam whose grid frequency is closest to mu (after wrapping). Exact midpoints go to
        // the lower beam. Frequencies outside the first/last cell centre clamp to the edge beams.
        int nearest_beam(double mu) const
        {
            const double x = (wrap_angle(mu) + kPi) / spacing() - 0.5;
            double k = std::ceil(x - 0.5);
            if (std::abs((x - 0.5) - std::round(x - 0.5)) < 1e-9)
                k = std::round(x - 0.5);
            return std::clamp(static_cast<int>(k), 0, M - 1);
        }
    };

    inline DftCodebook dft_codebook(int M)
    {
        require(M >= 2, "dft_codebook: M must be at least 2");
        DftCodebook cb;
        cb.M = M;
        cb.gamma.resize(M);
        cb.B.resize(M, M);
        const double c = 0.5 * (M - 1);
        const double scale = 1.0 / std::sqrt(static_cast<double>(M));
        for (int k = 0; k < M; ++k)
        {
            const double g = -kPi + (2.0 * k + 1.0) * kPi / M;
            cb.gamma(k) = g;
            for (int m = 0; m < M; ++m)
                cb.B(m, k) = scale * std::polar(1.0, (m - c) * g);
        }
        return cb;
    }

    struct SubarrayMask
    {
        std::vector<int> indices; // sorted, contiguous element rows

        int size() const { return static_cast<int>(indices.size()); }

        CMatrix rows_of(const CMatrix &Y) const
        {
            CMatrix out(size(), Y.cols());
            for (int i = 0; i < size(); ++i)
                out.row(i) = Y.row(indices[static_cast<std::size_t>(i)]);
            return out;
        }

        // Row picker J (|mask| x M).
        RMatrix selector(int M) const
        {
            RMatrix J = RMatrix::Zero(size(), M);
            for (int i = 0; i < size(); ++i)
                J(i, indices[static_cast<std::size_t>(i)]) = 1.0;
            return J;
        }
    };

    inline SubarrayMask contiguous_mask(int first, int count)
    {
        SubarrayMask m;
        m.indices.resize(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i)
            m.indices[static_cast<std::size_t>(i)] = first + i;
        return m;
    }

    // Central block of N_RF elements; M and N_RF must share parity so the block is symmetric.
    inline SubarrayMask centro_symmetric_mask(int M, int n_rf)
    {
        require(n_rf >= 1 && n_rf <= M, "centro_symmetric_mask: need 1 <= N_RF <= M");
        require((M - n_rf) % 2 == 0, "centro_symmetric_mask: M and N_RF must have equal parity");
        return contiguous_mask((M - n_rf) / 2, n_rf);
    }

    inline SubarrayMask noncentro_mask(int M, int n_rf)
    {
        require(n_rf >= 1 && n_rf <= M, "noncentro_mask: need 1 <= N_RF <= M");
        return contiguous_mask(0, n_rf);
    }

    namespace detail
    {
        inline std::string join_indices(const std::vector<int> &v)
        {
            std::string s = "{";
            for (std::size_t i = 0; i < v.size(); ++i)
                s += (i ? "," : "") + std::to_string(v[i]);
            return s + "}";
        }
    } // namespace detail

    // Digital combiner W_BB with J * W_RF * W_BB = I, so that W^H Y returns the masked rows
    // of Y. The beam list is only used to name the offending subset in the error message.
    inline CMatrix solve_baseband_combiner(const CMatrix &W_rf, const SubarrayMask &mask,
                                           const std::vector<int> &beams = {})
    {
        require(mask.size() == W_rf.cols(), "solve_baseband_combiner: mask size must equal RF chain count");
        for (int r : mask.indices)
            require(r >= 0 && r < W_rf.rows(), "solve_baseband_combiner: mask row out of range");

        const CMatrix G = mask.rows_of(W_rf);
        Eigen::JacobiSVD<CMatrix> svd(G);
        const RVector s = svd.singularValues();
        const double smin = s(s.size() - 1);
        const std::string who = beams.empty() ? std::string("given columns") : "beams " + detail::join_indices(beams);
        if (!(smin > 0.0) || s(0) / smin >= 1e8)
            throw Error(Errc::singular, "solve_baseband_combiner: masked analog matrix is singular for " + who);
        return G.partialPivLu().inverse();
    }

    // Row r of the result is b_{beams[r]}^H Y.
    inline SnapshotMatrix project_to_beams(const CMatrix &Y, const std::vector<int> &beams, const DftCodebook &cb)
    {
        require(!beams.empty(), "project_to_beams: empty beam set");
        require(Y.rows() == cb.M, "project_to_beams: row count differs from codebook size");
        CMatrix Bs(cb.M, static_cast<Eigen::Index>(beams.size()));
        for (std::size_t i = 0; i < beams.size(); ++i)
        {
            require(beams[i] >= 0 && beams[i] < cb.M, "project_to_beams: beam index out of range");
            Bs.col(static_cast<Eigen::Index>(i)) = cb.B.col(beams[i]);
        }
        return SnapshotMatrix{Bs.adjoint() * Y, ChannelKind::beam};
    }

} // namespace bsdoa
