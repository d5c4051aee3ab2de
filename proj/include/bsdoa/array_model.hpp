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

// Narrowband ULA data model: steering vectors, snapshot synthesis and covariances.
// Directions are carried as spatial frequencies mu in radians; physical angles never appear.

#include "bsdoa/core.hpp"
#include "bsdoa/rng.hpp"

#include <cstdint>
#include <numeric>
#include <vector>

namespace bsdoa
{
    struct Scenario
    {
        int M = 32;                  // antenna count
        std::vector<double> mu;      // source spatial frequencies [rad]
        std::vector<double> powers;  // linear source powers
        double n0 = 0.0;             // noise variance
        int n_snap = 100;            // snapshot count
        std::uint64_t seed = 0;

        int d() const { return static_cast<int>(mu.size()); }

        double total_power() const { return std::accumulate(powers.begin(), powers.end(), 0.0); }

        // Throws Error(invalid_argument) on the first violated invariant.
        void validate() const
        {
            require(M >= 1, "scenario: M must be positive");
            require(!mu.empty(), "scenario: at least one source required");
            require(d() <= M, "scenario: more sources than antennas");
            require(powers.size() == mu.size(), "scenario: powers and mu differ in length");
            for (double p : powers)
                require(p > 0.0, "scenario: source powers must be strictly positive");
            require(n0 >= 0.0, "scenario: noise variance must be non-negative");
            require(n_snap >= 1, "scenario: at least one snapshot required");
            for (std::size_t i = 0; i < mu.size(); ++i)
                for (std::size_t j = i + 1; j < mu.size(); ++j)
                    require(std::abs(wrap_angle(mu[i] - mu[j])) > 1e-12, "scenario: duplicate spatial frequencies");
        }
    };

    enum class ChannelKind
    {
        element,
        beam,
    };

    struct SnapshotMatrix
    {
        CMatrix data; // rows = channels, cols = snapshots
        ChannelKind kind = ChannelKind::element;

        Eigen::Index channels() const { return data.rows(); }
        Eigen::Index snapshots() const { return data.cols(); }
    };

    // a(mu)[m] = exp(j m mu), m = 0..M-1
    inline CVector steering_vector(double mu, int M)
    {
        require(M >= 1, "steering_vector: M must be positive");
        CVector a(M);
        for (int m = 0; m < M; ++m)
            a(m) = std::polar(1.0, m * mu);
        return a;
    }

    // Manifold without the distinctness check, for model reconstruction from estimates.
    inline CMatrix manifold_unchecked(const std::vector<double> &mu, int M)
    {
        CMatrix A(M, static_cast<Eigen::Index>(mu.size()));
        for (std::size_t k = 0; k < mu.size(); ++k)
            A.col(static_cast<Eigen::Index>(k)) = steering_vector(mu[k], M);
        return A;
    }

    inline CMatrix manifold(const std::vector<double> &mu, int M)
    {
        require(!mu.empty(), "manifold: empty frequency list");
        for (std::size_t i = 0; i < mu.size(); ++i)
            for (std::size_t j = i + 1; j < mu.size(); ++j)
                if (std::abs(wrap_angle(mu[i] - mu[j])) <= 1e-12)
                    throw Error(Errc::rank_deficient, "manifold: duplicate spatial frequencies");
        return manifold_unchecked(mu, M);
    }

    // Noise variance giving the requested array SNR: N0 = sum(p) / 10^(asnr/10).
    inline double asnr_to_n0(double asnr_db, const std::vector<double> &powers)
    {
        require(!powers.empty(), "asnr_to_n0: empty power vector");
        double total = 0.0;
        for (double p : powers)
        {
            require(p > 0.0, "asnr_to_n0: powers must be strictly positive");
            total += p;
        }
        return total / std::pow(10.0, asnr_db / 10.0);
    }

    inline double n0_to_asnr(double n0, const std::vector<double> &powers)
    {
        require(n0 > 0.0, "n0_to_asnr: noise variance must be positive");
        return 10.0 * std::log10(std::accumulate(powers.begin(), powers.end(), 0.0) / n0);
    }

    struct Snapshots
    {
        SnapshotMatrix Y; // element-space array output
        CMatrix S;        // source symbols, d x n_snap
        CMatrix N;        // additive noise, M x n_snap
    };

    // Y = A(mu) S + N. Signal and noise come from separate streams of the same key.
    inline Snapshots generate_snapshots(const Scenario &sc, const RngKey &key)
    {
        sc.validate();
        const int d = sc.d();
        auto sig = make_engine(key, Stream::signal);
        auto noi = make_engine(key, Stream::noise);

        CMatrix S = complex_gaussian(d, sc.n_snap, 1.0, sig);
        for (int k = 0; k < d; ++k)
            S.row(k) *= std::sqrt(sc.powers[static_cast<std::size_t>(k)]);

        CMatrix N = sc.n0 > 0.0 ? complex_gaussian(sc.M, sc.n_snap, sc.n0, noi)
                                : CMatrix::Zero(sc.M, sc.n_snap);

        Snapshots out;
        out.Y.data = manifold(sc.mu, sc.M) * S + N;
        out.Y.kind = ChannelKind::element;
        out.S = std::move(S);
        out.N = std::move(N);
        return out;
    }

    // A diag(p) A^H + N0 I
    inline CMatrix theoretical_covariance(const Scenario &sc)
    {
        sc.validate();
        const CMatrix A = manifold(sc.mu, sc.M);
        RVector p(sc.d());
        for (int k = 0; k < sc.d(); ++k)
            p(k) = sc.powers[static_cast<std::size_t>(k)];
        CMatrix R = A * p.asDiagonal() * A.adjoint();
        R.diagonal().array() += sc.n0;
        return hermitian_part(R);
    }

    // (1/N) Y Y^H
    inline CMatrix sample_covariance(const CMatrix &Y)
    {
        require(Y.cols() > 0, "sample_covariance: no snapshots");
        return hermitian_part(Y * Y.adjoint() / static_cast<double>(Y.cols()));
    }

} // namespace bsdoa
