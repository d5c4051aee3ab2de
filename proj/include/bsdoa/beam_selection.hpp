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

// Sector pools around coarse estimates, covariance-guided contiguous window search, and the
// two data-independent selectors (nearest-beam sectorization and truth-centred oracle).

#include "bsdoa/covariance_fit.hpp"
#include "bsdoa/hybrid_combiner.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace bsdoa
{
    struct SectorPools
    {
        std::vector<std::vector<int>> pools;   // contiguous, ascending, pairwise disjoint
        std::vector<double> centers;           // spatial frequency at the middle of each sector
        std::vector<int> budgets;              // K_g per pool
        std::vector<std::vector<int>> members; // coarse-estimate indices per pool
        double w_sec = 0.0;

        int size() const { return static_cast<int>(pools.size()); }
    };

    struct BeamSelection
    {
        std::vector<std::vector<int>> per_sector;
        std::vector<int> beams; // sorted union
        std::vector<double> scores;
        std::vector<double> cond2;
    };

    namespace detail
    {
        inline std::vector<int> range_indices(int lo, int hi)
        {
            std::vector<int> v;
            for (int k = lo; k <= hi; ++k)
                v.push_back(k);
            return v;
        }

        inline std::vector<int> sorted_union(const std::vector<std::vector<int>> &sets)
        {
            std::vector<int> u;
            for (const auto &s : sets)
                u.insert(u.end(), s.begin(), s.end());
            std::sort(u.begin(), u.end());
            u.erase(std::unique(u.begin(), u.end()), u.end());
            return u;
        }

        // Grow [lo, hi] inside [0, M-1] until it holds `need` beams. Each step extends the side
        // whose next beam lies closer to `center`; exact ties extend to the right.
        inline void grow_range(int &lo, int &hi, int need, int M, const DftCodebook &cb, double center)
        {
            need = std::min(need, M);
            while (hi - lo + 1 < need)
            {
                const bool can_left = lo > 0, can_right = hi < M - 1;
                if (can_left && can_right)
                {
                    const double dl = std::abs(cb.gamma(lo - 1) - center);
                    const double dr = std::abs(cb.gamma(hi + 1) - center);
                    if (dl < dr)
                        --lo;
                    else
                        ++hi;
                }
                else if (can_left)
                    --lo;
                else
                    ++hi;
            }
        }
    } // namespace detail

    // Group coarse estimates into sectors and build one contiguous beam pool per sector.
    // k_per_source beams are budgeted for every estimate; merged sectors sum their budgets.
    inline SectorPools sectorize(const std::vector<double> &mu_coarse, const DftCodebook &cb, double w_sec, int k_per_source)
    {
        require(!mu_coarse.empty(), "sectorize: no coarse estimates");
        require(w_sec >= 0.0, "sectorize: sector width must be non-negative");
        require(k_per_source >= 1, "sectorize: budget must be positive");
        const int M = cb.M;
        const double delta = cb.spacing();
        const int link = static_cast<int>(std::ceil(w_sec / delta - 1e-9));

        std::vector<int> order(mu_coarse.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b)
                         { return wrap_angle(mu_coarse[static_cast<std::size_t>(a)]) < wrap_angle(mu_coarse[static_cast<std::size_t>(b)]); });

        // Chain estimates whose nearest beams are within `link` beams of each other.
        std::vector<std::vector<int>> groups;
        int prev_beam = 0;
        for (int idx : order)
        {
            const int nb = cb.nearest_beam(mu_coarse[static_cast<std::size_t>(idx)]);
            if (groups.empty() || nb - prev_beam > link)
                groups.emplace_back();
            groups.back().push_back(idx);
            prev_beam = nb;
        }

        struct Block
        {
            int lo, hi;
            double mu_lo, mu_hi;
            std::vector<int> members;
        };

        auto build_range = [&](Block &b)
        {
            const double tol = 1e-9 * delta;
            const double a = b.mu_lo - 0.5 * w_sec - tol, z = b.mu_hi + 0.5 * w_sec + tol;
            int lo = M, hi = -1;
            for (int k = 0; k < M; ++k)
                if (cb.gamma(k) >= a && cb.gamma(k) <= z)
                {
                    lo = std::min(lo, k);
                    hi = std::max(hi, k);
                }
            if (hi < lo)
                lo = hi = cb.nearest_beam(0.5 * (b.mu_lo + b.mu_hi));
            const int need = k_per_source * static_cast<int>(b.members.size());
            detail::grow_range(lo, hi, need, M, cb, 0.5 * (b.mu_lo + b.mu_hi));
            b.lo = lo;
            b.hi = hi;
        };

        std::vector<Block> blocks;
        for (const auto &g : groups)
        {
            Block b{0, 0, wrap_angle(mu_coarse[static_cast<std::size_t>(g.front())]),
                    wrap_angle(mu_coarse[static_cast<std::size_t>(g.back())]), g};
            build_range(b);
            blocks.push_back(b);
        }

        // Merge overlapping pools; a merged pool may grow and overlap its neighbour again.
        bool merged = true;
        while (merged)
        {
            merged = false;
            for (std::size_t i = 0; i + 1 < blocks.size(); ++i)
                if (blocks[i + 1].lo <= blocks[i].hi)
                {
                    Block &a = blocks[i];
                    const Block &b = blocks[i + 1];
                    a.mu_lo = std::min(a.mu_lo, b.mu_lo);
                    a.mu_hi = std::max(a.mu_hi, b.mu_hi);
                    a.members.insert(a.members.end(), b.members.begin(), b.members.end());
                    const int lo = std::min(a.lo, b.lo), hi = std::max(a.hi, b.hi);
                    build_range(a);
                    a.lo = std::min(a.lo, lo);
                    a.hi = std::max(a.hi, hi);
                    blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                    merged = true;
                    break;
                }
        }

        SectorPools out;
        out.w_sec = w_sec;
        for (const auto &b : blocks)
        {
            out.pools.push_back(detail::range_indices(b.lo, b.hi));
            out.centers.push_back(0.5 * (b.mu_lo + b.mu_hi));
            out.budgets.push_back(k_per_source * static_cast<int>(b.members.size()));
            out.members.push_back(b.members);
        }
        return out;
    }

    // rho_m = Re[b_m^H R b_m]
    inline RVector power_profile(const CMatrix &R, const DftCodebook &cb)
    {
        require(R.rows() == cb.M && R.cols() == cb.M, "power_profile: covariance size differs from codebook");
        return (cb.B.adjoint() * R * cb.B).diagonal().real();
    }

    struct WindowScore
    {
        int start = 0;
        int size = 0;
        double score = -std::numeric_limits<double>::infinity();
        double cap = 0.0;
        double cond2 = std::numeric_limits<double>::infinity();
        bool skipped = true;
    };

    struct SelectionParams
    {
        double gamma = 1e-8; // Tikhonov weight on the window Gram
        double alpha = 1e-3; // conditioning penalty
        int prune_q = 0;     // 0 = exhaustive search
    };

    // Capture tr[(G + gamma I)^-1 B_S^H R B_S] discounted by 1 + alpha cond(G)^2, G = B_S^H B_S.
    inline WindowScore score_window(int start, int size, const CMatrix &R, const DftCodebook &cb, double gamma, double alpha)
    {
        require(size >= 2, "score_window: window must hold at least two beams");
        require(start >= 0 && start + size <= cb.M, "score_window: window outside the codebook");
        WindowScore ws;
        ws.start = start;
        ws.size = size;
        const CMatrix Bs = cb.B.middleCols(start, size);
        const CMatrix G = Bs.adjoint() * Bs;
        const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(G, Eigen::EigenvaluesOnly).eigenvalues();
        if (!(ev(0) > 1e-12 * ev(size - 1)))
            return ws;
        CMatrix Greg = G;
        Greg.diagonal().array() += gamma;
        const CMatrix P = Bs.adjoint() * R * Bs;
        ws.cap = Greg.llt().solve(P).trace().real();
        ws.cond2 = std::pow(ev(size - 1) / ev(0), 2);
        ws.score = ws.cap / (1.0 + alpha * ws.cond2);
        ws.skipped = false;
        return ws;
    }

    // Strict preference: higher score, then smaller cond^2, then centre closer to the pool
    // centre, then lower start. Scores within 1e-12 relative count as tied.
    inline bool window_better(const WindowScore &a, const WindowScore &b, int pool_lo, int pool_hi)
    {
        if (a.skipped != b.skipped)
            return !a.skipped;
        const double tol = 1e-12 * std::max(std::abs(a.score), std::abs(b.score));
        if (std::abs(a.score - b.score) > tol)
            return a.score > b.score;
        const double ctol = 1e-12 * std::max(a.cond2, b.cond2);
        if (std::abs(a.cond2 - b.cond2) > ctol)
            return a.cond2 < b.cond2;
        const int da = std::abs(2 * a.start + a.size - 1 - (pool_lo + pool_hi));
        const int db = std::abs(2 * b.start + b.size - 1 - (pool_lo + pool_hi));
        if (da != db)
            return da < db;
        return a.start < b.start;
    }

    // Candidate window starts for one pool. With prune_q > 0 only windows whose beam at offset
    // K/2 is among the q strongest pool beams survive; an empty survivor set falls back to all.
    inline std::vector<int> candidate_starts(const std::vector<int> &pool, int K, const RVector &rho, int prune_q)
    {
        const int lo = pool.front(), hi = pool.back();
        std::vector<int> all;
        for (int s = lo; s + K - 1 <= hi; ++s)
            all.push_back(s);
        if (prune_q <= 0)
            return all;

        std::vector<int> ranked(pool);
        std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) { return rho(a) > rho(b); });
        ranked.resize(std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(prune_q)));
        const int h = K / 2; // ceil((K-1)/2)
        std::vector<int> kept;
        for (int s : all)
            if (std::find(ranked.begin(), ranked.end(), s + h) != ranked.end())
                kept.push_back(s);
        return kept.empty() ? all : kept;
    }

    inline BeamSelection select_beams(const SectorPools &pools, const CMatrix &R, const DftCodebook &cb, const SelectionParams &par)
    {
        require(pools.size() > 0, "select_beams: no pools");
        require(static_cast<int>(pools.budgets.size()) == pools.size(), "select_beams: one budget per pool required");
        const RVector rho = par.prune_q > 0 ? power_profile(R, cb) : RVector();

        BeamSelection out;
        for (int g = 0; g < pools.size(); ++g)
        {
            const auto &pool = pools.pools[static_cast<std::size_t>(g)];
            const int n = static_cast<int>(pool.size());
            require(n >= 2, "select_beams: pool must hold at least two beams");
            const int K = std::clamp(pools.budgets[static_cast<std::size_t>(g)], 2, n);

            WindowScore best;
            bool have = false;
            for (int s : candidate_starts(pool, K, rho, par.prune_q))
            {
                const WindowScore ws = score_window(s, K, R, cb, par.gamma, par.alpha);
                if (ws.skipped)
                    continue;
                if (!have || window_better(ws, best, pool.front(), pool.back()))
                {
                    best = ws;
                    have = true;
                }
            }
            if (!have)
                throw Error(Errc::singular, "select_beams: every window of sector " + std::to_string(g) + " is singular");
            out.per_sector.push_back(detail::range_indices(best.start, best.start + K - 1));
            out.scores.push_back(best.score);
            out.cond2.push_back(best.cond2);
        }
        out.beams = detail::sorted_union(out.per_sector);
        return out;
    }

    // Place one K-window per start, merge overlapping windows into blocks, grow each block
    // back to (windows x K) beams and cut it into K-beam pieces again.
    inline BeamSelection assemble_fixed_windows(std::vector<int> starts, int K, const DftCodebook &cb)
    {
        const int M = cb.M;
        require(K >= 1 && K <= M, "assemble_fixed_windows: budget outside [1, M]");
        for (int &s : starts)
            s = std::clamp(s, 0, M - K);
        std::sort(starts.begin(), starts.end());
        starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

        struct Block
        {
            int lo, hi, count;
        };
        std::vector<Block> blocks;
        for (int s : starts)
            blocks.push_back({s, s + K - 1, 1});

        bool merged = true;
        while (merged)
        {
            merged = false;
            for (auto &b : blocks)
            {
                const double center = 0.5 * (cb.gamma(b.lo) + cb.gamma(b.hi));
                detail::grow_range(b.lo, b.hi, b.count * K, M, cb, center);
            }
            for (std::size_t i = 0; i + 1 < blocks.size(); ++i)
                if (blocks[i + 1].lo <= blocks[i].hi)
                {
                    blocks[i].hi = std::max(blocks[i].hi, blocks[i + 1].hi);
                    blocks[i].count += blocks[i + 1].count;
                    blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                    merged = true;
                    break;
                }
        }

        BeamSelection out;
        for (const auto &b : blocks)
            for (int s = b.lo; s <= b.hi; s += K)
                out.per_sector.push_back(detail::range_indices(s, std::min(s + K - 1, b.hi)));
        out.beams = detail::sorted_union(out.per_sector);
        return out;
    }

    // Fixed window on the beam nearest each coarse estimate, expanding to the right:
    // start = nearest - floor((K-1)/2).
    inline BeamSelection baseline_sectorization_select(const std::vector<double> &mu_coarse, const DftCodebook &cb, int K)
    {
        require(!mu_coarse.empty(), "baseline_sectorization_select: no estimates");
        std::vector<int> starts;
        for (double mu : mu_coarse)
            starts.push_back(cb.nearest_beam(mu) - (K - 1) / 2);
        return assemble_fixed_windows(starts, K, cb);
    }

    enum class OracleRule
    {
        closest_supports, // the K beams whose grid frequencies lie closest to the true frequency
        nearest_beam,     // the baseline window rule evaluated at the true frequency
    };

    inline BeamSelection oracle_select(const std::vector<double> &mu_true, const DftCodebook &cb, int K,
                                       OracleRule rule = OracleRule::closest_supports)
    {
        require(!mu_true.empty(), "oracle_select: no frequencies");
        if (rule == OracleRule::nearest_beam)
            return baseline_sectorization_select(mu_true, cb, K);
        std::vector<int> starts;
        for (double mu : mu_true)
        {
            const double x = (wrap_angle(mu) + kPi) / cb.spacing() - 0.5;
            starts.push_back(static_cast<int>(std::floor(x - 0.5 * (K - 1) + 0.5)));
        }
        return assemble_fixed_windows(starts, K, cb);
    }

} // namespace bsdoa
