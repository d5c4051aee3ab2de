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

// One Monte Carlo trial: a single snapshot realisation shared by every requested pipeline.

#include "bsdoa/beam_selection.hpp"
#include "bsdoa/coarse_esprit.hpp"
#include "bsdoa/covariance_fit.hpp"
#include "bsdoa/fine_esprit.hpp"
#include "bsdoa/harness/config.hpp"
#include "bsdoa/metrics.hpp"

#include <chrono>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace bsdoa::harness
{
    // Everything that varies between experiment cells.
    struct Cell
    {
        Experiment experiment = Experiment::asnr;
        double asnr_db = 0.0;
        int kf = 2;                        // fine beams per source
        std::optional<double> offset_norm; // sector-edge experiment only
        Scenario scenario;
        MaskKind baseline_mask = MaskKind::noncentro;
        std::uint64_t rng_cell = 0;
        std::vector<PipelineId> pipelines;
    };

    // Read-only state shared by all trials of a run.
    struct RunContext
    {
        Config config;
        DftCodebook codebook;
        SubarrayMask centro;
        SubarrayMask noncentro;
        EigenMap eigen_map = EigenMap::half_angle_tangent;
        bool timing = false;

        explicit RunContext(const Config &c)
            : config(c), codebook(dft_codebook(c.M)), centro(centro_symmetric_mask(c.M, c.n_rf)),
              noncentro(noncentro_mask(c.M, c.n_rf)), eigen_map(c.eigen_map.value_or(EigenMap::half_angle_tangent)),
              timing(c.timing_enabled())
        {
        }

        ToeplitzOptions toeplitz_options() const
        {
            ToeplitzOptions t = config.toeplitz;
            t.M_grid = config.grid_factor * config.M;
            return t;
        }
    };

    struct PipelineOutcome
    {
        bool ok = false;
        std::string cause;         // error tag for aborted runs
        std::vector<double> mu_hat;
        std::vector<double> errors; // matched, wrapped
        double max_error = 0.0;
        double lpa_deg = std::numeric_limits<double>::quiet_NaN();
        double lpa_largest_deg = std::numeric_limits<double>::quiet_NaN();
        std::vector<int> beams;
        double t_cov = 0.0, t_sel = 0.0, t_es = 0.0, t_total = 0.0; // milliseconds
    };

    struct TrialRecord
    {
        std::uint64_t index = 0;
        std::uint64_t y_checksum = 0;
        std::vector<PipelineOutcome> outcomes; // aligned with Cell::pipelines
    };

    inline std::uint64_t checksum(const CMatrix &Y)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        const auto *p = reinterpret_cast<const unsigned char *>(Y.data());
        const std::size_t n = static_cast<std::size_t>(Y.size()) * sizeof(cplx);
        for (std::size_t i = 0; i < n; ++i)
        {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    namespace detail
    {
        class Stopwatch
        {
        public:
            explicit Stopwatch(bool on) : on_(on) { reset(); }
            void reset()
            {
                if (on_)
                    t0_ = std::chrono::steady_clock::now();
            }
            double ms() const
            {
                if (!on_)
                    return 0.0;
                return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
            }

        private:
            bool on_;
            std::chrono::steady_clock::time_point t0_{};
        };

        struct CoarseRun
        {
            std::optional<CoarseEstimate> est;
            std::string cause;
            double ms = 0.0;
        };

        inline CoarseRun run_coarse(const CMatrix &Y, const SubarrayMask &mask, int d, SolveMode mode, bool timing)
        {
            CoarseRun r;
            Stopwatch sw(timing);
            try
            {
                r.est = coarse_estimate(mask.rows_of(Y), d, mode);
            }
            catch (const Error &e)
            {
                r.cause = std::string("coarse:") + errc_name(e.code());
            }
            r.ms = sw.ms();
            return r;
        }

        inline void finish(PipelineOutcome &o, const Scenario &sc)
        {
            o.errors = matched_errors(o.mu_hat, sc.mu);
            o.max_error = max_abs(o.errors);
            try
            {
                const auto pa = principal_angles_deg(sc.mu, o.mu_hat, sc.M);
                o.lpa_deg = pa.smallest_deg;
                o.lpa_largest_deg = pa.largest_deg;
            }
            catch (const Error &)
            {
            }
            o.ok = true;
        }

        inline FineEstimate fine_stage(const RunContext &ctx, const CMatrix &Y, const std::vector<int> &beams, int d)
        {
            const SnapshotMatrix Yb = project_to_beams(Y, beams, ctx.codebook);
            return sparse_beamspace_esprit(Yb.data, beams, d, ctx.codebook, ctx.config.fine_mode, ctx.eigen_map);
        }
    } // namespace detail

    inline TrialRecord run_trial(const RunContext &ctx, const Cell &cell, std::uint64_t trial)
    {
        const Scenario &sc = cell.scenario;
        const int d = sc.d();
        const bool timing = ctx.timing;
        const Snapshots snap = generate_snapshots(sc, RngKey{ctx.config.seed, cell.rng_cell, trial});
        const CMatrix &Y = snap.Y.data;

        TrialRecord rec;
        rec.index = trial;
        rec.y_checksum = checksum(Y);

        auto needs = [&](PipelineId p)
        {
            for (auto q : cell.pipelines)
                if (q == p)
                    return true;
            return false;
        };
        const bool need_centro = needs(PipelineId::coarse_centro) || needs(PipelineId::fine_cov) ||
                                 (needs(PipelineId::fine_sect) && cell.baseline_mask == MaskKind::centro);
        const bool need_non = needs(PipelineId::coarse_noncentro) ||
                              (needs(PipelineId::fine_sect) && cell.baseline_mask == MaskKind::noncentro);
        detail::CoarseRun c_centro, c_non;
        if (need_centro)
            c_centro = detail::run_coarse(Y, ctx.centro, d, ctx.config.coarse_mode, timing);
        if (need_non)
            c_non = detail::run_coarse(Y, ctx.noncentro, d, ctx.config.coarse_mode, timing);

        for (auto pid : cell.pipelines)
        {
            PipelineOutcome o;
            try
            {
                switch (pid)
                {
                case PipelineId::coarse_centro:
                case PipelineId::coarse_noncentro:
                {
                    const auto &c = pid == PipelineId::coarse_centro ? c_centro : c_non;
                    o.t_total = c.ms;
                    if (!c.est)
                    {
                        o.cause = c.cause;
                        break;
                    }
                    o.mu_hat = c.est->mu;
                    detail::finish(o, sc);
                    break;
                }
                case PipelineId::fine_cov:
                {
                    if (!c_centro.est)
                    {
                        o.cause = c_centro.cause;
                        break;
                    }
                    const CoarseEstimate &ce = *c_centro.est;
                    detail::Stopwatch sw(timing);
                    const PowerFit pf = fit_powers(ce.R_fba, ce.mu, ctx.centro, ctx.config.nnls_ridge);
                    const CMatrix Rs = reconstruct_signal_covariance(ce.mu, pf.p_hat, sc.M);
                    const ToeplitzFit tf = toeplitz_psd_project(Rs, ctx.toeplitz_options());
                    o.t_cov = sw.ms();
                    sw.reset();
                    const SectorPools pools = sectorize(ce.mu, ctx.codebook, ctx.config.w_sec(), cell.kf);
                    const BeamSelection sel = select_beams(pools, tf.R, ctx.codebook, ctx.config.selection);
                    o.t_sel = sw.ms();
                    sw.reset();
                    o.beams = sel.beams;
                    o.mu_hat = detail::fine_stage(ctx, Y, sel.beams, d).mu;
                    o.t_es = sw.ms();
                    o.t_total = c_centro.ms + o.t_cov + o.t_sel + o.t_es;
                    detail::finish(o, sc);
                    break;
                }
                case PipelineId::fine_sect:
                {
                    const auto &c = cell.baseline_mask == MaskKind::centro ? c_centro : c_non;
                    if (!c.est)
                    {
                        o.cause = c.cause;
                        break;
                    }
                    detail::Stopwatch sw(timing);
                    const BeamSelection sel = baseline_sectorization_select(c.est->mu, ctx.codebook, cell.kf);
                    o.t_sel = sw.ms();
                    sw.reset();
                    o.beams = sel.beams;
                    o.mu_hat = detail::fine_stage(ctx, Y, sel.beams, d).mu;
                    o.t_es = sw.ms();
                    o.t_total = c.ms + o.t_sel + o.t_es;
                    detail::finish(o, sc);
                    break;
                }
                case PipelineId::fine_oracle:
                {
                    detail::Stopwatch sw(timing);
                    const BeamSelection sel = oracle_select(sc.mu, ctx.codebook, cell.kf, ctx.config.oracle_rule);
                    o.t_sel = sw.ms();
                    sw.reset();
                    o.beams = sel.beams;
                    o.mu_hat = detail::fine_stage(ctx, Y, sel.beams, d).mu;
                    o.t_es = sw.ms();
                    o.t_total = o.t_sel + o.t_es;
                    detail::finish(o, sc);
                    break;
                }
                }
            }
            catch (const Error &e)
            {
                o = PipelineOutcome{};
                o.cause = std::string(pipeline_name(pid)) + ":" + errc_name(e.code());
            }
            rec.outcomes.push_back(std::move(o));
        }
        return rec;
    }

} // namespace bsdoa::harness
