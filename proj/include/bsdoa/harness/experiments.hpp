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

// Experiment cells, parallel trial execution and per-cell metric reduction.

#include "bsdoa/harness/pipeline.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <thread>
#include <vector>

namespace bsdoa::harness
{
    namespace detail
    {
        inline std::vector<PipelineId> restrict_to(const std::vector<PipelineId> &wanted, std::initializer_list<PipelineId> allowed)
        {
            std::vector<PipelineId> out;
            for (auto p : wanted)
                for (auto a : allowed)
                    if (p == a)
                        out.push_back(p);
            return out;
        }

        inline Scenario base_scenario(const Config &c, const std::vector<double> &mu, const std::vector<double> &powers, double asnr_db)
        {
            Scenario sc;
            sc.M = c.M;
            sc.mu = mu;
            sc.powers = powers;
            sc.n_snap = c.n_snap;
            sc.seed = c.seed;
            sc.n0 = asnr_to_n0(asnr_db, powers);
            return sc;
        }
    } // namespace detail

    // Sweep grid for the ASNR-based experiments: harness.asnr_grid, else the single scenario value.
    inline std::vector<double> asnr_points(const Config &c)
    {
        if (!c.asnr_grid.empty())
            return c.asnr_grid;
        if (c.asnr_db)
            return {*c.asnr_db};
        require(c.n0.has_value(), "asnr_points: no noise level configured");
        return {n0_to_asnr(*c.n0, c.powers)};
    }

    // Midpoint between adjacent beam frequencies closest to mu.
    inline double sector_edge_frequency(const DftCodebook &cb, double mu)
    {
        double best = 0.0, dist = std::numeric_limits<double>::infinity();
        for (int k = 0; k + 1 < cb.M; ++k)
        {
            const double e = 0.5 * (cb.gamma(k) + cb.gamma(k + 1));
            if (std::abs(e - mu) < dist)
            {
                dist = std::abs(e - mu);
                best = e;
            }
        }
        return best;
    }

    inline std::vector<Cell> build_cells(const Config &c)
    {
        std::vector<Cell> cells;
        switch (c.experiment)
        {
        case Experiment::asnr:
        {
            const auto grid = asnr_points(c);
            for (std::size_t i = 0; i < grid.size(); ++i)
            {
                Cell cell;
                cell.experiment = Experiment::asnr;
                cell.asnr_db = grid[i];
                cell.kf = c.k_per_source;
                cell.scenario = detail::base_scenario(c, c.mu, c.powers, grid[i]);
                if (c.asnr_grid.empty() && c.n0)
                    cell.scenario.n0 = *c.n0;
                cell.baseline_mask = c.baseline_mask;
                cell.rng_cell = i;
                cell.pipelines = c.pipelines;
                cells.push_back(cell);
            }
            break;
        }
        case Experiment::budget:
            for (std::size_t i = 0; i < c.budget_asnr.size(); ++i)
                for (int k : c.budget_k)
                {
                    Cell cell;
                    cell.experiment = Experiment::budget;
                    cell.asnr_db = c.budget_asnr[i];
                    cell.kf = k;
                    cell.scenario = detail::base_scenario(c, c.mu, c.powers, cell.asnr_db);
                    cell.baseline_mask = c.baseline_mask;
                    cell.rng_cell = i;
                    cell.pipelines = detail::restrict_to(c.pipelines, {PipelineId::fine_cov, PipelineId::fine_sect});
                    cells.push_back(cell);
                }
            break;
        case Experiment::edge:
        {
            const DftCodebook cb = dft_codebook(c.M);
            const double mu_edge = sector_edge_frequency(cb, c.edge_mu_near);
            for (std::size_t i = 0; i < c.edge_asnr.size(); ++i)
                for (int j = 0; j < c.edge_offsets; ++j)
                {
                    const double u = c.edge_offsets == 1 ? 0.0 : -1.0 + 2.0 * j / (c.edge_offsets - 1);
                    Cell cell;
                    cell.experiment = Experiment::edge;
                    cell.asnr_db = c.edge_asnr[i];
                    cell.kf = c.k_per_source;
                    cell.offset_norm = u;
                    cell.scenario = detail::base_scenario(c, {c.edge_mu_fixed, mu_edge + u * 0.5 * c.w_sec()}, c.edge_powers,
                                                          cell.asnr_db);
                    cell.baseline_mask = c.baseline_mask;
                    cell.rng_cell = i * 1000 + static_cast<std::uint64_t>(j);
                    cell.pipelines = detail::restrict_to(c.pipelines, {PipelineId::fine_cov, PipelineId::fine_sect});
                    cells.push_back(cell);
                }
            break;
        }
        case Experiment::kf:
        {
            const auto grid = asnr_points(c);
            for (std::size_t i = 0; i < grid.size(); ++i)
                for (int k : c.kf_values)
                {
                    Cell cell;
                    cell.experiment = Experiment::kf;
                    cell.asnr_db = grid[i];
                    cell.kf = k;
                    cell.scenario = detail::base_scenario(c, c.mu, c.powers, grid[i]);
                    cell.baseline_mask = MaskKind::centro; // both selectors share one coarse stage
                    cell.rng_cell = i;
                    cell.pipelines = detail::restrict_to(c.pipelines, {PipelineId::fine_cov, PipelineId::fine_sect});
                    cells.push_back(cell);
                }
            break;
        }
        }
        return cells;
    }

    // Trials [begin, end) of one cell, in index order regardless of thread count.
    inline std::vector<TrialRecord> run_trials(const RunContext &ctx, const Cell &cell, std::uint64_t begin, std::uint64_t end,
                                               int threads)
    {
        std::vector<TrialRecord> recs(static_cast<std::size_t>(end - begin));
        std::atomic<std::uint64_t> next{begin};
        auto worker = [&]
        {
            for (std::uint64_t t = next++; t < end; t = next++)
                recs[static_cast<std::size_t>(t - begin)] = run_trial(ctx, cell, t);
        };
        const int n = std::max(1, threads);
        if (n == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (int i = 0; i < n; ++i)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }
        return recs;
    }

    struct CellReport
    {
        Cell cell;
        PipelineId pipeline = PipelineId::fine_cov;
        int trials = 0;  // completed
        int aborted = 0;
        std::map<std::string, int> abort_causes;
        double rmse = std::numeric_limits<double>::quiet_NaN();
        double crb = std::numeric_limits<double>::quiet_NaN();
        double gap_db = std::numeric_limits<double>::quiet_NaN();
        FailureStats fail;
        double lpa_p50 = std::numeric_limits<double>::quiet_NaN();
        double lpa_largest_p50 = std::numeric_limits<double>::quiet_NaN();
        double t_cov = 0.0, t_sel = 0.0, t_es = 0.0, t_total = 0.0; // medians
        std::vector<double> max_errors;                            // completed trials, index order
        std::vector<double> lpa;
        std::vector<double> sq_errors; // per-trial mean squared error

        bool operator==(const CellReport &o) const
        {
            auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
            return pipeline == o.pipeline && trials == o.trials && aborted == o.aborted && abort_causes == o.abort_causes &&
                   same(rmse, o.rmse) && same(crb, o.crb) && same(gap_db, o.gap_db) && fail.failures == o.fail.failures &&
                   same(fail.lo, o.fail.lo) && same(fail.hi, o.fail.hi) && same(lpa_p50, o.lpa_p50) && max_errors == o.max_errors &&
                   sq_errors == o.sq_errors;
        }
    };

    // Reduce trial records (in index order) to one report per pipeline.
    inline std::vector<CellReport> reduce_cell(const RunContext &ctx, const Cell &cell, const std::vector<TrialRecord> &recs)
    {
        double crb = std::numeric_limits<double>::quiet_NaN();
        if (cell.scenario.n0 > 0.0)
        {
            try
            {
                crb = stochastic_crb(cell.scenario).crb;
            }
            catch (const Error &)
            {
            }
        }

        std::vector<CellReport> out;
        for (std::size_t p = 0; p < cell.pipelines.size(); ++p)
        {
            CellReport r;
            r.cell = cell;
            r.pipeline = cell.pipelines[p];
            r.crb = crb;
            std::vector<std::vector<double>> errs;
            std::vector<double> tc, ts, te, tt, lpa_l;
            for (const auto &rec : recs)
            {
                const auto &o = rec.outcomes[p];
                if (!o.ok)
                {
                    ++r.aborted;
                    ++r.abort_causes[o.cause];
                    continue;
                }
                errs.push_back(o.errors);
                r.max_errors.push_back(o.max_error);
                r.sq_errors.push_back(sum_squares(o.errors) / static_cast<double>(o.errors.size()));
                if (!std::isnan(o.lpa_deg))
                    r.lpa.push_back(o.lpa_deg);
                if (!std::isnan(o.lpa_largest_deg))
                    lpa_l.push_back(o.lpa_largest_deg);
                tc.push_back(o.t_cov);
                ts.push_back(o.t_sel);
                te.push_back(o.t_es);
                tt.push_back(o.t_total);
            }
            r.trials = static_cast<int>(errs.size());
            if (r.trials > 0)
            {
                r.rmse = rmse(errs);
                if (crb > 0.0 && r.rmse > 0.0)
                    r.gap_db = gap_to_crb_db(r.rmse, crb);
                if (crb > 0.0)
                    r.fail = failure_stats(r.max_errors, crb, ctx.config.k_thr);
                r.lpa_p50 = median(r.lpa);
                r.lpa_largest_p50 = median(lpa_l);
                r.t_cov = median(tc);
                r.t_sel = median(ts);
                r.t_es = median(te);
                r.t_total = median(tt);
            }
            out.push_back(std::move(r));
        }
        return out;
    }

    struct Calibration
    {
        EigenMap chosen = EigenMap::half_angle_tangent;
        bool from_config = false;
        double literal_max_error = std::numeric_limits<double>::quiet_NaN();
        double tangent_max_error = std::numeric_limits<double>::quiet_NaN();
        bool passed = false;
    };

    // Noiseless oracle-beam runs decide how fine-stage eigenvalues map to frequencies:
    // the literal arg() map is kept if it recovers the truth to 1e-6, otherwise the
    // half-angle tangent map is used.
    inline Calibration calibrate_eigen_map(const Config &c, int trials = 5)
    {
        Calibration cal;
        auto probe = [&](EigenMap map)
        {
            Config cc = c;
            cc.eigen_map = map;
            RunContext ctx(cc);
            ctx.timing = false;
            Cell cell;
            cell.scenario = detail::base_scenario(c, c.mu, c.powers, 0.0);
            cell.scenario.n0 = 0.0;
            cell.kf = c.k_per_source;
            cell.pipelines = {PipelineId::fine_oracle};
            double worst = 0.0;
            for (int t = 0; t < trials; ++t)
            {
                const auto rec = run_trial(ctx, cell, static_cast<std::uint64_t>(t));
                const auto &o = rec.outcomes[0];
                worst = std::max(worst, o.ok ? o.max_error : std::numeric_limits<double>::infinity());
            }
            return worst;
        };
        cal.literal_max_error = probe(EigenMap::literal_angle);
        cal.tangent_max_error = probe(EigenMap::half_angle_tangent);
        if (c.eigen_map)
        {
            cal.chosen = *c.eigen_map;
            cal.from_config = true;
        }
        else
            cal.chosen = cal.literal_max_error <= 1e-6 ? EigenMap::literal_angle : EigenMap::half_angle_tangent;
        cal.passed = (cal.chosen == EigenMap::literal_angle ? cal.literal_max_error : cal.tangent_max_error) <= 1e-6;
        return cal;
    }

    struct RunResult
    {
        Config config;
        std::string config_hash;
        Calibration calibration;
        std::vector<CellReport> reports;
    };

    using Progress = std::function<void(std::size_t done, std::size_t total)>;

    inline int resolve_threads(int requested)
    {
        if (requested > 0)
            return requested;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw ? static_cast<int>(hw) : 1;
    }

    inline RunResult run_experiment(const Config &cfg, const Progress &progress = {})
    {
        cfg.validate();
        RunResult res;
        res.config = cfg;
        res.config_hash = config_hash(cfg);
        res.calibration = calibrate_eigen_map(cfg);

        RunContext ctx(cfg);
        ctx.eigen_map = res.calibration.chosen;
        const int threads = resolve_threads(cfg.threads);
        const auto cells = build_cells(cfg);
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (cells[i].pipelines.empty())
                continue;
            const auto recs = run_trials(ctx, cells[i], 0, static_cast<std::uint64_t>(cfg.trials), threads);
            for (auto &r : reduce_cell(ctx, cells[i], recs))
                res.reports.push_back(std::move(r));
            if (progress)
                progress(i + 1, cells.size());
        }
        return res;
    }

} // namespace bsdoa::harness
