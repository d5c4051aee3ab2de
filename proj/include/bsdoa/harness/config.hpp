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

// Flat "section.key = value" experiment configuration. '#' starts a comment, lists are
// comma separated, and numeric grids accept "start:step:stop".

#include "bsdoa/array_model.hpp"
#include "bsdoa/beam_selection.hpp"
#include "bsdoa/coarse_esprit.hpp"
#include "bsdoa/covariance_fit.hpp"
#include "bsdoa/fine_esprit.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#ifndef BSDOA_VERSION
#define BSDOA_VERSION "0.1.0"
#endif

namespace bsdoa::harness
{
    inline constexpr const char *kArtifactVersion = BSDOA_VERSION;

    enum class Experiment
    {
        asnr,
        budget,
        edge,
        kf,
    };

    enum class PipelineId
    {
        coarse_centro,
        coarse_noncentro,
        fine_cov,
        fine_sect,
        fine_oracle,
    };

    inline constexpr PipelineId kAllPipelines[] = {PipelineId::coarse_centro, PipelineId::coarse_noncentro, PipelineId::fine_cov,
                                                   PipelineId::fine_sect, PipelineId::fine_oracle};

    inline const char *pipeline_name(PipelineId p)
    {
        switch (p)
        {
        case PipelineId::coarse_centro:
            return "coarse_centro";
        case PipelineId::coarse_noncentro:
            return "coarse_noncentro";
        case PipelineId::fine_cov:
            return "fine_cov";
        case PipelineId::fine_sect:
            return "fine_sect";
        case PipelineId::fine_oracle:
            return "fine_oracle";
        }
        return "unknown";
    }

    inline const char *experiment_name(Experiment e)
    {
        switch (e)
        {
        case Experiment::asnr:
            return "asnr";
        case Experiment::budget:
            return "budget";
        case Experiment::edge:
            return "edge";
        case Experiment::kf:
            return "kf";
        }
        return "unknown";
    }

    enum class MaskKind
    {
        centro,
        noncentro,
    };

    enum class Timing
    {
        automatic, // on for the budget experiment only
        on,
        off,
    };

    struct Config
    {
        // scenario
        int M = 32;
        std::vector<double> mu{-2.1, 0.5, 2.5};
        std::vector<double> powers{0.95, 0.5, 0.1};
        int n_snap = 100;
        std::optional<double> n0;
        std::optional<double> asnr_db;
        std::uint64_t seed = 1;

        // coarse stage
        int n_rf = 12;
        SolveMode coarse_mode = SolveMode::tls;
        MaskKind baseline_mask = MaskKind::noncentro; // coarse mask feeding the sectorization baseline

        // fine stage
        int k_per_source = 2;
        SolveMode fine_mode = SolveMode::ls;
        std::optional<EigenMap> eigen_map; // empty = calibrate on a noiseless run

        // selection
        double w_sec_beams = 4.0;
        SelectionParams selection;
        OracleRule oracle_rule = OracleRule::closest_supports;

        // covariance fit
        double nnls_ridge = 1e-10;
        ToeplitzOptions toeplitz{0, 1e-10, SpectrumModel::bartlett};
        int grid_factor = 4;

        // metrics
        double k_thr = 3.0;

        // harness
        Experiment experiment = Experiment::asnr;
        std::vector<PipelineId> pipelines{std::begin(kAllPipelines), std::end(kAllPipelines)};
        std::vector<double> asnr_grid;
        int trials = 1000;
        int threads = 0;
        Timing timing = Timing::automatic;
        std::string out_dir = "out";
        bool full_scale = false;

        // experiment-specific
        std::vector<double> budget_asnr{3.0, 6.0};
        std::vector<int> budget_k{2, 4};
        std::vector<double> edge_asnr{3.0, 6.0};
        int edge_offsets = 41;
        double edge_mu_fixed = -2.1;
        double edge_mu_near = 0.5;
        std::vector<double> edge_powers{0.95, 0.5};
        std::vector<int> kf_values{2, 3, 4};

        double w_sec() const { return w_sec_beams * 2.0 * kPi / M; }

        bool timing_enabled() const
        {
            return timing == Timing::on || (timing == Timing::automatic && experiment == Experiment::budget);
        }

        bool has_pipeline(PipelineId p) const
        {
            for (auto q : pipelines)
                if (q == p)
                    return true;
            return false;
        }

        void validate() const
        {
            require(M >= 2, "config: scenario.M must be at least 2");
            require(!mu.empty() && mu.size() == powers.size(), "config: scenario.mu and scenario.powers must match in length");
            require(!(n0 && asnr_db), "config: set only one of scenario.n0 and scenario.asnr_db");
            require(n0 || asnr_db || !asnr_grid.empty() || experiment != Experiment::asnr,
                    "config: one of scenario.n0, scenario.asnr_db or harness.asnr_grid is required");
            require(n_rf >= 2 && n_rf <= M, "config: coarse.n_rf must lie in [2, M]");
            require((M - n_rf) % 2 == 0, "config: coarse.n_rf and scenario.M must have equal parity");
            require(k_per_source >= 2, "config: fine.k_per_source must be at least 2");
            require(trials >= 1, "config: harness.trials must be positive");
            require(threads >= 0, "config: harness.threads must be non-negative");
            require(grid_factor >= 2, "config: covfit.grid_factor must be at least 2");
            require(w_sec_beams > 0.0, "config: selection.w_sec_beams must be positive");
            require(edge_offsets >= 1, "config: edge.offsets must be positive");
            for (int k : budget_k)
                require(k >= 2, "config: budget.k_per_source entries must be at least 2");
            for (int k : kf_values)
                require(k >= 2, "config: kf.values entries must be at least 2");
            require(!pipelines.empty(), "config: harness.pipelines is empty");
        }
    };

    namespace detail
    {
        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return "";
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        inline std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, sep))
                out.push_back(trim(item));
            return out;
        }

        inline double to_double(const std::string &key, const std::string &v)
        {
            try
            {
                std::size_t pos = 0;
                const double x = std::stod(v, &pos);
                if (pos == v.size())
                    return x;
            }
            catch (const std::exception &)
            {
            }
            throw Error(Errc::invalid_argument, "config: " + key + " expects a number, got '" + v + "'");
        }

        inline long long to_int(const std::string &key, const std::string &v)
        {
            try
            {
                std::size_t pos = 0;
                const long long x = std::stoll(v, &pos);
                if (pos == v.size())
                    return x;
            }
            catch (const std::exception &)
            {
            }
            throw Error(Errc::invalid_argument, "config: " + key + " expects an integer, got '" + v + "'");
        }

        inline std::vector<double> to_grid(const std::string &key, const std::string &v)
        {
            if (v.find(':') != std::string::npos)
            {
                const auto p = split(v, ':');
                require(p.size() == 3, "config: " + key + " range must read start:step:stop");
                const double a = to_double(key, p[0]), st = to_double(key, p[1]), b = to_double(key, p[2]);
                require(st > 0.0 && b >= a, "config: " + key + " range needs a positive step and stop >= start");
                std::vector<double> out;
                const auto n = static_cast<long long>(std::floor((b - a) / st + 1e-9));
                for (long long i = 0; i <= n; ++i)
                    out.push_back(a + static_cast<double>(i) * st);
                return out;
            }
            std::vector<double> out;
            for (const auto &s : split(v, ','))
                out.push_back(to_double(key, s));
            return out;
        }

        inline std::vector<int> to_int_list(const std::string &key, const std::string &v)
        {
            std::vector<int> out;
            for (const auto &s : split(v, ','))
                out.push_back(static_cast<int>(to_int(key, s)));
            return out;
        }

        inline SolveMode to_mode(const std::string &key, const std::string &v)
        {
            if (v == "ls")
                return SolveMode::ls;
            if (v == "tls")
                return SolveMode::tls;
            throw Error(Errc::invalid_argument, "config: " + key + " must be ls or tls");
        }

        inline bool to_bool(const std::string &key, const std::string &v)
        {
            if (v == "true" || v == "1" || v == "on")
                return true;
            if (v == "false" || v == "0" || v == "off")
                return false;
            throw Error(Errc::invalid_argument, "config: " + key + " expects true or false");
        }

        inline std::string fmt(double x)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            return buf;
        }

        template <typename T>
        std::string join(const std::vector<T> &v)
        {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                if (i)
                    s += ",";
                if constexpr (std::is_floating_point_v<T>)
                    s += fmt(v[i]);
                else
                    s += std::to_string(v[i]);
            }
            return s;
        }
    } // namespace detail

    inline Experiment parse_experiment(const std::string &v)
    {
        for (auto e : {Experiment::asnr, Experiment::budget, Experiment::edge, Experiment::kf})
            if (v == experiment_name(e))
                return e;
        throw Error(Errc::invalid_argument, "config: unknown experiment '" + v + "'");
    }

    inline std::vector<PipelineId> parse_pipelines(const std::string &v)
    {
        if (v == "all")
            return {std::begin(kAllPipelines), std::end(kAllPipelines)};
        std::vector<PipelineId> out;
        for (const auto &s : detail::split(v, ','))
        {
            bool found = false;
            for (auto p : kAllPipelines)
                if (s == pipeline_name(p))
                {
                    out.push_back(p);
                    found = true;
                }
            if (!found)
                throw Error(Errc::invalid_argument, "config: unknown pipeline '" + s + "'");
        }
        return out;
    }

    // Apply one key/value pair. Unknown keys are rejected.
    inline void set_option(Config &c, const std::string &key, const std::string &v)
    {
        using namespace detail;
        if (key == "scenario.M")
            c.M = static_cast<int>(to_int(key, v));
        else if (key == "scenario.mu")
            c.mu = to_grid(key, v);
        else if (key == "scenario.powers")
            c.powers = to_grid(key, v);
        else if (key == "scenario.n_snap")
            c.n_snap = static_cast<int>(to_int(key, v));
        else if (key == "scenario.n0")
            c.n0 = to_double(key, v);
        else if (key == "scenario.asnr_db")
            c.asnr_db = to_double(key, v);
        else if (key == "scenario.seed")
            c.seed = static_cast<std::uint64_t>(to_int(key, v));
        else if (key == "coarse.n_rf")
            c.n_rf = static_cast<int>(to_int(key, v));
        else if (key == "coarse.mode")
            c.coarse_mode = to_mode(key, v);
        else if (key == "coarse.baseline_mask")
        {
            if (v == "centro")
                c.baseline_mask = MaskKind::centro;
            else if (v == "noncentro")
                c.baseline_mask = MaskKind::noncentro;
            else
                throw Error(Errc::invalid_argument, "config: coarse.baseline_mask must be centro or noncentro");
        }
        else if (key == "fine.k_per_source")
            c.k_per_source = static_cast<int>(to_int(key, v));
        else if (key == "fine.mode")
            c.fine_mode = to_mode(key, v);
        else if (key == "fine.eigen_map")
        {
            if (v == "auto")
                c.eigen_map.reset();
            else if (v == "literal_angle")
                c.eigen_map = EigenMap::literal_angle;
            else if (v == "half_angle_tangent")
                c.eigen_map = EigenMap::half_angle_tangent;
            else
                throw Error(Errc::invalid_argument, "config: fine.eigen_map must be auto, literal_angle or half_angle_tangent");
        }
        else if (key == "selection.w_sec_beams")
            c.w_sec_beams = to_double(key, v);
        else if (key == "selection.gamma")
            c.selection.gamma = to_double(key, v);
        else if (key == "selection.alpha")
            c.selection.alpha = to_double(key, v);
        else if (key == "selection.prune_q")
            c.selection.prune_q = static_cast<int>(to_int(key, v));
        else if (key == "selection.oracle_rule")
        {
            if (v == "closest_supports")
                c.oracle_rule = OracleRule::closest_supports;
            else if (v == "nearest_beam")
                c.oracle_rule = OracleRule::nearest_beam;
            else
                throw Error(Errc::invalid_argument, "config: selection.oracle_rule must be closest_supports or nearest_beam");
        }
        else if (key == "covfit.nnls_ridge")
            c.nnls_ridge = to_double(key, v);
        else if (key == "covfit.toeplitz_ridge")
            c.toeplitz.ridge = to_double(key, v);
        else if (key == "covfit.grid_factor")
            c.grid_factor = static_cast<int>(to_int(key, v));
        else if (key == "covfit.spectrum")
        {
            if (v == "bartlett")
                c.toeplitz.spectrum = SpectrumModel::bartlett;
            else if (v == "dirichlet")
                c.toeplitz.spectrum = SpectrumModel::dirichlet;
            else
                throw Error(Errc::invalid_argument, "config: covfit.spectrum must be bartlett or dirichlet");
        }
        else if (key == "metrics.k_thr")
            c.k_thr = to_double(key, v);
        else if (key == "harness.experiment")
            c.experiment = parse_experiment(v);
        else if (key == "harness.pipelines")
            c.pipelines = parse_pipelines(v);
        else if (key == "harness.asnr_grid")
            c.asnr_grid = to_grid(key, v);
        else if (key == "harness.trials")
            c.trials = static_cast<int>(to_int(key, v));
        else if (key == "harness.threads")
            c.threads = static_cast<int>(to_int(key, v));
        else if (key == "harness.timing")
        {
            if (v == "auto")
                c.timing = Timing::automatic;
            else
                c.timing = to_bool(key, v) ? Timing::on : Timing::off;
        }
        else if (key == "harness.out")
            c.out_dir = v;
        else if (key == "harness.full_scale")
            c.full_scale = to_bool(key, v);
        else if (key == "budget.asnr")
            c.budget_asnr = to_grid(key, v);
        else if (key == "budget.k_per_source")
            c.budget_k = to_int_list(key, v);
        else if (key == "edge.asnr")
            c.edge_asnr = to_grid(key, v);
        else if (key == "edge.offsets")
            c.edge_offsets = static_cast<int>(to_int(key, v));
        else if (key == "edge.mu_fixed")
            c.edge_mu_fixed = to_double(key, v);
        else if (key == "edge.mu_near")
            c.edge_mu_near = to_double(key, v);
        else if (key == "edge.powers")
            c.edge_powers = to_grid(key, v);
        else if (key == "kf.values")
            c.kf_values = to_int_list(key, v);
        else
            throw Error(Errc::invalid_argument, "config: unknown key '" + key + "'");
    }

    inline Config parse_config(std::istream &in)
    {
        Config c;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = detail::trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw Error(Errc::invalid_argument, "config: line " + std::to_string(lineno) + " lacks '='");
            set_option(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        }
        c.validate();
        return c;
    }

    inline Config load_config(const std::string &path)
    {
        std::ifstream f(path);
        if (!f)
            throw Error(Errc::invalid_argument, "config: cannot open '" + path + "'");
        return parse_config(f);
    }

    // Every effective option in a fixed order; the hash of this text identifies a run.
    // Output location, thread count and timing switches do not change results and are left out.
    inline std::string canonical_config(const Config &c)
    {
        using detail::fmt;
        using detail::join;
        std::ostringstream o;
        std::vector<std::string> pl;
        for (auto p : c.pipelines)
            pl.push_back(pipeline_name(p));
        std::string pls;
        for (std::size_t i = 0; i < pl.size(); ++i)
            pls += (i ? "," : "") + pl[i];
        o << "scenario.M=" << c.M << "\n"
          << "scenario.mu=" << join(c.mu) << "\n"
          << "scenario.powers=" << join(c.powers) << "\n"
          << "scenario.n_snap=" << c.n_snap << "\n"
          << "scenario.n0=" << (c.n0 ? fmt(*c.n0) : "") << "\n"
          << "scenario.asnr_db=" << (c.asnr_db ? fmt(*c.asnr_db) : "") << "\n"
          << "scenario.seed=" << c.seed << "\n"
          << "coarse.n_rf=" << c.n_rf << "\n"
          << "coarse.mode=" << (c.coarse_mode == SolveMode::ls ? "ls" : "tls") << "\n"
          << "coarse.baseline_mask=" << (c.baseline_mask == MaskKind::centro ? "centro" : "noncentro") << "\n"
          << "fine.k_per_source=" << c.k_per_source << "\n"
          << "fine.mode=" << (c.fine_mode == SolveMode::ls ? "ls" : "tls") << "\n"
          << "fine.eigen_map=" << (c.eigen_map ? eigen_map_name(*c.eigen_map) : "auto") << "\n"
          << "selection.w_sec_beams=" << fmt(c.w_sec_beams) << "\n"
          << "selection.gamma=" << fmt(c.selection.gamma) << "\n"
          << "selection.alpha=" << fmt(c.selection.alpha) << "\n"
          << "selection.prune_q=" << c.selection.prune_q << "\n"
          << "selection.oracle_rule=" << (c.oracle_rule == OracleRule::closest_supports ? "closest_supports" : "nearest_beam") << "\n"
          << "covfit.nnls_ridge=" << fmt(c.nnls_ridge) << "\n"
          << "covfit.toeplitz_ridge=" << fmt(c.toeplitz.ridge) << "\n"
          << "covfit.grid_factor=" << c.grid_factor << "\n"
          << "covfit.spectrum=" << (c.toeplitz.spectrum == SpectrumModel::bartlett ? "bartlett" : "dirichlet") << "\n"
          << "metrics.k_thr=" << fmt(c.k_thr) << "\n"
          << "harness.experiment=" << experiment_name(c.experiment) << "\n"
          << "harness.pipelines=" << pls << "\n"
          << "harness.asnr_grid=" << join(c.asnr_grid) << "\n"
          << "harness.trials=" << c.trials << "\n"
          << "budget.asnr=" << join(c.budget_asnr) << "\n"
          << "budget.k_per_source=" << join(c.budget_k) << "\n"
          << "edge.asnr=" << join(c.edge_asnr) << "\n"
          << "edge.offsets=" << c.edge_offsets << "\n"
          << "edge.mu_fixed=" << fmt(c.edge_mu_fixed) << "\n"
          << "edge.mu_near=" << fmt(c.edge_mu_near) << "\n"
          << "edge.powers=" << join(c.edge_powers) << "\n"
          << "kf.values=" << join(c.kf_values) << "\n";
        return o.str();
    }

    inline std::uint64_t fnv1a64(const std::string &s)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : s)
        {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    inline std::string config_hash(const Config &c)
    {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(c))));
        return buf;
    }

} // namespace bsdoa::harness
