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

// CSV and JSON emission for run results. CSV follows RFC 4180 quoting, '.' decimals and
// 9 significant digits; unavailable values are written as empty fields.

#include "bsdoa/harness/experiments.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bsdoa::harness
{
    inline std::string csv_number(double x)
    {
        if (!std::isfinite(x))
            return "";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.9g", x);
        return buf;
    }

    inline std::string csv_field(const std::string &s)
    {
        if (s.find_first_of(",\"\r\n") == std::string::npos)
            return s;
        std::string q = "\"";
        for (char ch : s)
        {
            if (ch == '"')
                q += '"';
            q += ch;
        }
        return q + "\"";
    }

    inline void csv_row(std::ostream &os, const std::vector<std::string> &fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i)
            os << (i ? "," : "") << csv_field(fields[i]);
        os << "\r\n";
    }

    inline const std::vector<std::string> &results_columns()
    {
        static const std::vector<std::string> cols{
            "experiment", "pipeline", "asnr_db", "kf", "offset_norm", "rmse_rad", "crb_sqrt_rad", "gap_db", "fail_rate", "fail_lo",
            "fail_hi", "lpa_p50_deg", "t_cov_ms", "t_sel_ms", "t_es_ms", "t_total_ms", "trials", "aborted", "config_hash",
            "artifact_version", "lpa_largest_p50_deg"};
        return cols;
    }

    inline void write_results_csv(std::ostream &os, const RunResult &res)
    {
        csv_row(os, results_columns());
        const bool timing = res.config.timing_enabled();
        auto t = [&](double ms) { return timing ? csv_number(ms) : std::string(); };
        for (const auto &r : res.reports)
        {
            const bool fail_ok = r.trials > 0 && r.crb > 0.0;
            csv_row(os, {experiment_name(r.cell.experiment), pipeline_name(r.pipeline), csv_number(r.cell.asnr_db),
                         std::to_string(r.cell.kf), r.cell.offset_norm ? csv_number(*r.cell.offset_norm) : "", csv_number(r.rmse),
                         csv_number(std::sqrt(r.crb)), csv_number(r.gap_db), fail_ok ? csv_number(r.fail.rate) : "",
                         fail_ok ? csv_number(r.fail.lo) : "", fail_ok ? csv_number(r.fail.hi) : "", csv_number(r.lpa_p50),
                         t(r.t_cov), t(r.t_sel), t(r.t_es), t(r.t_total), std::to_string(r.trials), std::to_string(r.aborted),
                         res.config_hash, kArtifactVersion, csv_number(r.lpa_largest_p50)});
        }
    }

    inline void write_ecdf_csv(std::ostream &os, const RunResult &res)
    {
        csv_row(os, {"experiment", "asnr_db", "kf", "offset_norm", "pipeline", "error", "fraction"});
        for (const auto &r : res.reports)
        {
            if (r.max_errors.empty())
                continue;
            for (const auto &p : ecdf(r.max_errors))
                csv_row(os, {experiment_name(r.cell.experiment), csv_number(r.cell.asnr_db), std::to_string(r.cell.kf),
                             r.cell.offset_norm ? csv_number(*r.cell.offset_norm) : "", pipeline_name(r.pipeline),
                             csv_number(p.value), csv_number(p.fraction)});
        }
    }

    // Runtime against accuracy per configuration (budget experiment).
    inline void write_pareto_csv(std::ostream &os, const RunResult &res)
    {
        csv_row(os, {"pipeline", "asnr_db", "n_rf_coarse", "n_rf_fine", "t_total_ms", "rmse_rad"});
        for (const auto &r : res.reports)
            csv_row(os, {pipeline_name(r.pipeline), csv_number(r.cell.asnr_db), std::to_string(res.config.n_rf),
                         std::to_string(r.cell.kf * r.cell.scenario.d()),
                         res.config.timing_enabled() ? csv_number(r.t_total) : "", csv_number(r.rmse)});
    }

    inline nlohmann::json json_number(double x)
    {
        return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
    }

    inline nlohmann::json summary_json(const RunResult &res)
    {
        using nlohmann::json;
        json j;
        j["artifact_version"] = kArtifactVersion;
        j["config_hash"] = res.config_hash;
        json cfg = json::object();
        std::istringstream canon(canonical_config(res.config));
        for (std::string line; std::getline(canon, line);)
        {
            const auto eq = line.find('=');
            cfg[line.substr(0, eq)] = line.substr(eq + 1);
        }
        j["config"] = cfg;
        j["seed"] = res.config.seed;
        j["trials_per_cell"] = res.config.trials;
        j["timing_enabled"] = res.config.timing_enabled();
        j["eigen_map"] = {{"chosen", eigen_map_name(res.calibration.chosen)},
                          {"source", res.calibration.from_config ? "config" : "noiseless_calibration"},
                          {"literal_angle_max_error", json_number(res.calibration.literal_max_error)},
                          {"half_angle_tangent_max_error", json_number(res.calibration.tangent_max_error)},
                          {"passed_1e-6", res.calibration.passed}};
        json cells = json::array();
        for (const auto &r : res.reports)
        {
            json c;
            c["experiment"] = experiment_name(r.cell.experiment);
            c["pipeline"] = pipeline_name(r.pipeline);
            c["asnr_db"] = r.cell.asnr_db;
            c["kf"] = r.cell.kf;
            c["offset_norm"] = r.cell.offset_norm ? json(*r.cell.offset_norm) : json(nullptr);
            c["mu_true"] = r.cell.scenario.mu;
            c["n0"] = r.cell.scenario.n0;
            c["rmse_rad"] = json_number(r.rmse);
            c["crb_sqrt_rad"] = json_number(std::sqrt(r.crb));
            c["gap_db"] = json_number(r.gap_db);
            c["fail_rate"] = json_number(r.trials ? r.fail.rate : NAN);
            c["fail_lo"] = json_number(r.trials ? r.fail.lo : NAN);
            c["fail_hi"] = json_number(r.trials ? r.fail.hi : NAN);
            c["lpa_p50_deg"] = json_number(r.lpa_p50);
            c["lpa_largest_p50_deg"] = json_number(r.lpa_largest_p50);
            if (res.config.timing_enabled())
                c["median_ms"] = {{"cov", r.t_cov}, {"sel", r.t_sel}, {"es", r.t_es}, {"total", r.t_total}};
            c["trials"] = r.trials;
            c["aborted"] = r.aborted;
            c["abort_causes"] = r.abort_causes;
            cells.push_back(c);
        }
        j["cells"] = cells;
        return j;
    }

    // Writes results.csv, ecdf.csv, summary.json (and pareto.csv for the budget experiment).
    inline void write_outputs(const std::filesystem::path &dir, const RunResult &res)
    {
        std::filesystem::create_directories(dir);
        auto open = [&](const char *name)
        {
            std::ofstream f(dir / name, std::ios::binary);
            if (!f)
                throw Error(Errc::invalid_argument, std::string("cannot write ") + (dir / name).string());
            return f;
        };
        {
            auto f = open("results.csv");
            write_results_csv(f, res);
        }
        {
            auto f = open("ecdf.csv");
            write_ecdf_csv(f, res);
        }
        if (res.config.experiment == Experiment::budget)
        {
            auto f = open("pareto.csv");
            write_pareto_csv(f, res);
        }
        {
            auto f = open("summary.json");
            f << summary_json(res).dump(2) << "\n";
        }
    }

} // namespace bsdoa::harness
