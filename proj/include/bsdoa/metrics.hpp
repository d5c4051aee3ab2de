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

// Estimate-to-truth matching, RMSE, stochastic CRB, failure statistics, principal angles, ECDF.

#include "bsdoa/array_model.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <numeric>
#include <utility>
#include <vector>

namespace bsdoa
{
    // perm[k] = index into mu_hat assigned to mu_true[k]; exhaustive over d! assignments.
    inline std::vector<int> match_estimates(const std::vector<double> &mu_hat, const std::vector<double> &mu_true)
    {
        require(mu_hat.size() == mu_true.size(), "match_estimates: length mismatch");
        require(mu_true.size() <= 8, "match_estimates: at most 8 sources supported");
        std::vector<int> perm(mu_true.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<int> best = perm;
        double best_cost = std::numeric_limits<double>::infinity();
        do
        {
            double c = 0.0;
            for (std::size_t k = 0; k < perm.size(); ++k)
            {
                const double e = wrap_angle(mu_hat[static_cast<std::size_t>(perm[k])] - mu_true[k]);
                c += e * e;
            }
            if (c < best_cost)
            {
                best_cost = c;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }

    // Wrapped errors mu_hat[perm[k]] - mu_true[k] after optimal matching.
    inline std::vector<double> matched_errors(const std::vector<double> &mu_hat, const std::vector<double> &mu_true)
    {
        const auto perm = match_estimates(mu_hat, mu_true);
        std::vector<double> e(mu_true.size());
        for (std::size_t k = 0; k < e.size(); ++k)
            e[k] = wrap_angle(mu_hat[static_cast<std::size_t>(perm[k])] - mu_true[k]);
        return e;
    }

    inline double sum_squares(const std::vector<double> &e)
    {
        double s = 0.0;
        for (double x : e)
            s += x * x;
        return s;
    }

    inline double max_abs(const std::vector<double> &e)
    {
        double m = 0.0;
        for (double x : e)
            m = std::max(m, std::abs(x));
        return m;
    }

    // sqrt of the mean over trials and sources of the squared error.
    inline double rmse(const std::vector<std::vector<double>> &errors)
    {
        require(!errors.empty(), "rmse: no trials");
        double acc = 0.0;
        for (const auto &e : errors)
        {
            require(!e.empty(), "rmse: empty trial");
            acc += sum_squares(e) / static_cast<double>(e.size());
        }
        return std::sqrt(acc / static_cast<double>(errors.size()));
    }

    struct CrbResult
    {
        double crb = 0.0; // (1/d) tr(J^-1)
        RMatrix fim;
    };

    // Unconditional Gaussian model, mu unknown, powers and noise variance known:
    //   J_ij = N tr(Q dR_i Q dR_j),  dR_i = p_i (d_i a_i^H + a_i d_i^H),  Q = R^-1,
    // which expands to 2 N p_i p_j Re[(d_i^H Q d_j)(a_j^H Q a_i) + (d_i^H Q a_j)(d_j^H Q a_i)].
    inline CrbResult stochastic_crb(const Scenario &sc)
    {
        sc.validate();
        require(sc.n0 > 0.0, "stochastic_crb: noise variance must be positive");
        const int d = sc.d(), M = sc.M;
        const CMatrix A = manifold(sc.mu, M);
        CMatrix D(M, d);
        for (int k = 0; k < d; ++k)
            for (int m = 0; m < M; ++m)
                D(m, k) = cplx(0.0, m) * A(m, k);

        const CMatrix Q = theoretical_covariance(sc).llt().solve(CMatrix::Identity(M, M));
        const CMatrix QA = Q * A, QD = Q * D;
        const CMatrix AQA = A.adjoint() * QA, DQD = D.adjoint() * QD, DQA = D.adjoint() * QA;

        RMatrix J(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
            {
                const double pi = sc.powers[static_cast<std::size_t>(i)], pj = sc.powers[static_cast<std::size_t>(j)];
                const cplx t = DQD(i, j) * AQA(j, i) + DQA(i, j) * DQA(j, i);
                J(i, j) = 2.0 * sc.n_snap * pi * pj * t.real();
            }

        const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(J, Eigen::EigenvaluesOnly).eigenvalues();
        if (!(ev(0) > 1e-12 * ev(d - 1)))
            throw Error(Errc::singular, "stochastic_crb: Fisher information is singular");
        CrbResult out;
        out.fim = J;
        out.crb = J.inverse().trace() / d;
        return out;
    }

    inline double gap_to_crb_db(double rmse_value, double crb)
    {
        require(rmse_value > 0.0 && crb > 0.0, "gap_to_crb_db: inputs must be positive");
        return 10.0 * std::log10(rmse_value / std::sqrt(crb));
    }

    struct FailureStats
    {
        double rate = 0.0, lo = 0.0, hi = 0.0;
        int failures = 0, trials = 0;
    };

    inline constexpr double kWilsonZ95 = 1.959964;

    inline std::pair<double, double> wilson_interval(int k, int n, double z = kWilsonZ95)
    {
        require(n > 0, "wilson_interval: no trials");
        const double p = static_cast<double>(k) / n, z2 = z * z;
        const double denom = 1.0 + z2 / n;
        const double centre = (p + z2 / (2.0 * n)) / denom;
        const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
        return {std::clamp(centre - half, 0.0, p), std::clamp(centre + half, p, 1.0)};
    }

    // Fraction of trials whose worst error exceeds k_thr sqrt(crb).
    inline FailureStats failure_stats(const std::vector<double> &max_errors, double crb, double k_thr = 3.0, double z = kWilsonZ95)
    {
        require(!max_errors.empty(), "failure_stats: no trials");
        require(k_thr > 0.0 && crb > 0.0, "failure_stats: threshold must be positive");
        const double thr = k_thr * std::sqrt(crb);
        FailureStats s;
        s.trials = static_cast<int>(max_errors.size());
        for (double e : max_errors)
            s.failures += e > thr ? 1 : 0;
        s.rate = static_cast<double>(s.failures) / s.trials;
        std::tie(s.lo, s.hi) = wilson_interval(s.failures, s.trials, z);
        return s;
    }

    struct PrincipalAngles
    {
        double smallest_deg = 0.0; // arccos(sigma_max)
        double largest_deg = 0.0;  // arccos(sigma_min)
    };

    // Angles between span A(mu_true) and span A(mu_hat) in element space.
    inline PrincipalAngles principal_angles_deg(const std::vector<double> &mu_true, const std::vector<double> &mu_hat, int M)
    {
        auto orth = [M](const std::vector<double> &mu)
        {
            const CMatrix A = manifold_unchecked(mu, M);
            Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinU);
            const RVector s = svd.singularValues();
            if (!(s(s.size() - 1) > 1e-10 * s(0)))
                throw Error(Errc::rank_deficient, "principal_angles: manifold lost rank");
            return CMatrix(svd.matrixU());
        };
        const CMatrix U1 = orth(mu_true), U2 = orth(mu_hat);
        const RVector s = Eigen::JacobiSVD<CMatrix>(U1.adjoint() * U2).singularValues();
        auto deg = [](double c) { return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / kPi; };
        return {deg(s(0)), deg(s(s.size() - 1))};
    }

    // Principal angle from the largest singular value of the cross-Gram.
    inline double lpa_degrees(const std::vector<double> &mu_true, const std::vector<double> &mu_hat, int M)
    {
        return principal_angles_deg(mu_true, mu_hat, M).smallest_deg;
    }

    struct EcdfPoint
    {
        double value;
        double fraction;
    };

    // Right-continuous step function; one point per distinct value.
    inline std::vector<EcdfPoint> ecdf(std::vector<double> values)
    {
        require(!values.empty(), "ecdf: no values");
        std::sort(values.begin(), values.end());
        std::vector<EcdfPoint> out;
        const double n = static_cast<double>(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            if (i + 1 == values.size() || values[i + 1] != values[i])
                out.push_back({values[i], static_cast<double>(i + 1) / n});
        return out;
    }

    // F(x) of a step ECDF.
    inline double ecdf_at(const std::vector<EcdfPoint> &F, double x)
    {
        auto it = std::upper_bound(F.begin(), F.end(), x, [](double v, const EcdfPoint &p) { return v < p.value; });
        return it == F.begin() ? 0.0 : std::prev(it)->fraction;
    }

    // F_a(x) >= F_b(x) at every support point of either ECDF.
    inline bool ecdf_dominates(const std::vector<EcdfPoint> &Fa, const std::vector<EcdfPoint> &Fb, double tol = 0.0)
    {
        for (const auto *F : {&Fa, &Fb})
            for (const auto &p : *F)
                if (ecdf_at(Fa, p.value) + tol < ecdf_at(Fb, p.value))
                    return false;
        return true;
    }

    inline double median(std::vector<double> v)
    {
        if (v.empty())
            return std::numeric_limits<double>::quiet_NaN();
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    inline double pearson(const std::vector<double> &x, const std::vector<double> &y)
    {
        require(x.size() == y.size() && x.size() >= 2, "pearson: need two equally long samples");
        const double n = static_cast<double>(x.size());
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        return sxy / std::sqrt(sxx * syy);
    }

} // namespace bsdoa
