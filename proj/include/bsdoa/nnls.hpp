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

// Small dense solvers: Lawson-Hanson NNLS, least-distance programming, and strictly convex
// QPs with linear inequality constraints (reduced to least-distance form).

#include "bsdoa/core.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace bsdoa
{
    struct NnlsResult
    {
        RVector x;
        double residual = 0.0; // ||y - Cx||^2 + eps ||x||^2
        double kkt_gap = 0.0;  // scaled by max(1, ||2 C^T y||_inf)
        int iterations = 0;
    };

    // Largest KKT violation of min ||y - Cx||^2 + eps ||x||^2, x >= 0 at the point x.
    inline double nnls_kkt_gap(const RMatrix &C, const RVector &y, double eps, const RVector &x)
    {
        const RVector g = 2.0 * (C.transpose() * (C * x - y) + eps * x);
        double gap = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            gap = std::max(gap, x(i) > 0.0 ? std::abs(g(i)) : std::max(0.0, -g(i)));
        const double scale = std::max(1.0, (2.0 * C.transpose() * y).cwiseAbs().maxCoeff());
        return gap / scale;
    }

    // Lawson-Hanson active set on the ridge-augmented system [C; sqrt(eps) I] x ~ [y; 0].
    // Throws SolverError after 10 * n outer iterations.
    inline NnlsResult nnls_solve(const RMatrix &C, const RVector &y, double eps = 0.0)
    {
        require(C.rows() == y.size(), "nnls_solve: row count differs from right-hand side");
        require(C.size() > 0 && C.cwiseAbs().maxCoeff() > 0.0, "nnls_solve: design matrix is zero");
        require(eps >= 0.0, "nnls_solve: ridge must be non-negative");

        const Eigen::Index n = C.cols();
        RMatrix E(C.rows() + (eps > 0.0 ? n : 0), n);
        RVector f = RVector::Zero(E.rows());
        E.topRows(C.rows()) = C;
        f.head(C.rows()) = y;
        if (eps > 0.0)
            E.bottomRows(n) = std::sqrt(eps) * RMatrix::Identity(n, n);

        const double tol = 1e-13 * std::max(1.0, (E.transpose() * f).cwiseAbs().maxCoeff()) * static_cast<double>(std::max<Eigen::Index>(n, 1));
        std::vector<char> passive(static_cast<std::size_t>(n), 0);
        RVector x = RVector::Zero(n);
        RVector best = x;

        auto solve_passive = [&](RVector &z)
        {
            std::vector<Eigen::Index> idx;
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)])
                    idx.push_back(i);
            RMatrix Ep(E.rows(), static_cast<Eigen::Index>(idx.size()));
            for (std::size_t k = 0; k < idx.size(); ++k)
                Ep.col(static_cast<Eigen::Index>(k)) = E.col(idx[k]);
            const RVector zp = Ep.colPivHouseholderQr().solve(f);
            z.setZero(n);
            for (std::size_t k = 0; k < idx.size(); ++k)
                z(idx[k]) = zp(static_cast<Eigen::Index>(k));
        };

        const int cap = 10 * static_cast<int>(std::max<Eigen::Index>(n, 1));
        int outer = 0;
        while (true)
        {
            const RVector w = E.transpose() * (f - E * x);
            Eigen::Index j = -1;
            double wmax = tol;
            for (Eigen::Index i = 0; i < n; ++i)
                if (!passive[static_cast<std::size_t>(i)] && w(i) > wmax)
                {
                    wmax = w(i);
                    j = i;
                }
            if (j < 0)
                break;
            if (++outer > cap)
                throw SolverError("nnls_solve: iteration cap reached", best, nnls_kkt_gap(C, y, eps, best));
            passive[static_cast<std::size_t>(j)] = 1;

            RVector z;
            solve_passive(z);
            // A freshly added coordinate that cannot move positive means the gradient sign was
            // numerical noise; drop it and stop.
            if (z(j) <= 0.0)
            {
                passive[static_cast<std::size_t>(j)] = 0;
                break;
            }
            int inner = 0;
            while (true)
            {
                bool feasible = true;
                for (Eigen::Index i = 0; i < n; ++i)
                    if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0)
                        feasible = false;
                if (feasible)
                    break;
                if (++inner > cap)
                    throw SolverError("nnls_solve: inner iteration cap reached", best, nnls_kkt_gap(C, y, eps, best));
                double alpha = std::numeric_limits<double>::infinity();
                for (Eigen::Index i = 0; i < n; ++i)
                    if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0)
                        alpha = std::min(alpha, x(i) / (x(i) - z(i)));
                x += alpha * (z - x);
                for (Eigen::Index i = 0; i < n; ++i)
                    if (passive[static_cast<std::size_t>(i)] && x(i) <= tol * 1e-3)
                    {
                        passive[static_cast<std::size_t>(i)] = 0;
                        x(i) = 0.0;
                    }
                solve_passive(z);
            }
            x = z;
            best = x;
        }

        NnlsResult out;
        out.x = x.cwiseMax(0.0);
        out.residual = (y - C * out.x).squaredNorm() + eps * out.x.squaredNorm();
        out.kkt_gap = nnls_kkt_gap(C, y, eps, out.x);
        out.iterations = outer;
        return out;
    }

    // min ||u||^2 subject to G u >= h. Throws Error(singular) if the constraints are infeasible.
    inline RVector ldp_solve(const RMatrix &G, const RVector &h)
    {
        require(G.rows() == h.size(), "ldp_solve: constraint shapes differ");
        const Eigen::Index m = G.rows(), n = G.cols();
        if (m == 0 || (h.array() <= 0.0).all())
            return RVector::Zero(n);

        RMatrix E(n + 1, m);
        E.topRows(n) = G.transpose();
        E.row(n) = h.transpose();
        RVector f = RVector::Zero(n + 1);
        f(n) = 1.0;

        const NnlsResult nn = nnls_solve(E, f);
        const RVector r = E * nn.x - f;
        if (!(std::abs(r(n)) > 1e-14))
            throw Error(Errc::singular, "ldp_solve: inequality constraints are infeasible");
        return -r.head(n) / r(n);
    }

    struct QpResult
    {
        RVector x;
        double objective = 0.0;   // 0.5 x^T H x + q^T x
        double min_slack = 0.0;   // min(A x - b)
        bool unconstrained = false;
    };

    // min 0.5 x^T H x + q^T x subject to A x >= b, H symmetric positive definite.
    // The unconstrained minimiser is returned directly when it is feasible to within slack_tol.
    inline QpResult solve_inequality_qp(const RMatrix &H, const RVector &q, const RMatrix &A, const RVector &b,
                                        double slack_tol = 0.0)
    {
        require(H.rows() == H.cols() && H.rows() == q.size(), "solve_inequality_qp: Hessian shape mismatch");
        require(A.cols() == H.cols() && A.rows() == b.size(), "solve_inequality_qp: constraint shape mismatch");
        Eigen::LLT<RMatrix> llt(H);
        if (llt.info() != Eigen::Success)
            throw Error(Errc::singular, "solve_inequality_qp: Hessian is not positive definite");

        QpResult out;
        const RVector x0 = -llt.solve(q);
        const RVector slack0 = A * x0 - b;
        if (A.rows() == 0 || slack0.minCoeff() >= -slack_tol)
        {
            out.x = x0;
            out.unconstrained = true;
        }
        else
        {
            // With u = L^T (x - x0) the problem is min 0.5 ||u||^2 s.t. A L^-T u >= b - A x0.
            const RMatrix L = llt.matrixL();
            const RMatrix G = L.triangularView<Eigen::Lower>().solve(A.transpose()).transpose();
            const RVector u = ldp_solve(G, -slack0);
            out.x = x0 + L.transpose().triangularView<Eigen::Upper>().solve(u);
        }
        out.objective = 0.5 * out.x.dot(H * out.x) + q.dot(out.x);
        out.min_slack = A.rows() ? (A * out.x - b).minCoeff() : 0.0;
        return out;
    }

} // namespace bsdoa
