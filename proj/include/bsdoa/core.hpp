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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace bsdoa
{
    using cplx = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;

    inline constexpr double kPi = std::numbers::pi;

    enum class Errc
    {
        invalid_argument,
        rank_deficient,
        singular,
        not_converged,
        insufficient_pairs,
    };

    inline const char *errc_name(Errc c)
    {
        switch (c)
        {
        case Errc::invalid_argument:
            return "invalid_argument";
        case Errc::rank_deficient:
            return "rank_deficient";
        case Errc::singular:
            return "singular";
        case Errc::not_converged:
            return "not_converged";
        case Errc::insufficient_pairs:
            return "insufficient_pairs";
        }
        return "unknown";
    }

    class Error : public std::runtime_error
    {
    public:
        Error(Errc code, const std::string &what) : std::runtime_error(what), code_(code) {}
        Errc code() const noexcept { return code_; }

    private:
        Errc code_;
    };

    // Raised when an iterative solver hits its cap; carries the best iterate seen.
    class SolverError : public Error
    {
    public:
        SolverError(const std::string &what, RVector best, double gap)
            : Error(Errc::not_converged, what), best_(std::move(best)), gap_(gap) {}
        const RVector &best_iterate() const noexcept { return best_; }
        double gap() const noexcept { return gap_; }

    private:
        RVector best_;
        double gap_;
    };

    inline void require(bool ok, const std::string &msg)
    {
        if (!ok)
            throw Error(Errc::invalid_argument, msg);
    }

    // Reduce an angle to (-pi, pi].
    inline double wrap_angle(double x)
    {
        double y = std::remainder(x, 2.0 * kPi);
        if (y <= -kPi)
            y += 2.0 * kPi;
        return y;
    }

    inline CMatrix hermitian_part(const CMatrix &R)
    {
        return 0.5 * (R + R.adjoint());
    }

} // namespace bsdoa
