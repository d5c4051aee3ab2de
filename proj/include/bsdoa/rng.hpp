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

#include "bsdoa/core.hpp"

#include <cstdint>
#include <random>

namespace bsdoa
{
    // Independent random streams drawn for one trial.
    enum class Stream : std::uint64_t
    {
        signal = 0x5167,
        noise = 0x6e01,
        test = 0x7e57,
    };

    // Position of a trial in an experiment. Every (seed, cell, trial, stream) tuple maps to
    // its own engine, so the draw sequence never depends on thread scheduling.
    struct RngKey
    {
        std::uint64_t seed = 0;
        std::uint64_t cell = 0;
        std::uint64_t trial = 0;
    };

    inline constexpr std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    inline std::mt19937_64 make_engine(const RngKey &key, Stream stream)
    {
        std::uint64_t h = splitmix64(key.seed);
        h = splitmix64(h ^ key.cell);
        h = splitmix64(h ^ key.trial);
        h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
        return std::mt19937_64(h);
    }

    // i.i.d. CN(0, variance) entries, filled column-major.
    inline CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, double variance, std::mt19937_64 &eng)
    {
        CMatrix out(rows, cols);
        std::normal_distribution<double> nd(0.0, 1.0);
        const double scale = std::sqrt(variance / 2.0);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r)
            {
                const double re = nd(eng);
                const double im = nd(eng);
                out(r, c) = cplx(scale * re, scale * im);
            }
        return out;
    }

} // namespace bsdoa
