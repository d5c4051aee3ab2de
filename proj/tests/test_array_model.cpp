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


#include "test_support.hpp"

using namespace bsdoa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("steering vector entries and norm", "[array_model]")
{
    const CVector a0 = steering_vector(0.0, 4);
    CHECK((a0 - CVector::Ones(4)).norm() < 1e-15);

    const CVector api = steering_vector(kPi, 2);
    CHECK(std::abs(api(0) - cplx(1, 0)) < 1e-15);
    CHECK(std::abs(api(1) - cplx(-1, 0)) < 1e-15);

    const CVector a = steering_vector(0.5, 32);
    CHECK_THAT(a.squaredNorm(), WithinRel(32.0, 1e-14));
    CHECK(std::abs(a(1) / a(0) - std::polar(1.0, 0.5)) < 1e-15);

    auto eng = test::engine(1);
    for (int i = 0; i < 50; ++i)
    {
        const int M = 1 + static_cast<int>(eng() % 64);
        CHECK_THAT(steering_vector(test::uniform(-kPi, kPi, eng), M).squaredNorm(), WithinRel(double(M), 1e-12));
    }
}

TEST_CASE("manifold columns, rank and duplicates", "[array_model]")
{
    const CMatrix A1 = manifold({0.0}, 3);
    CHECK((A1 - CMatrix::Ones(3, 1)).norm() < 1e-15);

    const CMatrix A2 = manifold({0.0, kPi}, 2);
    CMatrix expect(2, 2);
    expect << 1, 1, 1, -1;
    CHECK((A2 - expect).norm() < 1e-15);

    const CMatrix A3 = manifold({-2.1, 0.5, 2.5}, 32);
    const RVector s = Eigen::JacobiSVD<CMatrix>(A3).singularValues();
    CHECK(s(2) > 1.0);
    CHECK(std::isfinite(s(0) / s(2)));

    CHECK_THROWS_AS(manifold({0.3, 0.3}, 8), Error);
}

TEST_CASE("ASNR and noise variance conversions", "[array_model]")
{
    CHECK_THAT(asnr_to_n0(0.0, {0.95, 0.5, 0.1}), WithinRel(1.55, 1e-14));
    CHECK_THAT(asnr_to_n0(10.0, {1.0}), WithinRel(0.1, 1e-14));
    const double asnr = 10.0 * std::log10(1.55 / 0.31);
    CHECK_THAT(asnr_to_n0(asnr, {0.95, 0.5, 0.1}), WithinRel(0.31, 1e-13));
    CHECK_THAT(n0_to_asnr(0.31, {0.95, 0.5, 0.1}), WithinRel(asnr, 1e-13));
    CHECK_THROWS_AS(asnr_to_n0(3.0, {}), Error);
}

TEST_CASE("scenario validation", "[array_model]")
{
    Scenario sc = test::three_source_scenario(0.1);
    CHECK_NOTHROW(sc.validate());
    sc.powers[1] = 0.0;
    CHECK_THROWS_AS(sc.validate(), Error);
    sc = test::three_source_scenario(-1.0);
    CHECK_THROWS_AS(sc.validate(), Error);
    sc = test::three_source_scenario(0.1);
    sc.M = 2;
    CHECK_THROWS_AS(sc.validate(), Error);
}

TEST_CASE("noiseless single source gives rank-one snapshots", "[array_model]")
{
    Scenario sc;
    sc.M = 8;
    sc.mu = {0.0};
    sc.powers = {1.0};
    sc.n0 = 0.0;
    sc.n_snap = 20;
    const auto snap = generate_snapshots(sc, RngKey{3, 0, 0});
    for (Eigen::Index c = 0; c < snap.Y.data.cols(); ++c)
    {
        const CVector col = snap.Y.data.col(c);
        CHECK((col - CVector::Constant(8, col(0))).norm() < 1e-14);
    }
    CHECK(snap.Y.kind == ChannelKind::element);
    CHECK(snap.Y.snapshots() == 20);
}

TEST_CASE("snapshots decompose as A S + N and are reproducible", "[array_model]")
{
    const Scenario sc = test::three_source_scenario(0.4);
    const auto a = generate_snapshots(sc, RngKey{11, 2, 5});
    const auto b = generate_snapshots(sc, RngKey{11, 2, 5});
    const auto c = generate_snapshots(sc, RngKey{11, 2, 6});
    CHECK(a.Y.data == b.Y.data);
    CHECK(a.Y.data != c.Y.data);
    CHECK((a.Y.data - (manifold(sc.mu, sc.M) * a.S + a.N)).norm() < 1e-12);
}

TEST_CASE("theoretical covariance structure", "[array_model]")
{
    Scenario one;
    one.M = 6;
    one.mu = {0.0};
    one.powers = {1.0};
    one.n0 = 0.0;
    CHECK((theoretical_covariance(one) - CMatrix::Ones(6, 6)).norm() < 1e-14);

    one.powers = {1e-300};
    one.n0 = 0.7;
    CHECK((theoretical_covariance(one) - 0.7 * CMatrix::Identity(6, 6)).norm() < 1e-14);

    const Scenario sc = test::three_source_scenario(0.3);
    const CMatrix R = theoretical_covariance(sc);
    CHECK((R - R.adjoint()).norm() < 1e-14);
    const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(R).eigenvalues();
    for (int i = 0; i < sc.M - sc.d(); ++i)
        CHECK_THAT(ev(i), WithinAbs(0.3, 1e-10));
    CHECK(ev(0) >= 0.3 - 1e-12);
}

TEST_CASE("sample covariance converges to the model", "[array_model]")
{
    Scenario sc = test::three_source_scenario(asnr_to_n0(0.0, {0.95, 0.5, 0.1}));
    sc.n_snap = 100000;
    const auto snap = generate_snapshots(sc, RngKey{5, 0, 0});
    const CMatrix R = theoretical_covariance(sc);
    const double rel = (sample_covariance(snap.Y.data) - R).norm() / R.norm();
    CHECK(rel < 0.05);
}
