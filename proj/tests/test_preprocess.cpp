/*
 *  Copyright 2026 The cordpipe Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#include <gtest/gtest.h>

#include <random>

#include "cordpipe/preprocess.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cordpipe;
using namespace cordpipe::preprocess;

namespace {

ScalarVolume bimodal(std::mt19937_64& rng, const Dims& d) {
    std::uniform_real_distribution<double> lo_mean(0.0, 40.0), gap(20.0, 80.0), sd(0.5, 6.0), frac(0.1, 0.9);
    const double m0 = lo_mean(rng), m1 = m0 + gap(rng), s0 = sd(rng), s1 = sd(rng), f = frac(rng);
    std::normal_distribution<double> a(m0, s0), b(m1, s1);
    std::bernoulli_distribution pick(f);
    std::vector<double> v(d.voxels());
    for (auto& x : v) x = pick(rng) ? b(rng) : a(rng);
    return ScalarVolume(d, {}, std::move(v));
}

ScalarVolume from_values(const Dims& d, std::vector<double> v) { return ScalarVolume(d, {}, std::move(v)); }

}  // namespace

TEST(Otsu, MatchesExhaustiveOracleOnBimodalVolumes) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const auto v = bimodal(rng, {12, 10, 6});
        const auto r = otsu_mask(v);
        const std::vector<double> vals(v.values().begin(), v.values().end());
        ASSERT_EQ(r.threshold_bin, oracle::otsu_bin_index(vals)) << "trial " << trial;
        for (std::size_t i = 0; i < v.size(); ++i)
            ASSERT_EQ(r.mask[i], otsu_bin(v[i], r.min_value, r.max_value) > r.threshold_bin ? 1 : 0);
    }
}

TEST(Otsu, TwoLevelSplitsBetweenModes) {
    std::vector<double> v(64);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i < 32 ? 0.0 : 100.0;
    const auto r = otsu_mask(from_values({4, 4, 4}, v));
    EXPECT_GT(r.threshold, 0.0);
    EXPECT_LT(r.threshold, 100.0);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(r.mask[i], i < 32 ? 0 : 1);
}

TEST(Otsu, ThreeLevelDominantZero) {
    std::vector<double> v(100, 0.0);
    for (std::size_t i = 80; i < 90; ++i) v[i] = 50.0;
    for (std::size_t i = 90; i < 100; ++i) v[i] = 100.0;
    const auto r = otsu_mask(from_values({10, 10, 1}, v));
    EXPECT_LT(r.threshold, 50.0);
    EXPECT_EQ(r.threshold_bin, oracle::otsu_bin_index(v));
}

TEST(Otsu, ConstantVolumeIsDegenerate) {
    EXPECT_THROW(otsu_mask(new_scalar_volume({3, 3, 3}, {}, 4.0)), DegenerateError);
}

TEST(Otsu, InvariantUnderIncreasingAffineMaps) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const auto v = bimodal(rng, {8, 8, 4});
        const double a = std::uniform_real_distribution<double>(0.01, 50.0)(rng);
        const double b = std::uniform_real_distribution<double>(-100.0, 100.0)(rng);
        std::vector<double> w(v.values().begin(), v.values().end());
        for (auto& x : w) x = a * x + b;
        const auto r0 = otsu_mask(v), r1 = otsu_mask(from_values(v.dims(), w));
        EXPECT_EQ(r0.mask, r1.mask) << "trial " << trial;
        EXPECT_NEAR(r1.threshold, a * r0.threshold + b, 1e-9 * (std::abs(a * r0.threshold) + std::abs(b) + 1.0));
    }
}

TEST(ApplyMask, IdentityConstantAndIdempotent) {
    std::mt19937_64 rng(23);
    const auto v = bimodal(rng, {5, 5, 2});
    const MaskVolume ones(v.dims(), {}, 1), zeros(v.dims(), {}, 0);
    EXPECT_EQ(apply_mask(v, ones).values()[3], v.values()[3]);
    const auto z = apply_mask(v, zeros, 0.0);
    for (double x : z.values()) EXPECT_EQ(x, 0.0);
    const auto m = otsu_mask(v).mask;
    const auto once = apply_mask(v, m, -1.0);
    EXPECT_EQ(apply_mask(once, m, -1.0), once);
    EXPECT_THROW(apply_mask(v, MaskVolume({5, 5, 1}, {}, 1)), DimensionError);
}

TEST(ApplyMask, PhaseMaskedByMagnitudeMask) {
    std::mt19937_64 rng(24);
    const auto mag = bimodal(rng, {6, 6, 3});
    const auto phase = bimodal(rng, {6, 6, 3});
    const auto m = otsu_mask(mag).mask;
    const auto out = apply_mask(phase, m, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], m[i] ? phase[i] : 0.0);
}

TEST(Clahe, ConstantSliceStaysConstant) {
    const auto v = new_scalar_volume({20, 13, 2}, {}, 0.37);
    const auto out = clahe_slicewise(v, {3, 4, 0.01, 256});
    for (double x : out.values()) EXPECT_EQ(x, out.values()[0]);
}

TEST(Clahe, SingleTileUnclippedEqualsGlobalHE) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> vals(17 * 11 * 2);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& x : vals) x = u(rng) * u(rng);
        const ScalarVolume v({17, 11, 2}, {}, vals);
        const auto out = clahe_slicewise(v, {1, 1, 1.0, 64});
        for (std::size_t z = 0; z < 2; ++z) {
            const auto s = v.slice_values(z);
            const auto ref = oracle::global_he(std::vector<double>(s.begin(), s.end()), 64);
            const auto got = out.slice_values(z);
            for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(got[i], ref[i], 1e-12);
        }
    }
}

TEST(Clahe, OutputInUnitRangeAndClipRespected) {
    std::mt19937_64 rng(26);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Dims d{std::size_t(8 + rng() % 30), std::size_t(8 + rng() % 30), 2};
        std::vector<double> vals(d.voxels());
        const double skew = 1.0 + 5.0 * u(rng);
        for (auto& x : vals) x = std::pow(u(rng), skew);
        const ScalarVolume v(d, {}, vals);
        const ClaheConfig cfg{1 + rng() % 4, 1 + rng() % 4, 0.005 + 0.1 * u(rng), 32 + rng() % 200};
        const auto out = clahe_slicewise(v, cfg);
        for (double x : out.values()) {
            ASSERT_GE(x, 0.0);
            ASSERT_LE(x, 1.0);
        }
        // Clip contract on one tile's histogram.
        const std::size_t n = 50 + rng() % 200;
        std::vector<double> tile(n);
        for (auto& x : tile) x = std::pow(u(rng), skew);
        const auto h = clahe_clipped_histogram(tile, cfg.clip_limit, cfg.bins);
        const double cap = std::ceil(clahe_bin_cap(cfg.clip_limit, cfg.bins) * double(n)) + 1.0;
        double total = 0.0;
        for (double f : h) {
            EXPECT_LE(f * double(n), cap + 1e-9);
            total += f;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Clahe, ConfigErrors) {
    const auto v = new_scalar_volume({4, 4, 1}, {}, 0.5);
    EXPECT_THROW(clahe_slicewise(v, {5, 1, 0.01, 256}), ConfigError);
    EXPECT_THROW(clahe_slicewise(v, {0, 1, 0.01, 256}), ConfigError);
    EXPECT_THROW(clahe_slicewise(v, {1, 1, 0.0, 256}), ConfigError);
    EXPECT_THROW(clahe_slicewise(v, {1, 1, 0.5, 1}), ConfigError);
    EXPECT_THROW(clahe_slicewise(new_scalar_volume({4, 4, 1}, {}, 1.5), {1, 1, 0.01, 256}), ValueError);
}

TEST(Clahe, ParallelMatchesSerial) {
    std::mt19937_64 rng(27);
    std::vector<double> vals(32 * 32 * 6);
    for (auto& x : vals) x = std::uniform_real_distribution<double>(0, 1)(rng);
    const ScalarVolume v({32, 32, 6}, {}, vals);
    ::setenv("CORDPIPE_THREADS", "1", 1);
    const auto serial = clahe_slicewise(v);
    ::setenv("CORDPIPE_THREADS", "4", 1);
    const auto parallel = clahe_slicewise(v);
    ::unsetenv("CORDPIPE_THREADS");
    EXPECT_EQ(serial, parallel);
}

TEST(Stretch, UniformFixture) {
    // 0, 0.5, ..., 100: the 15th/70th percentiles land on samples 15 and 70, and 42.5 is a sample.
    std::vector<double> vals(201);
    for (int i = 0; i <= 200; ++i) vals[i] = 0.5 * i;
    const auto f = percentile_stretch_detail(from_values({201, 1, 1}, vals));
    EXPECT_NEAR(f.q_low, 15.0, 1e-12);
    EXPECT_NEAR(f.q_high, 70.0, 1e-12);
    EXPECT_NEAR(f.volume[30], 0.0, 1e-12);
    EXPECT_NEAR(f.volume[140], 1.0, 1e-12);
    EXPECT_NEAR(f.volume[85], 0.5, 1e-12);
    EXPECT_EQ(f.volume[3], 0.0);
    EXPECT_EQ(f.volume[199], 1.0);
}

TEST(Stretch, PercentileMatchesOracle) {
    std::mt19937_64 rng(28);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(1 + rng() % 300);
        for (auto& x : v) x = std::normal_distribution<double>(0, 10)(rng);
        const double p = std::uniform_real_distribution<double>(0, 100)(rng);
        EXPECT_NEAR(percentile(v, p), oracle::percentile(v, p), 1e-12);
    }
}

TEST(Stretch, MonotoneAndMaskScoped) {
    std::mt19937_64 rng(29);
    std::vector<double> v(200);
    for (auto& x : v) x = std::uniform_real_distribution<double>(-3, 9)(rng);
    const auto vol = from_values({20, 10, 1}, v);
    const auto out = percentile_stretch(vol);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[i] <= v[j]) ASSERT_LE(out[i], out[j]);
    MaskVolume m(vol.dims(), {}, 0);
    std::vector<double> inside;
    for (std::size_t i = 0; i < v.size(); i += 2) m[i] = 1, inside.push_back(v[i]);
    const auto r = percentile_stretch_detail(vol, {}, &m);
    EXPECT_NEAR(r.q_low, oracle::percentile(inside, 15), 1e-12);
    EXPECT_NEAR(r.q_high, oracle::percentile(inside, 70), 1e-12);
    EXPECT_THROW(percentile_stretch(new_scalar_volume({3, 3, 3}, {}, 2.0)), DegenerateError);
    EXPECT_THROW((StretchConfig{70, 15}.validate()), ConfigError);
}

TEST(ZScore, HandComputedAndIdempotent) {
    const auto z = zscore_normalize(from_values({2, 1, 1}, {0.0, 2.0}));
    EXPECT_DOUBLE_EQ(z[0], -1.0);
    EXPECT_DOUBLE_EQ(z[1], 1.0);
    std::mt19937_64 rng(30);
    std::vector<double> v(100);
    for (auto& x : v) x = std::uniform_real_distribution<double>(0, 5)(rng);
    const auto once = zscore_normalize(from_values({100, 1, 1}, v));
    const auto twice = zscore_normalize(once);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-12);
    EXPECT_THROW(zscore_normalize(new_scalar_volume({2, 2, 2}, {}, 1.0)), DegenerateError);
}
