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

#include "cordpipe/region_map.hpp"
#include "support.hpp"

using namespace cordpipe;
using namespace cordpipe::regions;

TEST(Regions, RoundTripRandomVolumes) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 500; ++t) {
        const auto lab = testing_support::random_labels(rng, testing_support::random_dims(rng, 12, 12, 6));
        ASSERT_EQ(merge_regions(to_regions(lab)), lab) << "trial " << t;
    }
}

TEST(Regions, MembershipPerClass) {
    LabelVolume lab({5, 1, 1}, {});
    for (std::uint8_t i = 0; i < 5; ++i) lab.set(i, 0, 0, static_cast<Label>(i));
    const auto s = to_regions(lab);
    const double wm[] = {0, 1, 0, 1, 0}, gm[] = {0, 0, 1, 0, 1}, les[] = {0, 0, 0, 1, 1};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(s.wm[i], wm[i]);
        EXPECT_EQ(s.gm[i], gm[i]);
        EXPECT_EQ(s.lesion[i], les[i]);
    }
}

TEST(Regions, PlaneRoundTrip) {
    Plane<std::uint8_t> p(6, 4);
    for (std::size_t i = 0; i < p.size(); ++i) p.values()[i] = static_cast<std::uint8_t>(i % 5);
    EXPECT_EQ(merge_regions(to_regions(p)), p);
    p.values()[0] = 7;
    EXPECT_THROW(to_regions(p), ValueError);
}

TEST(MergeVoxel, Examples) {
    EXPECT_EQ(merge_voxel(0.2, 0.3, 0.9), Label::background);
    EXPECT_EQ(merge_voxel(0.8, 0.1, 0.1), Label::healthy_wm);
    EXPECT_EQ(merge_voxel(0.1, 0.8, 0.1), Label::healthy_gm);
    EXPECT_EQ(merge_voxel(0.8, 0.1, 0.7), Label::lesion_wm);
    EXPECT_EQ(merge_voxel(0.3, 0.6, 0.5), Label::lesion_gm);
    EXPECT_EQ(merge_voxel(0.6, 0.6, 0.0), Label::healthy_gm);
    EXPECT_EQ(merge_voxel(0.6, 0.6, 0.6), Label::lesion_gm);
    EXPECT_EQ(merge_voxel(0.5, 0.0, 0.5), Label::lesion_wm);
    EXPECT_EQ(merge_voxel(0.4, 0.4, 1.0, {0.3, 0.9}), Label::lesion_gm);
}

TEST(MergeVoxel, LesionNeverWithoutTissue) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 10000; ++t) {
        const double w = u(rng), g = u(rng), l = u(rng);
        const Label out = merge_voxel(w, g, l);
        if (std::max(w, g) < 0.5) EXPECT_EQ(out, Label::background);
        if (out == Label::lesion_wm || out == Label::lesion_gm) EXPECT_GE(l, 0.5);
        // Raising the lesion probability can only turn a healthy voxel into its lesion class.
        const Label up = merge_voxel(w, g, std::min(1.0, l + 0.3));
        if (out == Label::healthy_wm) EXPECT_TRUE(up == Label::healthy_wm || up == Label::lesion_wm);
        if (out == Label::healthy_gm) EXPECT_TRUE(up == Label::healthy_gm || up == Label::lesion_gm);
        if (out == Label::lesion_wm || out == Label::lesion_gm) EXPECT_EQ(up, out);
    }
}

TEST(MergeRegions, Validation) {
    const Dims d{3, 3, 2};
    RegionStack s{ProbabilityVolume(d, {}, 0.0), ProbabilityVolume(d, {}, 0.0), ProbabilityVolume({3, 3, 1}, {}, 0.0)};
    EXPECT_THROW(merge_regions(s), DimensionError);
    s.lesion = ProbabilityVolume(d, {}, 0.0);
    s.wm[0] = 1.5;
    EXPECT_THROW(merge_regions(s), ValueError);
    s.wm[0] = 0.5;
    EXPECT_THROW(merge_regions(s, {0.0, 0.5}), ConfigError);
    EXPECT_NO_THROW(merge_regions(s));
}
