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

#include <filesystem>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "cordpipe/nifti.hpp"
#include "cordpipe/sparse_annotation.hpp"
#include "support.hpp"

using namespace cordpipe;
namespace fs = std::filesystem;

namespace {

std::vector<std::size_t> every_kth(std::size_t n, std::size_t count) {
    std::vector<std::size_t> z(count);
    for (std::size_t i = 0; i < count; ++i) z[i] = i * n / count;
    return z;
}

}  // namespace

TEST(SparseAnnotation, CorpusCountsAccepted) {
    std::mt19937_64 rng(1);
    const auto train = testing_support::random_labels(rng, {4, 3, 730});
    const auto a = sparse_from_dense(train, every_kth(730, 374), "train");
    EXPECT_NO_THROW(a.validate());
    EXPECT_EQ(a.slice_count(), 374u);
    const auto b = sparse_from_dense(train, every_kth(730, 54), "test");
    EXPECT_EQ(b.slice_count(), 54u);
}

TEST(SparseAnnotation, DensifyPlacesPlanesAndFlags) {
    std::mt19937_64 rng(2);
    const auto l = testing_support::random_labels(rng, {5, 4, 6});
    const auto a = sparse_from_dense(l, {1, 4}, "v");
    const auto d = densify(a);
    for (std::size_t z = 0; z < 6; ++z) {
        const bool ann = z == 1 || z == 4;
        EXPECT_EQ(d.annotated[z], ann ? 1 : 0);
        const auto p = axial_slice(d.labels.grid(), z);
        if (ann)
            EXPECT_EQ(p, axial_slice(l.grid(), z));
        else
            EXPECT_TRUE(std::all_of(p.values().begin(), p.values().end(), [](auto v) { return v == 0; }));
    }
}

TEST(SparseAnnotation, EmptyIndexListDensifiesToBackground) {
    const LabelVolume l({3, 3, 4}, {}, Label::healthy_wm);
    const auto a = sparse_from_dense(l, {}, "empty");
    EXPECT_NO_THROW(a.validate());
    const auto d = densify(a);
    EXPECT_EQ(d.labels.count(Label::background), 36u);
    SidecarRecord rec{"empty", {}, ""};
    EXPECT_TRUE(nlohmann::json::parse(format_sidecar(rec))["planes_nifti"].is_null());
    const auto parsed = read_sparse_annotation(format_sidecar(rec), {3, 3, 4}, nullptr);
    EXPECT_EQ(parsed.slice_count(), 0u);
}

TEST(SparseAnnotation, IndexErrors) {
    const LabelVolume l({3, 3, 4}, {});
    EXPECT_THROW(sparse_from_dense(l, {4}, "v"), IndexError);
    EXPECT_THROW(sparse_from_dense(l, {1, 1}, "v"), IndexError);
    const LabelVolume planes({3, 3, 2}, {});
    const std::string dup = R"({"volume_id":"v","z_indices":[2,2],"planes_nifti":"p.nii"})";
    EXPECT_THROW(read_sparse_annotation(dup, {3, 3, 4}, &planes), IndexError);
    const std::string out = R"({"volume_id":"v","z_indices":[0,4],"planes_nifti":"p.nii"})";
    EXPECT_THROW(read_sparse_annotation(out, {3, 3, 4}, &planes), IndexError);
    const std::string unordered = R"({"volume_id":"v","z_indices":[3,1],"planes_nifti":"p.nii"})";
    EXPECT_THROW(read_sparse_annotation(unordered, {3, 3, 4}, &planes), IndexError);
    const std::string neg = R"({"volume_id":"v","z_indices":[-1,1],"planes_nifti":"p.nii"})";
    EXPECT_THROW(read_sparse_annotation(neg, {3, 3, 4}, &planes), IndexError);
    const LabelVolume wrong({2, 3, 2}, {});
    const std::string ok = R"({"volume_id":"v","z_indices":[0,1],"planes_nifti":"p.nii"})";
    EXPECT_THROW(read_sparse_annotation(ok, {3, 3, 4}, &wrong), DimensionError);
}

TEST(SparseAnnotation, MalformedSidecar) {
    EXPECT_THROW(parse_sidecar("{not json"), FormatError);
    EXPECT_THROW(parse_sidecar(R"({"volume_id":1,"z_indices":[],"planes_nifti":null})"), FormatError);
    EXPECT_THROW(parse_sidecar(R"({"volume_id":"a","z_indices":"0"})"), FormatError);
}

TEST(SparseAnnotation, FileRoundTripExact) {
    const auto dir = fs::temp_directory_path() / "cordpipe_sparse_rt";
    fs::create_directories(dir);
    std::mt19937_64 rng(3);
    const auto l = testing_support::random_labels(rng, {7, 6, 9}, Spacing::isotropic(kNativeSpacingMm));
    const auto a = sparse_from_dense(l, {0, 3, 8}, "vol7");
    write_sparse_annotation(a, dir / "ann.json", "ann_planes.nii.gz");
    EXPECT_TRUE(fs::exists(dir / "ann_planes.nii.gz"));
    const auto b = load_sparse_annotation(dir / "ann.json", l.dims(), l.spacing());
    EXPECT_EQ(b.volume_id, a.volume_id);
    EXPECT_EQ(b.z_indices, a.z_indices);
    ASSERT_EQ(b.planes.size(), a.planes.size());
    for (std::size_t k = 0; k < a.planes.size(); ++k) EXPECT_EQ(b.planes[k], a.planes[k]);
    EXPECT_EQ(planes_volume(a).dims(), (Dims{7, 6, 3}));
    EXPECT_THROW(load_sparse_annotation(dir / "ann.json", {7, 6, 5}), IndexError);
    fs::remove_all(dir);
}
