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

#include <bit>
#include <cstring>
#include <filesystem>
#include <random>

#include "cordpipe/nifti.hpp"
#include "support.hpp"

using namespace cordpipe;
namespace fs = std::filesystem;

namespace {

template <class T>
void put(std::vector<std::uint8_t>& b, std::size_t off, T v) {
    std::memcpy(b.data() + off, &v, sizeof(T));  // host is little-endian (checked below)
}

std::vector<std::uint8_t> golden_header_4x4x2_float32() {
    std::vector<std::uint8_t> b(348, 0);
    put<std::int32_t>(b, 0, 348);
    const std::int16_t dim[8] = {3, 4, 4, 2, 1, 1, 1, 1};
    for (int i = 0; i < 8; ++i) put<std::int16_t>(b, 40 + 2 * i, dim[i]);
    put<std::int16_t>(b, 70, 16);
    put<std::int16_t>(b, 72, 32);
    const float pix[8] = {1.0f, 0.075f, 0.075f, 0.075f, 0, 0, 0, 0};
    for (int i = 0; i < 8; ++i) put<float>(b, 76 + 4 * i, pix[i]);
    put<float>(b, 108, 352.0f);
    put<float>(b, 112, 1.0f);
    put<float>(b, 116, 0.0f);
    b[123] = 2;
    put<std::int16_t>(b, 252, 0);
    put<std::int16_t>(b, 254, 1);
    put<float>(b, 280, 0.075f);
    put<float>(b, 296 + 4, 0.075f);
    put<float>(b, 312 + 8, 0.075f);
    std::memcpy(b.data() + 344, "n+1\0", 4);
    return b;
}

std::vector<std::uint8_t> tiny_float_file(std::size_t n_values) {
    auto b = golden_header_4x4x2_float32();
    b.resize(352 + 4 * n_values, 0);
    for (std::size_t i = 0; i < n_values; ++i) put<float>(b, 352 + 4 * i, static_cast<float>(i) * 0.5f);
    return b;
}

fs::path temp_dir() {
    auto d = fs::temp_directory_path() / ("cordpipe_nifti_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST(NiftiHeader, GoldenBytes) {
    static_assert(std::endian::native == std::endian::little);
    const auto h = nifti::make_header({4, 4, 2}, Spacing::isotropic(0.075), nifti::Datatype::float32);
    const auto bytes = nifti::encode_header(h);
    const auto golden = golden_header_4x4x2_float32();
    ASSERT_EQ(bytes.size(), golden.size());
    for (std::size_t i = 0; i < golden.size(); ++i) EXPECT_EQ(bytes[i], golden[i]) << "offset " << i;
}

TEST(NiftiRead, MinimalFloatFile) {
    const auto v = nifti::read_scalar(tiny_float_file(32));
    EXPECT_EQ(v.dims(), (Dims{4, 4, 2}));
    EXPECT_EQ(v(3, 3, 1), 15.5);
    EXPECT_FLOAT_EQ(static_cast<float>(v.spacing().dx), 0.075f);
}

TEST(NiftiRead, DistinctErrors) {
    auto bad_magic = tiny_float_file(32);
    std::memcpy(bad_magic.data() + 344, "XXX\0", 4);
    EXPECT_THROW(nifti::read_scalar(bad_magic), FormatError);

    auto bad_type = tiny_float_file(32);
    put<std::int16_t>(bad_type, 70, 64);  // float64
    put<std::int16_t>(bad_type, 72, 64);
    EXPECT_THROW(nifti::read_scalar(bad_type), UnsupportedDatatypeError);

    EXPECT_THROW(nifti::read_scalar(tiny_float_file(31)), TruncatedError);
    EXPECT_THROW(nifti::read_scalar(std::vector<std::uint8_t>(100, 0)), TruncatedError);

    auto bad_dim0 = tiny_float_file(32);
    put<std::int16_t>(bad_dim0, 40, 4);
    EXPECT_THROW(nifti::read_scalar(bad_dim0), FormatError);

    auto bad_bitpix = tiny_float_file(32);
    put<std::int16_t>(bad_bitpix, 72, 8);
    EXPECT_THROW(nifti::read_scalar(bad_bitpix), FormatError);
}

TEST(NiftiRead, LabelRange) {
    nifti::Image img;
    img.dims = {2, 2, 1};
    img.header = nifti::make_header(img.dims, {}, nifti::Datatype::uint8);
    img.raw = {0, 1, 7, 2};
    const auto bytes = nifti::encode(img);
    EXPECT_THROW(nifti::read_labels(bytes), LabelRangeError);
    img.raw = {0, 1, 4, 2};
    EXPECT_EQ(nifti::read_labels(nifti::encode(img))(0, 1, 0), Label::lesion_gm);
    EXPECT_THROW(nifti::read_labels(tiny_float_file(32)), UnsupportedDatatypeError);
}

TEST(NiftiRead, ScaleSlopeApplied) {
    auto b = tiny_float_file(32);
    put<float>(b, 112, 2.0f);
    put<float>(b, 116, 1.0f);
    EXPECT_EQ(nifti::read_scalar(b)(1, 0, 0), 2.0);  // 0.5 * 2 + 1
    put<float>(b, 112, 0.0f);                         // slope 0 means unscaled
    EXPECT_EQ(nifti::read_scalar(b)(1, 0, 0), 0.5);
}

TEST(NiftiRead, BigEndianDetected) {
    auto le = tiny_float_file(32);
    std::vector<std::uint8_t> be = le;
    auto swap = [&](std::size_t off, std::size_t width) { std::reverse(be.begin() + off, be.begin() + off + width); };
    swap(0, 4);
    for (int i = 0; i < 8; ++i) swap(40 + 2 * i, 2);
    swap(70, 2);
    swap(72, 2);
    for (int i = 0; i < 8; ++i) swap(76 + 4 * i, 4);
    swap(108, 4);
    swap(112, 4);
    swap(116, 4);
    swap(252, 2);
    swap(254, 2);
    for (int i = 0; i < 12; ++i) swap(280 + 4 * i, 4);
    for (int i = 0; i < 32; ++i) swap(352 + 4 * i, 4);
    EXPECT_EQ(nifti::read_scalar(be), nifti::read_scalar(le));
}

TEST(NiftiWrite, RejectsNaN) {
    auto v = new_scalar_volume({2, 2, 2}, {}, 1.0);
    v[3] = std::nan("");
    EXPECT_THROW(nifti::write(v), ValueError);
}

TEST(NiftiRoundTrip, RandomVolumesEveryDatatype) {
    std::mt19937_64 rng(11);
    for (auto type : {nifti::Datatype::uint8, nifti::Datatype::int16, nifti::Datatype::float32}) {
        for (int trial = 0; trial < 100; ++trial) {
            const Dims d = testing_support::random_dims(rng, 9, 9, 6);
            const Spacing s{std::uniform_real_distribution<double>(0.01, 3.0)(rng),
                            std::uniform_real_distribution<double>(0.01, 3.0)(rng),
                            std::uniform_real_distribution<double>(0.01, 3.0)(rng)};
            nifti::Image img;
            img.dims = d;
            img.spacing = s;
            img.header = nifti::make_header(d, s, type);
            img.raw.resize(d.voxels());
            for (auto& v : img.raw) {
                switch (type) {
                    case nifti::Datatype::uint8: v = double(rng() % 256); break;
                    case nifti::Datatype::int16: v = double(std::int16_t(rng() & 0xffff)); break;
                    case nifti::Datatype::float32: v = double(std::bit_cast<float>(std::uint32_t(rng() & 0xff7fffff) & 0xbf7fffff)); break;
                }
            }
            const auto bytes = nifti::encode(img);
            const auto back = nifti::decode(bytes);
            ASSERT_EQ(back.dims, d);
            ASSERT_EQ(back.datatype(), type);
            for (std::size_t i = 0; i < img.raw.size(); ++i)
                ASSERT_EQ(std::bit_cast<std::uint64_t>(back.raw[i]), std::bit_cast<std::uint64_t>(img.raw[i]));
            EXPECT_EQ(static_cast<float>(back.spacing.dx), static_cast<float>(s.dx));
            EXPECT_EQ(static_cast<float>(back.spacing.dy), static_cast<float>(s.dy));
            EXPECT_EQ(static_cast<float>(back.spacing.dz), static_cast<float>(s.dz));
            EXPECT_EQ(nifti::encode(back), bytes);
        }
    }
}

TEST(NiftiRoundTrip, LabelAndScalarVolumes) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto l = testing_support::random_labels(rng, testing_support::random_dims(rng, 8, 8, 5),
                                                      Spacing::isotropic(kNativeSpacingMm));
        const auto back = nifti::read_labels(nifti::write(l));
        EXPECT_EQ(back.values().size(), l.values().size());
        EXPECT_TRUE(std::equal(back.values().begin(), back.values().end(), l.values().begin()));
        EXPECT_EQ(static_cast<float>(back.spacing().dx), 0.075f);
    }
    std::vector<double> vals(24);
    for (auto& v : vals) v = static_cast<float>(std::uniform_real_distribution<double>(-5, 5)(rng));
    const ScalarVolume v({2, 3, 4}, {}, vals);
    EXPECT_EQ(nifti::read_scalar(nifti::write(v)).values()[7], vals[7]);
}

TEST(NiftiGzip, PlainAndCompressedDecodeIdentically) {
    std::mt19937_64 rng(13);
    const auto l = testing_support::random_labels(rng, {10, 9, 8});
    const auto plain = nifti::write(l);
    const auto gz = nifti::gzip_compress(plain);
    EXPECT_TRUE(nifti::is_gzip(gz));
    EXPECT_FALSE(nifti::is_gzip(plain));
    EXPECT_EQ(nifti::read_labels(gz), nifti::read_labels(plain));
    EXPECT_EQ(nifti::gzip_decompress(gz), plain);
    auto broken = gz;
    broken.resize(broken.size() / 2);
    EXPECT_THROW(nifti::read_labels(broken), IoError);
}

TEST(NiftiFiles, SaveLoadAndHeaderPair) {
    const auto dir = temp_dir();
    std::mt19937_64 rng(14);
    // Spacings exact in float32, so whole-volume equality is meaningful.
    const auto l = testing_support::random_labels(rng, {6, 5, 4}, {0.5, 0.25, 2.0});
    nifti::save(dir / "l.nii.gz", l);
    nifti::save(dir / "l.nii", l);
    EXPECT_TRUE(nifti::is_gzip(nifti::read_file(dir / "l.nii.gz")));
    EXPECT_EQ(nifti::load_labels(dir / "l.nii.gz"), l);
    EXPECT_EQ(nifti::load_labels(dir / "l.nii"), l);
    EXPECT_FALSE(fs::exists(dir / "l.nii.tmp"));

    // Two-file form: header with "ni1" magic, payload from offset 0 of the .img.
    const auto bytes = nifti::read_file(dir / "l.nii");
    std::vector<std::uint8_t> hdr(bytes.begin(), bytes.begin() + 348);
    std::memcpy(hdr.data() + 344, "ni1\0", 4);
    put<float>(hdr, 108, 0.0f);
    const std::vector<std::uint8_t> img(bytes.begin() + 352, bytes.end());
    nifti::write_file_atomic(dir / "pair.hdr", hdr);
    nifti::write_file_atomic(dir / "pair.img", img);
    EXPECT_EQ(nifti::load_labels(dir / "pair.hdr"), l);

    EXPECT_THROW(nifti::load_labels(dir / "missing.nii"), FileError);
    fs::remove_all(dir);
}
