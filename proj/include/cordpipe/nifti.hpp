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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cordpipe/volume.hpp"

namespace cordpipe::nifti {

inline constexpr std::int32_t kHeaderSize = 348;
/// Header plus the 4-byte extension flag of a single-file image.
inline constexpr std::size_t kSingleFileOffset = 352;

enum class Datatype : std::int16_t {
    uint8 = 2,
    int16 = 4,
    float32 = 16,
};

std::size_t bytes_per_voxel(Datatype t);
/// Throws UnsupportedDatatypeError for codes outside {2, 4, 16}.
Datatype datatype_from_code(std::int16_t code);

/// The NIfTI-1 header fields this library reads or writes. Fields not listed
/// are written as zero and ignored on read.
struct Header {
    std::int32_t sizeof_hdr = kHeaderSize;
    std::array<std::int16_t, 8> dim{};
    std::int16_t datatype = 0;
    std::int16_t bitpix = 0;
    std::array<float, 8> pixdim{};
    float vox_offset = static_cast<float>(kSingleFileOffset);
    float scl_slope = 1.0f;
    float scl_inter = 0.0f;
    std::uint8_t xyzt_units = 2;  // millimetres
    std::int16_t qform_code = 0;
    std::int16_t sform_code = 0;
    std::array<float, 4> srow_x{};
    std::array<float, 4> srow_y{};
    std::array<float, 4> srow_z{};
    std::string descrip;
    std::array<char, 4> magic{'n', '+', '1', '\0'};

    bool single_file() const { return magic[1] == '+'; }
};

/// Decoded header and raw (unscaled) payload, in file order, widened to double.
struct Image {
    Header header;
    Dims dims;
    Spacing spacing;
    std::vector<double> raw;

    Datatype datatype() const { return static_cast<Datatype>(header.datatype); }
};

/// Little-endian 348-byte encoding.
std::array<std::uint8_t, kHeaderSize> encode_header(const Header& h);

/// Parses and validates a header. Sets `swapped` when the stream is big-endian.
Header decode_header(std::span<const std::uint8_t> bytes, bool& swapped);

/// Builds a header for a fresh single-file image.
Header make_header(const Dims& dims, const Spacing& spacing, Datatype type);

/// Decodes a single-file image, gzip-compressed or plain.
Image decode(std::span<const std::uint8_t> bytes);
/// Decodes a header/image pair ("ni1").
Image decode(std::span<const std::uint8_t> header_bytes, std::span<const std::uint8_t> image_bytes);

/// Encodes raw values with the header's datatype. Values must be
/// representable in that datatype (finite, in range, integral for integer codes).
std::vector<std::uint8_t> encode(const Image& img);

ScalarVolume to_scalar(const Image& img, Channel channel = Channel::magnitude);
/// Requires an integer datatype and ids in {0..4}.
LabelVolume to_labels(const Image& img);

enum class Kind { scalar, labels };

ScalarVolume read_scalar(std::span<const std::uint8_t> bytes, Channel channel = Channel::magnitude);
LabelVolume read_labels(std::span<const std::uint8_t> bytes);
std::variant<ScalarVolume, LabelVolume> read(std::span<const std::uint8_t> bytes, Kind kind);

/// float32 single-file image. Throws ValueError on non-finite voxels.
std::vector<std::uint8_t> write(const ScalarVolume& vol);
/// uint8 single-file image.
std::vector<std::uint8_t> write(const LabelVolume& vol);
std::vector<std::uint8_t> write(const Grid<double>& vol);

bool is_gzip(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gzip_decompress(std::span<const std::uint8_t> bytes);

// File helpers. Paths ending in ".gz" are compressed on write; reads detect
// compression from the stream. Writes go to a temporary sibling and are renamed.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

Image load_image(const std::filesystem::path& path);
ScalarVolume load_scalar(const std::filesystem::path& path, Channel channel = Channel::magnitude);
LabelVolume load_labels(const std::filesystem::path& path);
void save(const std::filesystem::path& path, const ScalarVolume& vol);
void save(const std::filesystem::path& path, const LabelVolume& vol);
void save(const std::filesystem::path& path, const Grid<double>& vol);
void save_image(const std::filesystem::path& path, const Image& img);

}  // namespace cordpipe::nifti
