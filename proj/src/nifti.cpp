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

#include "cordpipe/nifti.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <system_error>

namespace cordpipe::nifti {
namespace {

// Fixed NIfTI-1 field offsets.
constexpr std::size_t kOffSizeofHdr = 0;
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffDescrip = 148;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffSrowX = 280;
constexpr std::size_t kOffSrowY = 296;
constexpr std::size_t kOffSrowZ = 312;
constexpr std::size_t kOffMagic = 344;

template <class T>
T load(std::span<const std::uint8_t> bytes, std::size_t off, bool swapped) {
    std::array<std::uint8_t, sizeof(T)> buf;
    std::memcpy(buf.data(), bytes.data() + off, sizeof(T));
    // Native order is little-endian on every supported target; swap for big-endian files.
    if (swapped) std::reverse(buf.begin(), buf.end());
    return std::bit_cast<T>(buf);
}

template <class T>
void store(std::uint8_t* out, std::size_t off, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    std::memcpy(out + off, &v, sizeof(T));
}

double load_voxel(const std::uint8_t* p, Datatype t, bool swapped) {
    std::span<const std::uint8_t> s(p, bytes_per_voxel(t));
    switch (t) {
        case Datatype::uint8: return p[0];
        case Datatype::int16: return load<std::int16_t>(s, 0, swapped);
        case Datatype::float32: return load<float>(s, 0, swapped);
    }
    return 0.0;
}

Image decode_payload(Header h, bool swapped, std::span<const std::uint8_t> payload) {
    const Datatype type = datatype_from_code(h.datatype);
    Image img;
    img.header = h;
    img.dims = Dims{static_cast<std::size_t>(h.dim[1]), static_cast<std::size_t>(h.dim[2]),
                    h.dim[0] >= 3 ? static_cast<std::size_t>(h.dim[3]) : 1};
    img.spacing = Spacing{h.pixdim[1], h.pixdim[2], h.dim[0] >= 3 ? h.pixdim[3] : 1.0f};
    // Some writers leave pixdim zero for unused axes; treat that as unit spacing.
    if (h.dim[0] == 2 && !(img.spacing.dz > 0)) img.spacing.dz = 1.0;
    try {
        img.spacing.validate();
    } catch (const ValueError& e) {
        throw FormatError(std::string("invalid pixdim: ") + e.what());
    }
    const std::size_t n = img.dims.voxels();
    const std::size_t bpv = bytes_per_voxel(type);
    if (n > payload.size() / bpv)
        throw TruncatedError("payload holds " + std::to_string(payload.size()) + " bytes, need " +
                             std::to_string(n * bpv));
    img.raw.resize(n);
    for (std::size_t i = 0; i < n; ++i) img.raw[i] = load_voxel(payload.data() + i * bpv, type, swapped);
    return img;
}

double scaled(const Header& h, double raw) {
    if (h.scl_slope == 0.0f || !std::isfinite(h.scl_slope)) return raw;
    return raw * static_cast<double>(h.scl_slope) + static_cast<double>(h.scl_inter);
}

}  // namespace

std::size_t bytes_per_voxel(Datatype t) {
    switch (t) {
        case Datatype::uint8: return 1;
        case Datatype::int16: return 2;
        case Datatype::float32: return 4;
    }
    return 0;
}

Datatype datatype_from_code(std::int16_t code) {
    switch (code) {
        case 2: return Datatype::uint8;
        case 4: return Datatype::int16;
        case 16: return Datatype::float32;
        default: throw UnsupportedDatatypeError("unsupported NIfTI datatype code " + std::to_string(code));
    }
}

std::array<std::uint8_t, kHeaderSize> encode_header(const Header& h) {
    std::array<std::uint8_t, kHeaderSize> out{};
    std::uint8_t* p = out.data();
    store<std::int32_t>(p, kOffSizeofHdr, h.sizeof_hdr);
    for (std::size_t i = 0; i < 8; ++i) store<std::int16_t>(p, kOffDim + 2 * i, h.dim[i]);
    store<std::int16_t>(p, kOffDatatype, h.datatype);
    store<std::int16_t>(p, kOffBitpix, h.bitpix);
    for (std::size_t i = 0; i < 8; ++i) store<float>(p, kOffPixdim + 4 * i, h.pixdim[i]);
    store<float>(p, kOffVoxOffset, h.vox_offset);
    store<float>(p, kOffSclSlope, h.scl_slope);
    store<float>(p, kOffSclInter, h.scl_inter);
    p[kOffXyztUnits] = h.xyzt_units;
    std::memcpy(p + kOffDescrip, h.descrip.data(), std::min<std::size_t>(h.descrip.size(), 79));
    store<std::int16_t>(p, kOffQformCode, h.qform_code);
    store<std::int16_t>(p, kOffSformCode, h.sform_code);
    for (std::size_t i = 0; i < 4; ++i) {
        store<float>(p, kOffSrowX + 4 * i, h.srow_x[i]);
        store<float>(p, kOffSrowY + 4 * i, h.srow_y[i]);
        store<float>(p, kOffSrowZ + 4 * i, h.srow_z[i]);
    }
    std::memcpy(p + kOffMagic, h.magic.data(), 4);
    return out;
}

Header decode_header(std::span<const std::uint8_t> bytes, bool& swapped) {
    if (bytes.size() < static_cast<std::size_t>(kHeaderSize))
        throw TruncatedError("stream of " + std::to_string(bytes.size()) + " bytes is shorter than the 348-byte header");
    const auto le = load<std::int32_t>(bytes, kOffSizeofHdr, false);
    if (le == kHeaderSize)
        swapped = false;
    else if (load<std::int32_t>(bytes, kOffSizeofHdr, true) == kHeaderSize)
        swapped = true;
    else
        throw FormatError("sizeof_hdr is " + std::to_string(le) + ", expected 348");

    Header h;
    h.sizeof_hdr = kHeaderSize;
    std::memcpy(h.magic.data(), bytes.data() + kOffMagic, 4);
    const bool magic_ok = h.magic[0] == 'n' && (h.magic[1] == '+' || h.magic[1] == 'i') &&
                          h.magic[2] == '1' && h.magic[3] == '\0';
    if (!magic_ok) throw FormatError("bad NIfTI-1 magic");

    for (std::size_t i = 0; i < 8; ++i) h.dim[i] = load<std::int16_t>(bytes, kOffDim + 2 * i, swapped);
    h.datatype = load<std::int16_t>(bytes, kOffDatatype, swapped);
    h.bitpix = load<std::int16_t>(bytes, kOffBitpix, swapped);
    for (std::size_t i = 0; i < 8; ++i) h.pixdim[i] = load<float>(bytes, kOffPixdim + 4 * i, swapped);
    h.vox_offset = load<float>(bytes, kOffVoxOffset, swapped);
    h.scl_slope = load<float>(bytes, kOffSclSlope, swapped);
    h.scl_inter = load<float>(bytes, kOffSclInter, swapped);
    h.xyzt_units = bytes[kOffXyztUnits];
    h.qform_code = load<std::int16_t>(bytes, kOffQformCode, swapped);
    h.sform_code = load<std::int16_t>(bytes, kOffSformCode, swapped);
    for (std::size_t i = 0; i < 4; ++i) {
        h.srow_x[i] = load<float>(bytes, kOffSrowX + 4 * i, swapped);
        h.srow_y[i] = load<float>(bytes, kOffSrowY + 4 * i, swapped);
        h.srow_z[i] = load<float>(bytes, kOffSrowZ + 4 * i, swapped);
    }
    const char* d = reinterpret_cast<const char*>(bytes.data() + kOffDescrip);
    h.descrip.assign(d, strnlen(d, 80));

    if (h.dim[0] != 2 && h.dim[0] != 3)
        throw FormatError("dim[0] is " + std::to_string(h.dim[0]) + ", only 2D and 3D images are supported");
    for (int i = 1; i <= h.dim[0]; ++i)
        if (h.dim[i] <= 0) throw FormatError("dim[" + std::to_string(i) + "] must be positive");
    const Datatype type = datatype_from_code(h.datatype);
    if (h.bitpix != static_cast<std::int16_t>(8 * bytes_per_voxel(type)))
        throw FormatError("bitpix " + std::to_string(h.bitpix) + " inconsistent with datatype " +
                          std::to_string(h.datatype));
    if (h.single_file() && !(h.vox_offset >= static_cast<float>(kHeaderSize)))
        throw FormatError("vox_offset must be at least 348 for single-file images");
    return h;
}

Header make_header(const Dims& dims, const Spacing& spacing, Datatype type) {
    constexpr auto kMaxDim = static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max());
    if (dims.nx > kMaxDim || dims.ny > kMaxDim || dims.nz > kMaxDim)
        throw DimensionError("dims " + to_string(dims) + " exceed the NIfTI-1 limit of 32767");
    Header h;
    h.dim = {3, static_cast<std::int16_t>(dims.nx), static_cast<std::int16_t>(dims.ny),
             static_cast<std::int16_t>(dims.nz), 1, 1, 1, 1};
    h.datatype = static_cast<std::int16_t>(type);
    h.bitpix = static_cast<std::int16_t>(8 * bytes_per_voxel(type));
    h.pixdim = {1.0f, static_cast<float>(spacing.dx), static_cast<float>(spacing.dy),
                static_cast<float>(spacing.dz), 0.0f, 0.0f, 0.0f, 0.0f};
    h.sform_code = 1;
    h.srow_x = {h.pixdim[1], 0.0f, 0.0f, 0.0f};
    h.srow_y = {0.0f, h.pixdim[2], 0.0f, 0.0f};
    h.srow_z = {0.0f, 0.0f, h.pixdim[3], 0.0f};
    return h;
}

Image decode(std::span<const std::uint8_t> bytes) {
    if (is_gzip(bytes)) {
        const auto plain = gzip_decompress(bytes);
        return decode(std::span<const std::uint8_t>(plain));
    }
    bool swapped = false;
    const Header h = decode_header(bytes, swapped);
    if (!h.single_file()) throw FormatError("header-only (ni1) image needs its .img payload");
    const auto offset = static_cast<std::size_t>(h.vox_offset);
    if (offset > bytes.size()) throw TruncatedError("vox_offset points past the end of the stream");
    return decode_payload(h, swapped, bytes.subspan(offset));
}

Image decode(std::span<const std::uint8_t> header_bytes, std::span<const std::uint8_t> image_bytes) {
    std::vector<std::uint8_t> hbuf, ibuf;
    if (is_gzip(header_bytes)) {
        hbuf = gzip_decompress(header_bytes);
        header_bytes = hbuf;
    }
    if (is_gzip(image_bytes)) {
        ibuf = gzip_decompress(image_bytes);
        image_bytes = ibuf;
    }
    bool swapped = false;
    const Header h = decode_header(header_bytes, swapped);
    if (h.single_file()) return decode(header_bytes);
    const auto offset = static_cast<std::size_t>(std::max(0.0f, h.vox_offset));
    if (offset > image_bytes.size()) throw TruncatedError("vox_offset points past the end of the image file");
    return decode_payload(h, swapped, image_bytes.subspan(offset));
}

std::vector<std::uint8_t> encode(const Image& img) {
    const Datatype type = datatype_from_code(img.header.datatype);
    const std::size_t n = img.dims.voxels();
    if (img.raw.size() != n) throw DimensionError("image payload does not match dims");
    const std::size_t bpv = bytes_per_voxel(type);

    Header h = img.header;
    h.sizeof_hdr = kHeaderSize;
    h.magic = {'n', '+', '1', '\0'};
    h.vox_offset = static_cast<float>(kSingleFileOffset);
    h.bitpix = static_cast<std::int16_t>(8 * bpv);

    std::vector<std::uint8_t> out(kSingleFileOffset + n * bpv, 0);
    const auto hdr = encode_header(h);
    std::copy(hdr.begin(), hdr.end(), out.begin());
    std::uint8_t* p = out.data() + kSingleFileOffset;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = img.raw[i];
        if (!std::isfinite(v)) throw ValueError("non-finite voxel " + std::to_string(i) + " cannot be written");
        switch (type) {
            case Datatype::uint8:
                if (v < 0 || v > 255 || v != std::floor(v)) throw ValueError("value not representable as uint8");
                p[i] = static_cast<std::uint8_t>(v);
                break;
            case Datatype::int16:
                if (v < -32768 || v > 32767 || v != std::floor(v))
                    throw ValueError("value not representable as int16");
                store<std::int16_t>(p, 2 * i, static_cast<std::int16_t>(v));
                break;
            case Datatype::float32:
                store<float>(p, 4 * i, static_cast<float>(v));
                break;
        }
    }
    return out;
}

ScalarVolume to_scalar(const Image& img, Channel channel) {
    std::vector<double> data(img.raw.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = scaled(img.header, img.raw[i]);
    ScalarVolume vol(img.dims, img.spacing, std::move(data), channel);
    if (!vol.all_finite()) throw FormatError("image contains non-finite intensities");
    return vol;
}

LabelVolume to_labels(const Image& img) {
    if (img.datatype() == Datatype::float32)
        throw UnsupportedDatatypeError("label images require an integer datatype, got float32");
    std::vector<std::uint8_t> ids(img.raw.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double v = scaled(img.header, img.raw[i]);
        if (!(v >= 0.0 && v <= kMaxLabel) || v != std::floor(v))
            throw LabelRangeError("label value " + std::to_string(v) + " at voxel " + std::to_string(i) +
                                  " outside {0..4}");
        ids[i] = static_cast<std::uint8_t>(v);
    }
    return LabelVolume(img.dims, img.spacing, std::move(ids));
}

ScalarVolume read_scalar(std::span<const std::uint8_t> bytes, Channel channel) {
    return to_scalar(decode(bytes), channel);
}

LabelVolume read_labels(std::span<const std::uint8_t> bytes) { return to_labels(decode(bytes)); }

std::variant<ScalarVolume, LabelVolume> read(std::span<const std::uint8_t> bytes, Kind kind) {
    if (kind == Kind::labels) return read_labels(bytes);
    return read_scalar(bytes);
}

std::vector<std::uint8_t> write(const Grid<double>& vol) {
    Image img;
    img.header = make_header(vol.dims(), vol.spacing(), Datatype::float32);
    img.dims = vol.dims();
    img.spacing = vol.spacing();
    img.raw.assign(vol.values().begin(), vol.values().end());
    return encode(img);
}

std::vector<std::uint8_t> write(const ScalarVolume& vol) {
    if (!vol.all_finite()) throw ValueError("scalar volume contains non-finite values");
    return write(static_cast<const Grid<double>&>(vol));
}

std::vector<std::uint8_t> write(const LabelVolume& vol) {
    Image img;
    img.header = make_header(vol.dims(), vol.spacing(), Datatype::uint8);
    img.dims = vol.dims();
    img.spacing = vol.spacing();
    img.raw.assign(vol.values().begin(), vol.values().end());
    return encode(img);
}

bool is_gzip(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes) {
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("gzip", "deflateInit2 failed");
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 32);
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const std::size_t produced = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw IoError("gzip", "deflate did not finish");
    out.resize(produced);
    return out;
}

std::vector<std::uint8_t> gzip_decompress(std::span<const std::uint8_t> bytes) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw IoError("gzip", "inflateInit2 failed");
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> chunk;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw TruncatedError("corrupt or truncated gzip stream");
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw TruncatedError("gzip stream ended early");
        }
    }
    inflateEnd(&zs);
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw FileError("read failed for " + path.string());
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FileError("cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw FileError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw FileError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace {

bool ends_with(const std::filesystem::path& p, std::string_view suffix) {
    const std::string s = p.string();
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void save_bytes(const std::filesystem::path& path, std::vector<std::uint8_t> bytes) {
    if (ends_with(path, ".gz")) bytes = gzip_compress(bytes);
    write_file_atomic(path, bytes);
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
    if (ends_with(path, ".hdr") || ends_with(path, ".hdr.gz")) {
        std::string img = path.string();
        img.replace(img.rfind(".hdr"), 4, ".img");
        return decode(read_file(path), read_file(img));
    }
    return decode(read_file(path));
}

ScalarVolume load_scalar(const std::filesystem::path& path, Channel channel) {
    return to_scalar(load_image(path), channel);
}

LabelVolume load_labels(const std::filesystem::path& path) { return to_labels(load_image(path)); }

void save(const std::filesystem::path& path, const ScalarVolume& vol) { save_bytes(path, write(vol)); }
void save(const std::filesystem::path& path, const LabelVolume& vol) { save_bytes(path, write(vol)); }
void save(const std::filesystem::path& path, const Grid<double>& vol) { save_bytes(path, write(vol)); }
void save_image(const std::filesystem::path& path, const Image& img) { save_bytes(path, encode(img)); }

}  // namespace cordpipe::nifti
