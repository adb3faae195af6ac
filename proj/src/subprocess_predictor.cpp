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

#include <sys/types.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>

#include "cordpipe/nifti.hpp"
#include "cordpipe/pseudo_label.hpp"

namespace cordpipe::pseudo {
namespace {

std::atomic<std::uint64_t> g_call_counter{0};

std::string replace_all(std::string s, const std::string& key, const std::string& value) {
    for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size()))
        s.replace(pos, key.size(), value);
    return s;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

}  // namespace

std::vector<std::uint8_t> encode_slice_input(const Plane<double>& magnitude, const Plane<double>* phase,
                                             const Spacing& spacing) {
    if (phase && !phase->same_shape(magnitude)) throw DimensionError("magnitude and phase planes differ in shape");
    const std::size_t k = phase ? 2 : 1;
    const Dims dims{magnitude.nx(), magnitude.ny(), k};
    nifti::Image img;
    img.header = nifti::make_header(dims, spacing, nifti::Datatype::float32);
    img.dims = dims;
    img.spacing = spacing;
    img.raw.assign(magnitude.values().begin(), magnitude.values().end());
    if (phase) img.raw.insert(img.raw.end(), phase->values().begin(), phase->values().end());
    return nifti::encode(img);
}

SliceInput decode_slice_input(std::span<const std::uint8_t> bytes) {
    const nifti::Image img = nifti::decode(bytes);
    if (img.dims.nz != 1 && img.dims.nz != 2) throw FormatError("slice input must have 1 or 2 channels");
    const ScalarVolume vol = nifti::to_scalar(img);
    SliceInput in{axial_slice(vol, 0), std::nullopt};
    if (img.dims.nz == 2) in.phase = axial_slice(vol, 1);
    return in;
}

std::vector<std::uint8_t> encode_region_planes(const RegionPlanes& planes, const Spacing& spacing) {
    planes.validate();
    const Dims dims{planes.wm.nx(), planes.wm.ny(), 3};
    nifti::Image img;
    img.header = nifti::make_header(dims, spacing, nifti::Datatype::float32);
    img.dims = dims;
    img.spacing = spacing;
    for (const auto* p : {&planes.wm, &planes.gm, &planes.lesion})
        img.raw.insert(img.raw.end(), p->values().begin(), p->values().end());
    return nifti::encode(img);
}

RegionPlanes decode_region_planes(std::span<const std::uint8_t> bytes) {
    const nifti::Image img = nifti::decode(bytes);
    if (img.dims.nz != 3) throw FormatError("region probability image must have exactly 3 channels");
    const ScalarVolume vol = nifti::to_scalar(img);
    RegionPlanes planes{axial_slice(vol, 0), axial_slice(vol, 1), axial_slice(vol, 2)};
    try {
        planes.validate();
    } catch (const ValidationError& e) {
        throw FormatError(std::string("region probability image: ") + e.what());
    }
    return planes;
}

SubprocessPredictor::SubprocessPredictor(std::string command_template, std::filesystem::path work_dir)
    : command_(std::move(command_template)), work_dir_(std::move(work_dir)) {
    if (command_.empty()) throw ConfigError("predictor command is empty");
}

RegionPlanes SubprocessPredictor::predict(const Plane<double>& magnitude, const Plane<double>* phase) const {
    const std::string stem = "cordpipe_" + std::to_string(::getpid()) + "_" + std::to_string(g_call_counter++);
    const auto in_path = work_dir_ / (stem + "_in.nii");
    const auto out_path = work_dir_ / (stem + "_out.nii");
    nifti::write_file_atomic(in_path, encode_slice_input(magnitude, phase));

    std::string cmd = command_;
    const bool has_in = cmd.find("{input}") != std::string::npos;
    const bool has_out = cmd.find("{output}") != std::string::npos;
    cmd = replace_all(cmd, "{input}", shell_quote(in_path.string()));
    cmd = replace_all(cmd, "{output}", shell_quote(out_path.string()));
    if (!has_in) cmd += " " + shell_quote(in_path.string());
    if (!has_out) cmd += " " + shell_quote(out_path.string());

    const int rc = std::system(cmd.c_str());
    std::error_code ec;
    std::filesystem::remove(in_path, ec);
    if (rc != 0) {
        std::filesystem::remove(out_path, ec);
        throw PredictorError("predictor command exited with status " + std::to_string(rc));
    }
    std::vector<std::uint8_t> bytes;
    try {
        bytes = nifti::read_file(out_path);
    } catch (const FileError&) {
        throw PredictorError("predictor command did not write " + out_path.string());
    }
    std::filesystem::remove(out_path, ec);
    RegionPlanes out = decode_region_planes(bytes);
    if (out.wm.nx() != magnitude.nx() || out.wm.ny() != magnitude.ny())
        throw DimensionError("predictor output shape does not match the input slice");
    return out;
}

}  // namespace cordpipe::pseudo
