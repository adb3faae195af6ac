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

#include "cordpipe/volume.hpp"

#include <cmath>
#include <limits>

namespace cordpipe {

void Spacing::validate() const {
    for (double s : {dx, dy, dz})
        if (!std::isfinite(s) || s <= 0.0)
            throw ValueError("voxel spacing must be finite and positive, got " + std::to_string(s));
}

std::size_t Dims::voxels() const {
    if (nx == 0 || ny == 0 || nz == 0) throw DimensionError("zero extent in dims " + to_string(*this));
    constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
    if (nx > kMax / ny || nx * ny > kMax / nz) throw DimensionError("dims overflow: " + to_string(*this));
    return nx * ny * nz;
}

std::string to_string(const Dims& d) {
    return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

std::string_view to_string(Channel c) { return c == Channel::magnitude ? "magnitude" : "phase"; }

bool ScalarVolume::all_finite() const {
    for (double v : values())
        if (!std::isfinite(v)) return false;
    return true;
}

std::string_view label_name(Label l) {
    switch (l) {
        case Label::background: return "background";
        case Label::healthy_wm: return "healthy_wm";
        case Label::healthy_gm: return "healthy_gm";
        case Label::lesion_wm: return "lesion_wm";
        case Label::lesion_gm: return "lesion_gm";
    }
    return "unknown";
}

std::optional<Label> parse_label(std::string_view s) {
    for (std::uint8_t id = 0; id <= kMaxLabel; ++id) {
        const auto l = static_cast<Label>(id);
        if (s == label_name(l) || s == std::to_string(id)) return l;
    }
    return std::nullopt;
}

void validate_label_ids(std::span<const std::uint8_t> ids) {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] > kMaxLabel)
            throw ValueError("label id " + std::to_string(ids[i]) + " at voxel " + std::to_string(i) +
                             " outside {0..4}");
}

LabelVolume::LabelVolume(Dims dims, Spacing spacing, Label fill)
    : grid_(dims, spacing, static_cast<std::uint8_t>(fill)) {
    if (static_cast<std::uint8_t>(fill) > kMaxLabel) throw ValueError("fill label outside {0..4}");
}

LabelVolume::LabelVolume(Dims dims, Spacing spacing, std::vector<std::uint8_t> ids)
    : grid_(dims, spacing, std::move(ids)) {
    validate_label_ids(grid_.values());
}

MaskVolume LabelVolume::mask_of(Label l) const {
    MaskVolume m(dims(), spacing(), std::uint8_t{0});
    const auto id = static_cast<std::uint8_t>(l);
    auto src = values();
    auto dst = m.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == id ? 1 : 0;
    return m;
}

std::size_t LabelVolume::count(Label l) const {
    const auto id = static_cast<std::uint8_t>(l);
    std::size_t n = 0;
    for (auto v : values()) n += v == id;
    return n;
}

SoftLabelVolume::SoftLabelVolume(Dims dims, Spacing spacing) : dims_(dims), spacing_(spacing) {
    for (auto& c : channels_) c = ProbabilityVolume(dims, spacing, 0.0);
}

std::size_t SoftLabelVolume::slot(Label l) {
    if (l == Label::background) throw ValueError("background has no soft-label channel");
    return static_cast<std::size_t>(l) - 1;
}

void PatchSpec::validate() const {
    if (px == 0 || py == 0 || pz == 0) throw DimensionError("patch extents must be >= 1");
}

PatchSpec PatchSpec::patch5() { return {192, 208, 64, "patch5"}; }

PatchSpec PatchSpec::patch1(std::size_t px, std::size_t py) { return {px, py, 144, "patch1"}; }

PatchSpec PatchSpec::full(const Dims& d) { return {d.nx, d.ny, d.nz, "full"}; }

ScalarVolume new_scalar_volume(Dims dims, Spacing spacing, double fill, Channel channel) {
    if (!std::isfinite(fill)) throw ValueError("fill value must be finite");
    return ScalarVolume(Grid<double>(dims, spacing, fill), channel);
}

ScalarVolume extract_patch(const ScalarVolume& vol, Origin3 origin, const PatchSpec& spec,
                           double pad_value) {
    return ScalarVolume(extract_patch(static_cast<const Grid<double>&>(vol), origin, spec, pad_value),
                        vol.channel());
}

LabelVolume extract_patch(const LabelVolume& vol, Origin3 origin, const PatchSpec& spec) {
    auto g = extract_patch(vol.grid(), origin, spec, static_cast<std::uint8_t>(Label::background));
    auto v = g.values();
    return LabelVolume(g.dims(), g.spacing(), std::vector<std::uint8_t>(v.begin(), v.end()));
}

Plane<std::uint8_t> axial_slice(const LabelVolume& vol, std::size_t z) { return axial_slice(vol.grid(), z); }

void set_axial_slice(LabelVolume& vol, std::size_t z, const Plane<std::uint8_t>& plane) {
    validate_label_ids(plane.values());
    if (z >= vol.dims().nz)
        throw IndexError("axial slice " + std::to_string(z) + " out of range [0," +
                         std::to_string(vol.dims().nz) + ")");
    if (plane.nx() != vol.dims().nx || plane.ny() != vol.dims().ny)
        throw DimensionError("plane shape does not match volume slice shape");
    const std::size_t base = z * vol.dims().slice_voxels();
    auto src = plane.values();
    for (std::size_t i = 0; i < src.size(); ++i) vol.set(base + i, static_cast<Label>(src[i]));
}

}  // namespace cordpipe
