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

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cordpipe/errors.hpp"

namespace cordpipe {

/// Native ex vivo acquisition resolution, millimetres per voxel.
inline constexpr double kNativeSpacingMm = 0.075;

struct Spacing {
    double dx = kNativeSpacingMm;
    double dy = kNativeSpacingMm;
    double dz = kNativeSpacingMm;

    static Spacing isotropic(double s) { return {s, s, s}; }

    /// Throws ValueError unless all three are finite and > 0.
    void validate() const;

    bool operator==(const Spacing&) const = default;
};

/// Grid extent. The memory layout is x fastest, then y, then z, so each
/// axial slice (fixed z) is one contiguous run of nx*ny values.
struct Dims {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::size_t nz = 0;

    /// Voxel count. Throws DimensionError on a zero extent or on overflow.
    std::size_t voxels() const;
    std::size_t slice_voxels() const { return nx * ny; }

    bool operator==(const Dims&) const = default;
};

struct Index3 {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t z = 0;

    bool operator==(const Index3&) const = default;
};

std::string to_string(const Dims& d);

/// Dense 2D plane in the same x-fastest layout as a volume slice.
template <class T>
class Plane {
public:
    Plane() = default;
    Plane(std::size_t nx, std::size_t ny, T fill = T{}) : nx_(nx), ny_(ny), data_(nx * ny, fill) {}
    Plane(std::size_t nx, std::size_t ny, std::vector<T> data) : nx_(nx), ny_(ny), data_(std::move(data)) {
        if (data_.size() != nx_ * ny_)
            throw DimensionError("plane payload size does not match " + std::to_string(nx_) + "x" +
                                 std::to_string(ny_));
    }

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const Plane& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

    T operator()(std::size_t x, std::size_t y) const { return data_[x + nx_ * y]; }
    T& operator()(std::size_t x, std::size_t y) { return data_[x + nx_ * y]; }

    std::span<const T> values() const { return data_; }
    std::span<T> values() { return data_; }

    bool operator==(const Plane&) const = default;

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<T> data_;
};

/// Generic 3D grid with physical spacing. No value-domain invariants; the
/// typed wrappers below add those.
template <class T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(Dims dims, Spacing spacing, T fill = T{}) : dims_(dims), spacing_(spacing) {
        spacing_.validate();
        data_.assign(dims_.voxels(), fill);
    }
    Grid(Dims dims, Spacing spacing, std::vector<T> data)
        : dims_(dims), spacing_(spacing), data_(std::move(data)) {
        spacing_.validate();
        if (data_.size() != dims_.voxels())
            throw DimensionError("payload of " + std::to_string(data_.size()) +
                                 " values does not match dims " + to_string(dims_));
    }

    const Dims& dims() const { return dims_; }
    const Spacing& spacing() const { return spacing_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
        return x + dims_.nx * (y + dims_.ny * z);
    }
    Index3 coords(std::size_t i) const {
        const std::size_t plane = dims_.nx * dims_.ny;
        return {i % dims_.nx, (i % plane) / dims_.nx, i / plane};
    }
    bool contains(std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z) const {
        return x >= 0 && y >= 0 && z >= 0 && static_cast<std::size_t>(x) < dims_.nx &&
               static_cast<std::size_t>(y) < dims_.ny && static_cast<std::size_t>(z) < dims_.nz;
    }

    T operator()(std::size_t x, std::size_t y, std::size_t z) const { return data_[index(x, y, z)]; }
    T& operator()(std::size_t x, std::size_t y, std::size_t z) { return data_[index(x, y, z)]; }
    T operator[](std::size_t i) const { return data_[i]; }
    T& operator[](std::size_t i) { return data_[i]; }

    std::span<const T> values() const { return data_; }
    std::span<T> values() { return data_; }
    std::span<const T> slice_values(std::size_t z) const {
        return std::span<const T>(data_).subspan(z * dims_.slice_voxels(), dims_.slice_voxels());
    }
    std::span<T> slice_values(std::size_t z) {
        return std::span<T>(data_).subspan(z * dims_.slice_voxels(), dims_.slice_voxels());
    }

    bool operator==(const Grid&) const = default;

private:
    Dims dims_;
    Spacing spacing_;
    std::vector<T> data_;
};

using MaskVolume = Grid<std::uint8_t>;
using ProbabilityVolume = Grid<double>;

enum class Channel { magnitude, phase };

std::string_view to_string(Channel c);

/// One image channel: real intensities plus the channel it carries.
class ScalarVolume : public Grid<double> {
public:
    ScalarVolume() = default;
    ScalarVolume(Dims dims, Spacing spacing, std::vector<double> data,
                 Channel channel = Channel::magnitude)
        : Grid<double>(dims, spacing, std::move(data)), channel_(channel) {}
    ScalarVolume(Grid<double> grid, Channel channel = Channel::magnitude)
        : Grid<double>(std::move(grid)), channel_(channel) {}

    Channel channel() const { return channel_; }
    void set_channel(Channel c) { channel_ = c; }

    /// True when every voxel is finite.
    bool all_finite() const;

    bool operator==(const ScalarVolume&) const = default;

private:
    Channel channel_ = Channel::magnitude;
};

/// Exclusive tissue classes.
enum class Label : std::uint8_t {
    background = 0,
    healthy_wm = 1,
    healthy_gm = 2,
    lesion_wm = 3,
    lesion_gm = 4,
};

inline constexpr std::uint8_t kMaxLabel = 4;
inline constexpr std::size_t kLabelCount = 5;
inline constexpr std::array<Label, 4> kForegroundLabels = {Label::healthy_wm, Label::healthy_gm,
                                                            Label::lesion_wm, Label::lesion_gm};

std::string_view label_name(Label l);
/// Inverse of label_name; also accepts the numeric id.
std::optional<Label> parse_label(std::string_view s);

/// Exclusive class map. Every voxel id is in {0..4}; constructors and
/// setters reject anything else with ValueError.
class LabelVolume {
public:
    LabelVolume() = default;
    LabelVolume(Dims dims, Spacing spacing, Label fill = Label::background);
    LabelVolume(Dims dims, Spacing spacing, std::vector<std::uint8_t> ids);

    const Dims& dims() const { return grid_.dims(); }
    const Spacing& spacing() const { return grid_.spacing(); }
    std::size_t size() const { return grid_.size(); }
    const Grid<std::uint8_t>& grid() const { return grid_; }
    std::span<const std::uint8_t> values() const { return grid_.values(); }
    std::span<const std::uint8_t> slice_values(std::size_t z) const { return grid_.slice_values(z); }

    Label operator()(std::size_t x, std::size_t y, std::size_t z) const {
        return static_cast<Label>(grid_(x, y, z));
    }
    Label operator[](std::size_t i) const { return static_cast<Label>(grid_[i]); }
    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const { return grid_.index(x, y, z); }
    Index3 coords(std::size_t i) const { return grid_.coords(i); }

    void set(std::size_t x, std::size_t y, std::size_t z, Label l) { set(grid_.index(x, y, z), l); }
    void set(std::size_t i, Label l) {
        const auto id = static_cast<std::uint8_t>(l);
        if (id > kMaxLabel) throw ValueError("label id " + std::to_string(id) + " outside {0..4}");
        grid_[i] = id;
    }

    /// Binary indicator of one class.
    MaskVolume mask_of(Label l) const;
    std::size_t count(Label l) const;

    bool operator==(const LabelVolume&) const = default;

private:
    Grid<std::uint8_t> grid_;
};

/// Throws ValueError if any id exceeds kMaxLabel.
void validate_label_ids(std::span<const std::uint8_t> ids);

/// Per-class soft targets for the four foreground classes, each in [0,1].
class SoftLabelVolume {
public:
    SoftLabelVolume() = default;
    SoftLabelVolume(Dims dims, Spacing spacing);

    const Dims& dims() const { return dims_; }
    const Spacing& spacing() const { return spacing_; }

    /// Channel of one foreground class; background has no channel.
    const ProbabilityVolume& channel(Label l) const { return channels_.at(slot(l)); }
    ProbabilityVolume& channel(Label l) { return channels_.at(slot(l)); }

    bool operator==(const SoftLabelVolume&) const = default;

private:
    static std::size_t slot(Label l);

    Dims dims_;
    Spacing spacing_;
    std::array<ProbabilityVolume, 4> channels_;
};

/// Patch extent in voxels plus a profile name.
struct PatchSpec {
    std::size_t px = 1;
    std::size_t py = 1;
    std::size_t pz = 1;
    std::string name = "custom";

    void validate() const;

    /// Slab-like profile with the full axial field of view: 192x208x64.
    static PatchSpec patch5();
    /// Pencil-like profile; the z depth of 144 is fixed, the axial extent is caller-chosen.
    static PatchSpec patch1(std::size_t px, std::size_t py);
    static PatchSpec full(const Dims& d);
};

struct Origin3 {
    std::ptrdiff_t x = 0;
    std::ptrdiff_t y = 0;
    std::ptrdiff_t z = 0;
};

/// Creates a volume with every voxel equal to fill. Throws DimensionError on
/// zero/overflowing dims and ValueError on a non-finite fill.
ScalarVolume new_scalar_volume(Dims dims, Spacing spacing, double fill,
                               Channel channel = Channel::magnitude);

template <class T>
Grid<T> extract_patch(const Grid<T>& vol, Origin3 origin, const PatchSpec& spec, T pad_value) {
    spec.validate();
    Grid<T> out(Dims{spec.px, spec.py, spec.pz}, vol.spacing(), pad_value);
    for (std::size_t z = 0; z < spec.pz; ++z) {
        const std::ptrdiff_t sz = origin.z + static_cast<std::ptrdiff_t>(z);
        for (std::size_t y = 0; y < spec.py; ++y) {
            const std::ptrdiff_t sy = origin.y + static_cast<std::ptrdiff_t>(y);
            for (std::size_t x = 0; x < spec.px; ++x) {
                const std::ptrdiff_t sx = origin.x + static_cast<std::ptrdiff_t>(x);
                if (vol.contains(sx, sy, sz))
                    out(x, y, z) = vol(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy),
                                       static_cast<std::size_t>(sz));
            }
        }
    }
    return out;
}

ScalarVolume extract_patch(const ScalarVolume& vol, Origin3 origin, const PatchSpec& spec,
                           double pad_value = 0.0);
/// Label patches are always padded with background.
LabelVolume extract_patch(const LabelVolume& vol, Origin3 origin, const PatchSpec& spec);

template <class T>
Plane<T> axial_slice(const Grid<T>& vol, std::size_t z) {
    if (z >= vol.dims().nz)
        throw IndexError("axial slice " + std::to_string(z) + " out of range [0," +
                         std::to_string(vol.dims().nz) + ")");
    auto src = vol.slice_values(z);
    return Plane<T>(vol.dims().nx, vol.dims().ny, std::vector<T>(src.begin(), src.end()));
}

template <class T>
void set_axial_slice(Grid<T>& vol, std::size_t z, const Plane<T>& plane) {
    if (z >= vol.dims().nz)
        throw IndexError("axial slice " + std::to_string(z) + " out of range [0," +
                         std::to_string(vol.dims().nz) + ")");
    if (plane.nx() != vol.dims().nx || plane.ny() != vol.dims().ny)
        throw DimensionError("plane shape does not match volume slice shape");
    auto dst = vol.slice_values(z);
    std::copy(plane.values().begin(), plane.values().end(), dst.begin());
}

Plane<std::uint8_t> axial_slice(const LabelVolume& vol, std::size_t z);
void set_axial_slice(LabelVolume& vol, std::size_t z, const Plane<std::uint8_t>& plane);

}  // namespace cordpipe
