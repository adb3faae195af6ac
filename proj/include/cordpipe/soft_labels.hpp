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
#include <string>
#include <string_view>

#include "cordpipe/volume.hpp"

namespace cordpipe::soft {

struct ClassSoftening {
    double weight = 1.0;    ///< soft target inside the margin, in (0, 1]
    std::size_t kernel = 3; ///< odd square structuring element size, >= 3
};

/// Which side of the boundary receives the soft weight.
enum class MarginSide {
    /// Only margin voxels inside the class mask (default).
    inner,
    /// Also margin voxels outside the mask that are background.
    symmetric,
};

struct SoftProfile {
    std::string name = "custom";
    /// Indexed by foreground class id - 1.
    std::array<ClassSoftening, 4> classes{};
    MarginSide side = MarginSide::inner;

    const ClassSoftening& of(Label l) const;
    ClassSoftening& of(Label l);
    void validate() const;

    static SoftProfile soft1();
    static SoftProfile soft2();
    static SoftProfile soft3();
    /// soft1 | soft2 | soft3 (case-insensitive); ConfigError otherwise.
    static SoftProfile by_name(std::string_view name);
};

using BinaryPlane = Plane<std::uint8_t>;

BinaryPlane dilate(const BinaryPlane& mask, std::size_t k);
/// Zero padding outside the plane, so foreground touching the border erodes.
BinaryPlane erode(const BinaryPlane& mask, std::size_t k);

/// dilate(mask, k) - erode(mask, k). Throws ValueError unless k is odd and >= 3.
BinaryPlane boundary_margin(const BinaryPlane& mask, std::size_t k);

/// Soft targets for each foreground class of one label plane, in class order.
std::array<Plane<double>, 4> soften_plane(const Plane<std::uint8_t>& labels, const SoftProfile& profile);

/// Slice-wise softening of a label volume.
SoftLabelVolume soften(const LabelVolume& labels, const SoftProfile& profile);

/// Per voxel, the class with the highest target among those >= threshold,
/// ties broken lesion_gm > lesion_wm > healthy_gm > healthy_wm; background otherwise.
LabelVolume harden(const SoftLabelVolume& soft, double threshold = 0.5);

}  // namespace cordpipe::soft
