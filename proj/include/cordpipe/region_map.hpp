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

#include "cordpipe/volume.hpp"

namespace cordpipe::regions {

/// Overlapping region probabilities: white matter (healthy ∪ lesion WM),
/// gray matter (healthy ∪ lesion GM) and all lesions. Values in [0, 1].
struct RegionStack {
    ProbabilityVolume wm;
    ProbabilityVolume gm;
    ProbabilityVolume lesion;

    const Dims& dims() const { return wm.dims(); }
    /// Throws DimensionError on unequal dims and ValueError on values outside [0, 1].
    void validate() const;
};

/// One axial plane of a RegionStack.
struct RegionPlanes {
    Plane<double> wm;
    Plane<double> gm;
    Plane<double> lesion;

    void validate() const;
};

struct MergeThresholds {
    double tissue = 0.5;
    double lesion = 0.5;

    void validate() const;
};

RegionStack to_regions(const LabelVolume& labels);
RegionPlanes to_regions(const Plane<std::uint8_t>& labels);

/// Voxel rule: background when max(wm, gm) < tissue threshold, else the
/// larger of wm/gm (ties go to GM); the lesioned variant when
/// lesion >= lesion threshold. Lesion evidence on background is dropped.
Label merge_voxel(double wm, double gm, double lesion, const MergeThresholds& t = {});

LabelVolume merge_regions(const RegionStack& stack, const MergeThresholds& t = {});
Plane<std::uint8_t> merge_regions(const RegionPlanes& planes, const MergeThresholds& t = {});

}  // namespace cordpipe::regions
