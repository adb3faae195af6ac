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

#include "cordpipe/region_map.hpp"

#include <algorithm>

namespace cordpipe::regions {
namespace {

void check_unit(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!(x >= 0.0 && x <= 1.0)) throw ValueError(std::string(what) + " probability outside [0, 1]");
}

struct Membership {
    double wm, gm, lesion;
};

constexpr Membership membership(std::uint8_t id) {
    switch (static_cast<Label>(id)) {
        case Label::healthy_wm: return {1, 0, 0};
        case Label::healthy_gm: return {0, 1, 0};
        case Label::lesion_wm: return {1, 0, 1};
        case Label::lesion_gm: return {0, 1, 1};
        default: return {0, 0, 0};
    }
}

}  // namespace

void RegionStack::validate() const {
    if (!(wm.dims() == gm.dims()) || !(wm.dims() == lesion.dims()))
        throw DimensionError("region stack channels have unequal dims");
    check_unit(wm.values(), "wm");
    check_unit(gm.values(), "gm");
    check_unit(lesion.values(), "lesion");
}

void RegionPlanes::validate() const {
    if (!wm.same_shape(gm) || !wm.same_shape(lesion)) throw DimensionError("region planes have unequal shapes");
    check_unit(wm.values(), "wm");
    check_unit(gm.values(), "gm");
    check_unit(lesion.values(), "lesion");
}

void MergeThresholds::validate() const {
    if (!(tissue > 0.0 && tissue <= 1.0) || !(lesion > 0.0 && lesion <= 1.0))
        throw ConfigError("merge thresholds must be in (0, 1]");
}

RegionStack to_regions(const LabelVolume& labels) {
    RegionStack s{ProbabilityVolume(labels.dims(), labels.spacing(), 0.0),
                  ProbabilityVolume(labels.dims(), labels.spacing(), 0.0),
                  ProbabilityVolume(labels.dims(), labels.spacing(), 0.0)};
    auto ids = labels.values();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Membership m = membership(ids[i]);
        s.wm[i] = m.wm;
        s.gm[i] = m.gm;
        s.lesion[i] = m.lesion;
    }
    return s;
}

RegionPlanes to_regions(const Plane<std::uint8_t>& labels) {
    validate_label_ids(labels.values());
    RegionPlanes p{Plane<double>(labels.nx(), labels.ny()), Plane<double>(labels.nx(), labels.ny()),
                   Plane<double>(labels.nx(), labels.ny())};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Membership m = membership(labels.values()[i]);
        p.wm.values()[i] = m.wm;
        p.gm.values()[i] = m.gm;
        p.lesion.values()[i] = m.lesion;
    }
    return p;
}

Label merge_voxel(double wm, double gm, double lesion, const MergeThresholds& t) {
    if (std::max(wm, gm) < t.tissue) return Label::background;
    const bool is_gm = gm >= wm;
    const bool lesioned = lesion >= t.lesion;
    if (is_gm) return lesioned ? Label::lesion_gm : Label::healthy_gm;
    return lesioned ? Label::lesion_wm : Label::healthy_wm;
}

LabelVolume merge_regions(const RegionStack& stack, const MergeThresholds& t) {
    stack.validate();
    t.validate();
    std::vector<std::uint8_t> ids(stack.wm.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        ids[i] = static_cast<std::uint8_t>(merge_voxel(stack.wm[i], stack.gm[i], stack.lesion[i], t));
    return LabelVolume(stack.dims(), stack.wm.spacing(), std::move(ids));
}

Plane<std::uint8_t> merge_regions(const RegionPlanes& planes, const MergeThresholds& t) {
    planes.validate();
    t.validate();
    Plane<std::uint8_t> out(planes.wm.nx(), planes.wm.ny());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values()[i] = static_cast<std::uint8_t>(
            merge_voxel(planes.wm.values()[i], planes.gm.values()[i], planes.lesion.values()[i], t));
    return out;
}

}  // namespace cordpipe::regions
