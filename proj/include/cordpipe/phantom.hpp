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
#include <optional>

#include "cordpipe/pseudo_label.hpp"
#include "cordpipe/volume.hpp"

namespace cordpipe::phantom {

struct ClassIntensity {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Per-channel intensity of one tissue.
struct ChannelIntensity {
    ClassIntensity magnitude;
    ClassIntensity phase;
};

enum class LesionTarget { alternate, wm, gm };

struct PhantomConfig {
    Dims dims{64, 64, 64};
    Spacing spacing = Spacing::isotropic(kNativeSpacingMm);

    // Cord cross-section (ellipse) and its slow drift along z.
    double cord_radius_x = 18.0;
    double cord_radius_y = 14.0;
    double wobble_amplitude = 1.0;
    double wobble_period = 128.0;  ///< slices
    /// Background-labelled fluid ring around the cord, bright enough to pass the Otsu mask.
    double sheath_thickness = 3.0;

    // Butterfly: two mirrored, tilted ellipse lobes joined by a bridge.
    double lobe_offset = 6.0;
    double lobe_radius_x = 4.0;
    double lobe_radius_y = 8.0;
    double lobe_tilt_deg = 20.0;
    double bridge_half_height = 1.5;

    std::size_t lesion_count = 4;
    double lesion_radius_min = 3.0;
    double lesion_radius_max = 4.5;
    /// z semi-axis as a multiple of the in-plane radius.
    double lesion_z_elongation = 20.0;
    LesionTarget lesion_target = LesionTarget::alternate;

    /// Indexed by label id; the background entry is the volume outside the sheath.
    std::array<ChannelIntensity, kLabelCount> tissue{{
        {{0.02, 0.005}, {0.00, 0.01}},
        {{0.90, 0.015}, {0.30, 0.015}},
        {{0.56, 0.015}, {0.40, 0.015}},
        {{0.78, 0.015}, {0.80, 0.015}},
        {{0.67, 0.015}, {0.85, 0.015}},
    }};
    ChannelIntensity sheath{{0.45, 0.015}, {0.05, 0.015}};
    double noise_std = 0.01;

    std::uint64_t seed = 0;

    /// Throws GeometryError when the sheath leaves the slice or radii are not positive,
    /// ConfigError on other bad values.
    void validate() const;
};

struct Phantom {
    ScalarVolume magnitude;
    ScalarVolume phase;
    LabelVolume labels;
};

/// Deterministic per seed. Throws GeometryError when the butterfly leaves the cord.
Phantom generate(const PhantomConfig& cfg);

/// Shifts every axial slice by an independent integer offset in
/// [-max_shift, max_shift]^2, filling with background. Throws DimensionError when nz < 2.
LabelVolume perturb_slices(const LabelVolume& labels, std::size_t max_shift, std::uint64_t seed);

/// Mock classifier tuned to the phantom intensity model. With q_low < q_high
/// the centres are mapped through the same clamp-stretch the image went
/// through, and the masked-out background sits at 0.
pseudo::MockPredictor::Config mock_config(const PhantomConfig& cfg,
                                          std::optional<std::pair<double, double>> stretch = std::nullopt);

}  // namespace cordpipe::phantom
