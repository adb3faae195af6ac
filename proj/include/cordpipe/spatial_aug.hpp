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

namespace cordpipe::augment {

/// Sampling ranges of one in-plane augmentation profile.
///
/// Translation is the maximum shift as a fraction of the plane extent per
/// axis. Perspective p bounds the two projective coefficients so that
/// |a| + |b| <= p in half-extent normalised coordinates, which keeps the
/// homogeneous weight positive over the plane.
struct AugProfile {
    std::string name = "none";
    double translation_frac = 0.0;
    double rotation_deg = 0.0;
    double scale_lo = 1.0;
    double scale_hi = 1.0;
    double shear_lo_deg = 0.0;
    double shear_hi_deg = 0.0;
    double perspective = 0.0;
    /// Chance that each individual component is applied.
    double apply_probability = 1.0;

    bool is_identity() const;
    void validate() const;

    static AugProfile none();
    static AugProfile aug1();
    static AugProfile aug2();
    static AugProfile aug3();
    /// none | aug1 | aug2 | aug3 (case-insensitive); ConfigError otherwise.
    static AugProfile by_name(std::string_view name);
};

/// Row-major 3x3 homography acting on (x, y, 1) pixel-centre coordinates.
using Matrix3 = std::array<double, 9>;

Matrix3 identity_matrix();
Matrix3 multiply(const Matrix3& a, const Matrix3& b);
double determinant(const Matrix3& m);
/// Throws TransformError when |det| <= 1e-9.
Matrix3 invert(const Matrix3& m);

struct TransformParams {
    double tx = 0.0;  ///< pixels
    double ty = 0.0;
    double rotation_deg = 0.0;
    double scale = 1.0;
    double shear_deg = 0.0;
    double persp_a = 0.0;  ///< normalised projective coefficients
    double persp_b = 0.0;
};

struct SampledTransform {
    Matrix3 matrix = identity_matrix();  ///< forward map, input -> output
    TransformParams params;
    std::uint64_t seed = 0;
    std::size_t nx = 0;
    std::size_t ny = 0;
};

/// Forward map translate ∘ rotate ∘ scale ∘ shear ∘ perspective about the plane centre.
SampledTransform make_transform(const TransformParams& p, std::size_t nx, std::size_t ny);

/// Draws every parameter uniformly within the profile ranges. Fully determined by (profile, seed, nx, ny).
SampledTransform sample_transform(const AugProfile& profile, std::uint64_t seed, std::size_t nx, std::size_t ny);

/// Per-slice seed for slice-parallel augmentation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t z);

/// Inverse-mapped bilinear resample; samples outside the plane read `fill`.
Plane<double> warp_image(const Plane<double>& plane, const SampledTransform& t, double fill = 0.0);

/// Inverse-mapped nearest-neighbour resample. Output ids are input ids or `fill`.
Plane<std::uint8_t> warp_labels(const Plane<std::uint8_t>& plane, const SampledTransform& t,
                                Label fill = Label::background);

struct WarpedPair {
    Plane<double> magnitude;
    Plane<double> phase;
    Plane<std::uint8_t> labels;
};

/// One transform shared by both image channels and the labels.
WarpedPair warp_pair(const Plane<double>& magnitude, const Plane<double>& phase,
                     const Plane<std::uint8_t>& labels, const SampledTransform& t);

}  // namespace cordpipe::augment
