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

#include "cordpipe/volume.hpp"

namespace cordpipe::preprocess {

inline constexpr std::size_t kOtsuBins = 256;

struct OtsuResult {
    /// Upper edge of the last background bin. Voxels in higher bins are foreground.
    double threshold = 0.0;
    /// Index of the last background bin.
    std::size_t threshold_bin = 0;
    MaskVolume mask;
    std::array<std::uint64_t, kOtsuBins> histogram{};
    double min_value = 0.0;
    double max_value = 0.0;
};

/// Histogram bin of v under 256 uniform bins over [lo, hi].
std::size_t otsu_bin(double v, double lo, double hi);

/// Index k maximising between-class variance between bins [0, k] and
/// [k+1, 255]. Ties within a relative 1e-12 resolve to the smallest k.
/// Throws DegenerateError when fewer than two bins are populated.
std::size_t otsu_threshold_bin(const std::array<std::uint64_t, kOtsuBins>& histogram);

/// Coarse foreground mask of a magnitude image. Throws DegenerateError on a constant volume.
OtsuResult otsu_mask(const ScalarVolume& magnitude);

/// Voxels where mask == 0 become `fill`. Throws DimensionError on a dims mismatch.
ScalarVolume apply_mask(const ScalarVolume& vol, const MaskVolume& mask, double fill = 0.0);

struct ClaheConfig {
    std::size_t tiles_x = 8;
    std::size_t tiles_y = 8;
    /// Per-bin cap as a fraction of the tile pixel count.
    double clip_limit = 0.01;
    std::size_t bins = 256;

    void validate() const;
};

/// CLAHE bin of an intensity in [0, 1].
std::size_t clahe_bin(double v, std::size_t bins);

/// Effective per-bin cap, as a fraction of the tile pixel count:
/// max(clip_limit, 1 / bins), so the clipped mass always fits back under the cap.
double clahe_bin_cap(double clip_limit, std::size_t bins);

/// Normalised tile histogram (sums to 1) after clipping at the cap and
/// redistributing the excess uniformly over bins still below the cap.
std::vector<double> clahe_clipped_histogram(std::span<const double> tile_values, double clip_limit,
                                            std::size_t bins);

/// Tile-wise clipped histogram equalisation of every axial slice, with
/// bilinear blending between tile mappings. Input must be in [0, 1].
ScalarVolume clahe_slicewise(const ScalarVolume& vol, const ClaheConfig& cfg = {});

struct StretchConfig {
    double p_low = 15.0;
    double p_high = 70.0;

    void validate() const;
};

/// Linear-interpolated percentile of an unsorted sample (p in [0, 100]).
double percentile(std::vector<double> values, double p);

struct StretchResult {
    ScalarVolume volume;
    double q_low = 0.0;
    double q_high = 0.0;
};

/// v -> clamp((v - q_low) / (q_high - q_low), 0, 1). With a mask, the
/// percentiles come from masked-in voxels only; the map is applied everywhere.
StretchResult percentile_stretch_detail(const ScalarVolume& vol, const StretchConfig& cfg = {},
                                        const MaskVolume* mask = nullptr);
ScalarVolume percentile_stretch(const ScalarVolume& vol, const StretchConfig& cfg = {},
                                const MaskVolume* mask = nullptr);

/// Zero mean, unit population std over the mask scope (or the whole volume).
ScalarVolume zscore_normalize(const ScalarVolume& vol, const MaskVolume* mask = nullptr);

/// Affine rescale to [0, 1]; a constant volume maps to 0.
ScalarVolume minmax_normalize(const ScalarVolume& vol);

}  // namespace cordpipe::preprocess
