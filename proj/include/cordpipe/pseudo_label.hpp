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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cordpipe/region_map.hpp"
#include "cordpipe/volume.hpp"

namespace cordpipe::pseudo {

using regions::RegionPlanes;
using regions::RegionStack;

/// Seam for a trained 2D model: one axial slice in, three region probability planes out.
class SlicePredictor {
public:
    virtual ~SlicePredictor() = default;

    /// `phase` may be null for magnitude-only models. Output planes must match
    /// the input shape with probabilities in [0, 1].
    virtual RegionPlanes predict(const Plane<double>& magnitude, const Plane<double>* phase) const = 0;

    /// Whether predict() may be called from several threads at once.
    virtual bool concurrent_safe() const { return true; }
};

/// Intensity centre of one class in each channel.
struct ClassCentre {
    double magnitude = 0.0;
    double phase = 0.0;
};

/// Pixel-wise Gaussian classifier over class intensity centres. Because
/// every pixel is classified independently it commutes with flips exactly.
class MockPredictor final : public SlicePredictor {
public:
    struct Config {
        /// Indexed by label id 0..4.
        std::array<ClassCentre, kLabelCount> centres{};
        double magnitude_sigma = 0.05;
        double phase_sigma = 0.05;
        bool use_phase = false;
    };

    explicit MockPredictor(Config cfg);

    RegionPlanes predict(const Plane<double>& magnitude, const Plane<double>* phase) const override;
    const Config& config() const { return cfg_; }

private:
    Config cfg_;
};

enum class Flip { identity, flip_x, flip_y, flip_xy };

std::string_view flip_name(Flip f);
Flip parse_flip(std::string_view s);

template <class T>
Plane<T> apply_flip(const Plane<T>& p, Flip f) {
    if (f == Flip::identity) return p;
    Plane<T> out(p.nx(), p.ny());
    const bool fx = f == Flip::flip_x || f == Flip::flip_xy;
    const bool fy = f == Flip::flip_y || f == Flip::flip_xy;
    for (std::size_t y = 0; y < p.ny(); ++y)
        for (std::size_t x = 0; x < p.nx(); ++x)
            out(fx ? p.nx() - 1 - x : x, fy ? p.ny() - 1 - y : y) = p(x, y);
    return out;
}

struct TtaConfig {
    std::vector<Flip> transforms = {Flip::identity, Flip::flip_x, Flip::flip_y, Flip::flip_xy};

    static TtaConfig identity_only() { return {{Flip::identity}}; }
    /// Identity must be present and transforms unique.
    void validate() const;
};

/// Order-independent mean: values are sorted before a running-mean update,
/// so identical inputs return exactly that value and any permutation of the
/// inputs gives the same bits.
double stable_mean(std::span<double> values);

/// Predicts under every flip, undoes the flip on the outputs and averages.
RegionPlanes predict_with_tta(const SlicePredictor& predictor, const Plane<double>& magnitude,
                              const Plane<double>* phase, const TtaConfig& cfg = {});

RegionPlanes ensemble(const std::vector<RegionPlanes>& members);
RegionStack ensemble(const std::vector<RegionStack>& members);

/// Assembles per-slice predictions by z. Exactly one plane per z in [0, nz).
RegionStack stack_slices(const std::vector<std::pair<std::size_t, RegionPlanes>>& slices, std::size_t nz,
                         const Spacing& spacing = {});

/// Runs a predictor (with TTA) over every axial slice and stacks the
/// results. Slices run concurrently when the predictor allows it.
RegionStack predict_volume(const SlicePredictor& predictor, const ScalarVolume& magnitude,
                           const ScalarVolume* phase, const TtaConfig& cfg = {}, std::size_t threads = 0);

/// Ensemble over several predictors (e.g. fold models), each with TTA.
RegionStack predict_volume_ensemble(const std::vector<const SlicePredictor*>& predictors,
                                    const ScalarVolume& magnitude, const ScalarVolume* phase,
                                    const TtaConfig& cfg = {}, std::size_t threads = 0);

struct JitterSummary {
    std::array<std::optional<double>, 4> dscz{};  ///< foreground class order

    std::optional<double> of(Label l) const { return dscz.at(static_cast<std::size_t>(l) - 1); }
};

/// Per-class inter-slice Dice of a label volume. Throws DimensionError when nz < 2.
JitterSummary jitter_score(const LabelVolume& labels);

/// Runs an external command per slice. The command template may contain
/// {input} and {output}; the input is a (nx, ny, K) float32 NIfTI with
/// K = 1 (magnitude) or 2 (magnitude, phase); the command must write a
/// (nx, ny, 3) float32 NIfTI of wm, gm and lesion probabilities.
class SubprocessPredictor final : public SlicePredictor {
public:
    explicit SubprocessPredictor(std::string command_template,
                                 std::filesystem::path work_dir = std::filesystem::temp_directory_path());

    RegionPlanes predict(const Plane<double>& magnitude, const Plane<double>* phase) const override;

private:
    std::string command_;
    std::filesystem::path work_dir_;
};

/// File form of one slice prediction used by the predictor protocol and the
/// stack command: a (nx, ny, 3) float32 image.
std::vector<std::uint8_t> encode_region_planes(const RegionPlanes& planes, const Spacing& spacing = {});
RegionPlanes decode_region_planes(std::span<const std::uint8_t> bytes);
/// Input image of the predictor protocol.
std::vector<std::uint8_t> encode_slice_input(const Plane<double>& magnitude, const Plane<double>* phase,
                                             const Spacing& spacing = {});

struct SliceInput {
    Plane<double> magnitude;
    std::optional<Plane<double>> phase;
};
SliceInput decode_slice_input(std::span<const std::uint8_t> bytes);

}  // namespace cordpipe::pseudo
