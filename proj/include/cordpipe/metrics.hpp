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
#include <optional>
#include <string>
#include <vector>

#include "cordpipe/sparse_annotation.hpp"
#include "cordpipe/volume.hpp"

namespace cordpipe::metrics {

/// 2|G ∩ P| / (|G| + |P|); nullopt when both are empty.
std::optional<double> dice(const MaskVolume& gt, const MaskVolume& pred);

enum class Connectivity {
    /// 3D: a voxel is surface if any of its 6 face neighbours is background.
    face6,
    /// In-plane: only the 4 neighbours within the axial slice count.
    inplane4,
};

/// Foreground voxels with at least one background neighbour; the exterior
/// of the grid counts as background.
std::vector<Index3> surface_voxels(const MaskVolume& mask, Connectivity conn = Connectivity::face6);

/// For each surface voxel of `from`, the Euclidean distance (mm, voxel
/// centres) to the nearest surface voxel of `to`. Both surfaces must be non-empty.
std::vector<double> directed_surface_distances(const MaskVolume& from, const MaskVolume& to,
                                               const Spacing& spacing,
                                               Connectivity conn = Connectivity::face6);

/// Linear-interpolated percentile of an unsorted sample.
double percentile_linear(std::vector<double> values, double p);

/// max(h95(G, P), h95(P, G)) in mm. 0 when both are empty, nullopt when
/// exactly one is empty. Throws DimensionError on a dims mismatch.
std::optional<double> hd95(const MaskVolume& gt, const MaskVolume& pred, const Spacing& spacing,
                           Connectivity conn = Connectivity::face6);
std::optional<double> hd95(const MaskVolume& gt, const MaskVolume& pred);

/// Mean consecutive-slice Dice over the transitions where the mask is
/// present in at least one of the two slices; nullopt if there are none.
/// Throws DimensionError when nz < 2.
std::optional<double> inter_slice_dice(const MaskVolume& mask);
std::optional<double> inter_slice_dice(const LabelVolume& labels, Label cls);

struct ClassMetrics {
    Label cls = Label::healthy_wm;
    std::optional<double> dice;
    std::optional<double> hd95;
    std::optional<double> dscz;
    bool present_in_gt = false;
    bool present_in_pred = false;
    /// Sparse scope only: annotated slices where exactly one side had the class.
    std::size_t hd95_undefined_slices = 0;
};

struct MetricsReport {
    std::string volume_id;
    /// "dense" or "sparse".
    std::string scope = "dense";
    std::size_t scope_slices = 0;
    std::array<ClassMetrics, 4> classes{};
    std::optional<double> mean_dice;
    std::optional<double> mean_hd95;
    std::optional<double> mean_dscz;

    const ClassMetrics& of(Label l) const { return classes.at(static_cast<std::size_t>(l) - 1); }
};

/// Dense evaluation over the whole volume (3D surfaces).
MetricsReport evaluate(const LabelVolume& pred, const LabelVolume& gt, std::string volume_id = "");

/// Evaluation restricted to the annotated slices: Dice pools voxels over
/// those slices, HD95 is the mean of per-slice in-plane values. DSC_z
/// always uses the full dense prediction. Throws DegenerateError when no
/// slice is annotated.
MetricsReport evaluate(const LabelVolume& pred, const SparseAnnotation& gt, std::string volume_id = "");

struct AggregateRow {
    std::string cls;     ///< class name, or "mean"
    std::string metric;  ///< dice | hd95_mm | dscz
    std::size_t n = 0;   ///< defined values aggregated
    std::optional<double> mean;
    std::optional<double> std;  ///< population
    std::optional<double> cov;  ///< std / mean, for mean > 0

    std::optional<double> cov_percent() const {
        return cov ? std::optional<double>(*cov * 100.0) : std::nullopt;
    }
};

struct Summary {
    std::size_t n = 0;
    std::optional<double> mean;
    std::optional<double> std;
    std::optional<double> cov;
};

/// Mean, population std and CoV of the given values.
Summary summarize(const std::vector<double>& values);

/// Per class and metric across folds, plus the per-report means. Throws
/// ValueError on an empty list.
std::vector<AggregateRow> fold_aggregate(const std::vector<MetricsReport>& reports);

/// Frozen column order: volume_id,class,dice,hd95_mm,dscz,defined_flags.
/// Undefined values print as NA; defined_flags is three 0/1 characters for
/// dice, hd95 and dscz.
std::string report_csv_header();
std::string report_csv_rows(const MetricsReport& r);
std::string reports_csv(const std::vector<MetricsReport>& reports);
std::string reports_json(const std::vector<MetricsReport>& reports);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace cordpipe::metrics
