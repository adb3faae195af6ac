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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cordpipe/volume.hpp"

namespace cordpipe {

/// Manual labels on a subset of axial slices of one volume.
///
/// Invariants: `z_indices` strictly increasing, every index in [0, nz),
/// one plane per index, every plane nx*ny with ids in {0..4}.
struct SparseAnnotation {
    std::string volume_id;
    Dims dims;
    Spacing spacing;
    std::vector<std::size_t> z_indices;
    std::vector<Plane<std::uint8_t>> planes;

    std::size_t slice_count() const { return z_indices.size(); }
    void validate() const;
};

/// Dense labels reconstructed from a sparse annotation.
struct DenseAnnotation {
    LabelVolume labels;                ///< background on unannotated slices
    std::vector<std::uint8_t> annotated;  ///< one flag per axial slice
};

DenseAnnotation densify(const SparseAnnotation& ann);

/// Builds an annotation from selected slices of a dense label volume.
SparseAnnotation sparse_from_dense(const LabelVolume& labels, std::vector<std::size_t> z_indices,
                                   std::string volume_id);

/// Sidecar record as stored on disk:
///   { "volume_id": string, "z_indices": [int], "planes_nifti": path }
/// `planes_nifti` names a (nx, ny, K) uint8 NIfTI holding the planes in
/// index order; it is null when the index list is empty.
struct SidecarRecord {
    std::string volume_id;
    std::vector<std::int64_t> z_indices;
    std::string planes_nifti;
};

SidecarRecord parse_sidecar(std::string_view json_text);
std::string format_sidecar(const SidecarRecord& rec);

/// Validates a sidecar against the reference volume dims and attaches the
/// planes (a label volume of dims (nx, ny, K)). Duplicate, unordered, or
/// out-of-range indices raise IndexError.
SparseAnnotation read_sparse_annotation(std::string_view json_text, const Dims& ref_dims,
                                        const LabelVolume* planes, const Spacing& spacing = {});

/// Loads a sidecar; `planes_nifti` resolves relative to the sidecar's directory.
SparseAnnotation load_sparse_annotation(const std::filesystem::path& sidecar, const Dims& ref_dims,
                                        const Spacing& spacing = {});

/// Writes the sidecar JSON and its planes NIfTI (next to the sidecar, named
/// `planes_name`). Returns the sidecar text.
std::string write_sparse_annotation(const SparseAnnotation& ann, const std::filesystem::path& sidecar,
                                    const std::string& planes_name);

/// (nx, ny, K) planes volume; requires K >= 1.
LabelVolume planes_volume(const SparseAnnotation& ann);

}  // namespace cordpipe
