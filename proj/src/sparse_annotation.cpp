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

#include "cordpipe/sparse_annotation.hpp"

#include <nlohmann/json.hpp>

#include "cordpipe/nifti.hpp"

namespace cordpipe {

using nlohmann::json;

void SparseAnnotation::validate() const {
    if (planes.size() != z_indices.size())
        throw DimensionError("annotation has " + std::to_string(z_indices.size()) + " indices but " +
                             std::to_string(planes.size()) + " planes");
    for (std::size_t i = 0; i < z_indices.size(); ++i) {
        if (z_indices[i] >= dims.nz)
            throw IndexError("annotated slice " + std::to_string(z_indices[i]) + " out of range [0," +
                             std::to_string(dims.nz) + ")");
        if (i > 0 && z_indices[i] <= z_indices[i - 1])
            throw IndexError("annotated slice indices must be strictly increasing and unique (index " +
                             std::to_string(z_indices[i]) + ")");
        if (planes[i].nx() != dims.nx || planes[i].ny() != dims.ny)
            throw DimensionError("annotation plane shape does not match volume slice shape");
        validate_label_ids(planes[i].values());
    }
}

DenseAnnotation densify(const SparseAnnotation& ann) {
    ann.validate();
    DenseAnnotation out{LabelVolume(ann.dims, ann.spacing), std::vector<std::uint8_t>(ann.dims.nz, 0)};
    for (std::size_t i = 0; i < ann.z_indices.size(); ++i) {
        set_axial_slice(out.labels, ann.z_indices[i], ann.planes[i]);
        out.annotated[ann.z_indices[i]] = 1;
    }
    return out;
}

SparseAnnotation sparse_from_dense(const LabelVolume& labels, std::vector<std::size_t> z_indices,
                                   std::string volume_id) {
    SparseAnnotation ann{std::move(volume_id), labels.dims(), labels.spacing(), std::move(z_indices), {}};
    for (std::size_t z : ann.z_indices) {
        if (z >= labels.dims().nz) throw IndexError("slice " + std::to_string(z) + " out of range");
        ann.planes.push_back(axial_slice(labels, z));
    }
    ann.validate();
    return ann;
}

SidecarRecord parse_sidecar(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("sidecar is not valid JSON: ") + e.what());
    }
    SidecarRecord rec;
    try {
        rec.volume_id = j.at("volume_id").get<std::string>();
        for (const auto& v : j.at("z_indices")) {
            if (!v.is_number_integer()) throw FormatError("z_indices entries must be integers");
            rec.z_indices.push_back(v.get<std::int64_t>());
        }
        const auto& p = j.at("planes_nifti");
        if (!p.is_null()) rec.planes_nifti = p.get<std::string>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed sidecar: ") + e.what());
    }
    return rec;
}

std::string format_sidecar(const SidecarRecord& rec) {
    json j;
    j["volume_id"] = rec.volume_id;
    j["z_indices"] = rec.z_indices;
    j["planes_nifti"] = rec.planes_nifti.empty() ? json(nullptr) : json(rec.planes_nifti);
    return j.dump(2) + "\n";
}

SparseAnnotation read_sparse_annotation(std::string_view json_text, const Dims& ref_dims,
                                        const LabelVolume* planes, const Spacing& spacing) {
    const SidecarRecord rec = parse_sidecar(json_text);
    SparseAnnotation ann{rec.volume_id, ref_dims, spacing, {}, {}};
    for (std::size_t i = 0; i < rec.z_indices.size(); ++i) {
        const std::int64_t z = rec.z_indices[i];
        if (z < 0 || static_cast<std::size_t>(z) >= ref_dims.nz)
            throw IndexError("annotated slice " + std::to_string(z) + " out of range [0," +
                             std::to_string(ref_dims.nz) + ")");
        ann.z_indices.push_back(static_cast<std::size_t>(z));
    }
    for (std::size_t i = 1; i < ann.z_indices.size(); ++i)
        if (ann.z_indices[i] <= ann.z_indices[i - 1])
            throw IndexError("duplicate or unordered annotated slice " + std::to_string(ann.z_indices[i]));
    if (!ann.z_indices.empty()) {
        if (planes == nullptr) throw FormatError("sidecar lists slices but no planes image was supplied");
        const Dims& pd = planes->dims();
        if (pd.nx != ref_dims.nx || pd.ny != ref_dims.ny || pd.nz != ann.z_indices.size())
            throw DimensionError("planes image " + to_string(pd) + " does not match " +
                                 std::to_string(ref_dims.nx) + "x" + std::to_string(ref_dims.ny) + "x" +
                                 std::to_string(ann.z_indices.size()));
        for (std::size_t k = 0; k < ann.z_indices.size(); ++k) ann.planes.push_back(axial_slice(*planes, k));
    }
    ann.validate();
    return ann;
}

SparseAnnotation load_sparse_annotation(const std::filesystem::path& sidecar, const Dims& ref_dims,
                                        const Spacing& spacing) {
    const auto bytes = nifti::read_file(sidecar);
    const std::string text(bytes.begin(), bytes.end());
    const SidecarRecord rec = parse_sidecar(text);
    if (rec.planes_nifti.empty()) return read_sparse_annotation(text, ref_dims, nullptr, spacing);
    std::filesystem::path planes_path = rec.planes_nifti;
    if (planes_path.is_relative()) planes_path = sidecar.parent_path() / planes_path;
    const LabelVolume planes = nifti::load_labels(planes_path);
    return read_sparse_annotation(text, ref_dims, &planes, spacing);
}

LabelVolume planes_volume(const SparseAnnotation& ann) {
    if (ann.planes.empty()) throw DimensionError("annotation has no planes");
    LabelVolume out(Dims{ann.dims.nx, ann.dims.ny, ann.planes.size()}, ann.spacing);
    for (std::size_t k = 0; k < ann.planes.size(); ++k) set_axial_slice(out, k, ann.planes[k]);
    return out;
}

std::string write_sparse_annotation(const SparseAnnotation& ann, const std::filesystem::path& sidecar,
                                    const std::string& planes_name) {
    ann.validate();
    SidecarRecord rec{ann.volume_id, {}, {}};
    for (std::size_t z : ann.z_indices) rec.z_indices.push_back(static_cast<std::int64_t>(z));
    if (!ann.planes.empty()) {
        rec.planes_nifti = planes_name;
        nifti::save(sidecar.parent_path() / planes_name, planes_volume(ann));
    }
    const std::string text = format_sidecar(rec);
    nifti::write_file_atomic(sidecar, std::span<const std::uint8_t>(
                                          reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    return text;
}

}  // namespace cordpipe
