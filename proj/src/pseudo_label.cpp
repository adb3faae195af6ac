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

#include "cordpipe/pseudo_label.hpp"

#include <algorithm>
#include <cmath>

#include "cordpipe/metrics.hpp"
#include "cordpipe/parallel.hpp"

namespace cordpipe::pseudo {
namespace {

void check_output(const RegionPlanes& out, std::size_t nx, std::size_t ny) {
    if (out.wm.nx() != nx || out.wm.ny() != ny)
        throw DimensionError("predictor returned " + std::to_string(out.wm.nx()) + "x" + std::to_string(out.wm.ny()) +
                             " planes for a " + std::to_string(nx) + "x" + std::to_string(ny) + " input");
    out.validate();
}

RegionPlanes unflip(const RegionPlanes& p, Flip f) {
    // Every flip is its own inverse.
    return {apply_flip(p.wm, f), apply_flip(p.gm, f), apply_flip(p.lesion, f)};
}

Plane<double> mean_planes(const std::vector<const Plane<double>*>& planes) {
    const std::size_t n = planes.front()->size();
    Plane<double> out(planes.front()->nx(), planes.front()->ny());
    std::vector<double> buf(planes.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < planes.size(); ++k) buf[k] = planes[k]->values()[i];
        out.values()[i] = stable_mean(buf);
    }
    return out;
}

ProbabilityVolume mean_volumes(const std::vector<const ProbabilityVolume*>& vols) {
    ProbabilityVolume out(vols.front()->dims(), vols.front()->spacing(), 0.0);
    std::vector<double> buf(vols.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t k = 0; k < vols.size(); ++k) buf[k] = (*vols[k])[i];
        out[i] = stable_mean(buf);
    }
    return out;
}

}  // namespace

MockPredictor::MockPredictor(Config cfg) : cfg_(cfg) {
    if (!(cfg_.magnitude_sigma > 0.0) || (cfg_.use_phase && !(cfg_.phase_sigma > 0.0)))
        throw ConfigError("mock predictor sigmas must be positive");
}

RegionPlanes MockPredictor::predict(const Plane<double>& magnitude, const Plane<double>* phase) const {
    const bool with_phase = cfg_.use_phase && phase != nullptr;
    if (with_phase && !phase->same_shape(magnitude)) throw DimensionError("magnitude and phase planes differ in shape");
    const std::size_t nx = magnitude.nx(), ny = magnitude.ny();
    RegionPlanes out{Plane<double>(nx, ny), Plane<double>(nx, ny), Plane<double>(nx, ny)};
    std::array<double, kLabelCount> logit{};
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
        const double m = magnitude.values()[i];
        double top = -INFINITY;
        for (std::size_t c = 0; c < kLabelCount; ++c) {
            const double dm = (m - cfg_.centres[c].magnitude) / cfg_.magnitude_sigma;
            logit[c] = -0.5 * dm * dm;
            if (with_phase) {
                const double dp = (phase->values()[i] - cfg_.centres[c].phase) / cfg_.phase_sigma;
                logit[c] -= 0.5 * dp * dp;
            }
            top = std::max(top, logit[c]);
        }
        std::array<double, kLabelCount> p{};
        double z = 0.0;
        for (std::size_t c = 0; c < kLabelCount; ++c) z += p[c] = std::exp(logit[c] - top);
        for (auto& v : p) v /= z;
        out.wm.values()[i] = std::min(1.0, p[1] + p[3]);
        out.gm.values()[i] = std::min(1.0, p[2] + p[4]);
        out.lesion.values()[i] = std::min(1.0, p[3] + p[4]);
    }
    return out;
}

std::string_view flip_name(Flip f) {
    switch (f) {
        case Flip::identity: return "identity";
        case Flip::flip_x: return "flip-x";
        case Flip::flip_y: return "flip-y";
        case Flip::flip_xy: return "flip-xy";
    }
    return "identity";
}

Flip parse_flip(std::string_view s) {
    for (Flip f : {Flip::identity, Flip::flip_x, Flip::flip_y, Flip::flip_xy})
        if (s == flip_name(f)) return f;
    throw ConfigError("unknown TTA transform '" + std::string(s) + "'");
}

void TtaConfig::validate() const {
    if (std::find(transforms.begin(), transforms.end(), Flip::identity) == transforms.end())
        throw ConfigError("TTA transform set must include identity");
    auto sorted = transforms;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("TTA transforms must be unique");
}

double stable_mean(std::span<double> values) {
    if (values.empty()) throw ValueError("mean of an empty list");
    std::sort(values.begin(), values.end());
    double m = values[0];
    for (std::size_t k = 1; k < values.size(); ++k) m += (values[k] - m) / static_cast<double>(k + 1);
    return m;
}

RegionPlanes predict_with_tta(const SlicePredictor& predictor, const Plane<double>& magnitude,
                              const Plane<double>* phase, const TtaConfig& cfg) {
    cfg.validate();
    std::vector<RegionPlanes> outs;
    outs.reserve(cfg.transforms.size());
    for (Flip f : cfg.transforms) {
        const Plane<double> m = apply_flip(magnitude, f);
        std::optional<Plane<double>> p;
        if (phase) p = apply_flip(*phase, f);
        RegionPlanes r = predictor.predict(m, p ? &*p : nullptr);
        check_output(r, magnitude.nx(), magnitude.ny());
        outs.push_back(unflip(r, f));
    }
    if (outs.size() == 1) return std::move(outs.front());
    return ensemble(outs);
}

RegionPlanes ensemble(const std::vector<RegionPlanes>& members) {
    if (members.empty()) throw ValueError("ensemble of zero members");
    std::vector<const Plane<double>*> wm, gm, lesion;
    for (const auto& m : members) {
        m.validate();
        if (!m.wm.same_shape(members.front().wm)) throw DimensionError("ensemble members differ in shape");
        wm.push_back(&m.wm);
        gm.push_back(&m.gm);
        lesion.push_back(&m.lesion);
    }
    return {mean_planes(wm), mean_planes(gm), mean_planes(lesion)};
}

RegionStack ensemble(const std::vector<RegionStack>& members) {
    if (members.empty()) throw ValueError("ensemble of zero members");
    std::vector<const ProbabilityVolume*> wm, gm, lesion;
    for (const auto& m : members) {
        m.validate();
        if (!(m.dims() == members.front().dims())) throw DimensionError("ensemble members differ in dims");
        wm.push_back(&m.wm);
        gm.push_back(&m.gm);
        lesion.push_back(&m.lesion);
    }
    return {mean_volumes(wm), mean_volumes(gm), mean_volumes(lesion)};
}

RegionStack stack_slices(const std::vector<std::pair<std::size_t, RegionPlanes>>& slices, std::size_t nz,
                         const Spacing& spacing) {
    if (nz == 0 || slices.empty()) throw DimensionError("stack needs at least one slice");
    const std::size_t nx = slices.front().second.wm.nx(), ny = slices.front().second.wm.ny();
    const Dims dims{nx, ny, nz};
    RegionStack out{ProbabilityVolume(dims, spacing, 0.0), ProbabilityVolume(dims, spacing, 0.0),
                    ProbabilityVolume(dims, spacing, 0.0)};
    std::vector<std::uint8_t> seen(nz, 0);
    for (const auto& [z, planes] : slices) {
        if (z >= nz) throw IndexError("slice index " + std::to_string(z) + " outside [0," + std::to_string(nz) + ")");
        if (seen[z]) throw IndexError("duplicate slice index " + std::to_string(z));
        seen[z] = 1;
        planes.validate();
        if (planes.wm.nx() != nx || planes.wm.ny() != ny) throw DimensionError("slice planes differ in shape");
        set_axial_slice(out.wm, z, planes.wm);
        set_axial_slice(out.gm, z, planes.gm);
        set_axial_slice(out.lesion, z, planes.lesion);
    }
    for (std::size_t z = 0; z < nz; ++z)
        if (!seen[z]) throw IndexError("missing slice index " + std::to_string(z));
    return out;
}

RegionStack predict_volume(const SlicePredictor& predictor, const ScalarVolume& magnitude, const ScalarVolume* phase,
                           const TtaConfig& cfg, std::size_t threads) {
    cfg.validate();
    if (phase && !(phase->dims() == magnitude.dims())) throw DimensionError("magnitude and phase dims differ");
    const std::size_t nz = magnitude.dims().nz;
    std::vector<std::pair<std::size_t, RegionPlanes>> slices(nz);
    if (threads == 0) threads = default_thread_count();
    if (!predictor.concurrent_safe()) threads = 1;
    parallel_for(
        nz,
        [&](std::size_t z) {
            const Plane<double> m = axial_slice(magnitude, z);
            std::optional<Plane<double>> p;
            if (phase) p = axial_slice(*phase, z);
            slices[z] = {z, predict_with_tta(predictor, m, p ? &*p : nullptr, cfg)};
        },
        threads);
    return stack_slices(slices, nz, magnitude.spacing());
}

RegionStack predict_volume_ensemble(const std::vector<const SlicePredictor*>& predictors,
                                    const ScalarVolume& magnitude, const ScalarVolume* phase, const TtaConfig& cfg,
                                    std::size_t threads) {
    if (predictors.empty()) throw ValueError("ensemble of zero predictors");
    std::vector<RegionStack> members;
    for (const SlicePredictor* p : predictors) members.push_back(predict_volume(*p, magnitude, phase, cfg, threads));
    if (members.size() == 1) return std::move(members.front());
    return ensemble(members);
}

JitterSummary jitter_score(const LabelVolume& labels) {
    if (labels.dims().nz < 2) throw DimensionError("jitter score needs at least two axial slices");
    JitterSummary s;
    for (std::size_t c = 0; c < 4; ++c) s.dscz[c] = metrics::inter_slice_dice(labels, kForegroundLabels[c]);
    return s;
}

}  // namespace cordpipe::pseudo
