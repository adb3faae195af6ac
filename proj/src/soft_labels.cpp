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

#include "cordpipe/soft_labels.hpp"

#include <algorithm>
#include <cctype>

#include "cordpipe/parallel.hpp"

namespace cordpipe::soft {
namespace {

void check_kernel(std::size_t k) {
    if (k < 3 || k % 2 == 0) throw ValueError("structuring element size must be odd and >= 3, got " + std::to_string(k));
}

// Separable square max/min filter. Out-of-plane samples read `pad`.
BinaryPlane square_filter(const BinaryPlane& in, std::size_t k, bool take_max, std::uint8_t pad) {
    const auto r = static_cast<std::ptrdiff_t>(k / 2);
    const auto nx = static_cast<std::ptrdiff_t>(in.nx()), ny = static_cast<std::ptrdiff_t>(in.ny());
    auto pass = [&](const BinaryPlane& src, bool along_x) {
        BinaryPlane dst(in.nx(), in.ny());
        for (std::ptrdiff_t y = 0; y < ny; ++y)
            for (std::ptrdiff_t x = 0; x < nx; ++x) {
                std::uint8_t acc = take_max ? 0 : 1;
                for (std::ptrdiff_t d = -r; d <= r; ++d) {
                    const std::ptrdiff_t sx = along_x ? x + d : x, sy = along_x ? y : y + d;
                    const std::uint8_t v = (sx < 0 || sy < 0 || sx >= nx || sy >= ny)
                                               ? pad
                                               : src(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
                    acc = take_max ? std::max(acc, v) : std::min(acc, v);
                }
                dst(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
            }
        return dst;
    };
    return pass(pass(in, true), false);
}

BinaryPlane as_binary(const BinaryPlane& mask) {
    BinaryPlane b(mask.nx(), mask.ny());
    for (std::size_t i = 0; i < mask.size(); ++i) b.values()[i] = mask.values()[i] != 0 ? 1 : 0;
    return b;
}

constexpr std::array<Label, 4> kHardenPriority = {Label::lesion_gm, Label::lesion_wm, Label::healthy_gm,
                                                  Label::healthy_wm};

}  // namespace

const ClassSoftening& SoftProfile::of(Label l) const {
    if (l == Label::background) throw ValueError("background has no softening parameters");
    return classes[static_cast<std::size_t>(l) - 1];
}

ClassSoftening& SoftProfile::of(Label l) {
    if (l == Label::background) throw ValueError("background has no softening parameters");
    return classes[static_cast<std::size_t>(l) - 1];
}

void SoftProfile::validate() const {
    for (const auto& c : classes) {
        if (!(c.weight > 0.0 && c.weight <= 1.0)) throw ConfigError("soft weight must be in (0, 1]");
        if (c.kernel < 3 || c.kernel % 2 == 0) throw ConfigError("soft kernel size must be odd and >= 3");
    }
}

// Weights and kernels per class: healthy WM, healthy GM, lesion WM, lesion GM.
SoftProfile SoftProfile::soft1() { return {"soft1", {{{0.9, 7}, {0.9, 3}, {0.6, 5}, {0.4, 7}}}, MarginSide::inner}; }
SoftProfile SoftProfile::soft2() { return {"soft2", {{{0.9, 7}, {0.9, 3}, {0.6, 3}, {0.4, 3}}}, MarginSide::inner}; }
SoftProfile SoftProfile::soft3() { return {"soft3", {{{0.7, 5}, {0.6, 3}, {0.2, 3}, {0.2, 3}}}, MarginSide::inner}; }

SoftProfile SoftProfile::by_name(std::string_view name) {
    std::string n(name);
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
    if (n == "soft1") return soft1();
    if (n == "soft2") return soft2();
    if (n == "soft3") return soft3();
    throw ConfigError("unknown soft-label profile '" + std::string(name) + "'");
}

BinaryPlane dilate(const BinaryPlane& mask, std::size_t k) {
    check_kernel(k);
    return square_filter(as_binary(mask), k, true, 0);
}

BinaryPlane erode(const BinaryPlane& mask, std::size_t k) {
    check_kernel(k);
    return square_filter(as_binary(mask), k, false, 0);
}

BinaryPlane boundary_margin(const BinaryPlane& mask, std::size_t k) {
    const BinaryPlane d = dilate(mask, k);
    const BinaryPlane e = erode(mask, k);
    BinaryPlane m(mask.nx(), mask.ny());
    for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = d.values()[i] & static_cast<std::uint8_t>(1 - e.values()[i]);
    return m;
}

std::array<Plane<double>, 4> soften_plane(const Plane<std::uint8_t>& labels, const SoftProfile& profile) {
    profile.validate();
    validate_label_ids(labels.values());
    std::array<Plane<double>, 4> out;
    for (std::size_t c = 0; c < 4; ++c) {
        const auto cls = static_cast<std::uint8_t>(c + 1);
        const ClassSoftening& p = profile.classes[c];
        BinaryPlane mask(labels.nx(), labels.ny());
        bool any = false;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            mask.values()[i] = labels.values()[i] == cls;
            any = any || mask.values()[i];
        }
        Plane<double> target(labels.nx(), labels.ny(), 0.0);
        if (any) {
            const BinaryPlane margin = boundary_margin(mask, p.kernel);
            for (std::size_t i = 0; i < mask.size(); ++i) {
                const bool in_mask = mask.values()[i] != 0;
                const bool in_margin = margin.values()[i] != 0;
                if (in_mask)
                    target.values()[i] = in_margin ? p.weight : 1.0;
                else if (in_margin && profile.side == MarginSide::symmetric &&
                         labels.values()[i] == static_cast<std::uint8_t>(Label::background))
                    target.values()[i] = p.weight;
            }
        }
        out[c] = std::move(target);
    }
    return out;
}

SoftLabelVolume soften(const LabelVolume& labels, const SoftProfile& profile) {
    profile.validate();
    const Dims& d = labels.dims();
    SoftLabelVolume out(d, labels.spacing());
    parallel_for(d.nz, [&](std::size_t z) {
        const auto planes = soften_plane(axial_slice(labels, z), profile);
        for (std::size_t c = 0; c < 4; ++c) {
            auto dst = out.channel(kForegroundLabels[c]).slice_values(z);
            std::copy(planes[c].values().begin(), planes[c].values().end(), dst.begin());
        }
    });
    return out;
}

LabelVolume harden(const SoftLabelVolume& soft, double threshold) {
    const Dims& d = soft.dims();
    std::vector<std::uint8_t> ids(d.voxels(), 0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        double best = -1.0;
        Label winner = Label::background;
        for (Label l : kHardenPriority) {
            const double v = soft.channel(l)[i];
            if (v >= threshold && v > best) {
                best = v;
                winner = l;
            }
        }
        ids[i] = static_cast<std::uint8_t>(winner);
    }
    return LabelVolume(d, soft.spacing(), std::move(ids));
}

}  // namespace cordpipe::soft
