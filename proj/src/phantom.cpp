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

#include "cordpipe/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "cordpipe/spatial_aug.hpp"

namespace cordpipe::phantom {
namespace {

struct Geometry {
    std::vector<double> cx, cy;  // cord centre per slice
};

bool in_ellipse(double dx, double dy, double rx, double ry) { return (dx * dx) / (rx * rx) + (dy * dy) / (ry * ry) <= 1.0; }

bool in_lobe(const PhantomConfig& c, double dx, double dy, double side) {
    const double t = side * c.lobe_tilt_deg * std::numbers::pi / 180.0;
    const double ux = dx - side * c.lobe_offset;
    const double rx = std::cos(t) * ux + std::sin(t) * dy;
    const double ry = -std::sin(t) * ux + std::cos(t) * dy;
    return in_ellipse(rx, ry, c.lobe_radius_x, c.lobe_radius_y);
}

bool in_butterfly(const PhantomConfig& c, double dx, double dy) {
    if (std::abs(dx) <= c.lobe_offset && std::abs(dy) <= c.bridge_half_height) return true;
    return in_lobe(c, dx, dy, 1.0) || in_lobe(c, dx, dy, -1.0);
}

void check_intensity(const ClassIntensity& ci, const char* what) {
    if (!std::isfinite(ci.mean) || !(ci.stddev >= 0.0) || !std::isfinite(ci.stddev))
        throw ConfigError(std::string("phantom intensity for ") + what + " must be finite with stddev >= 0");
}

}  // namespace

void PhantomConfig::validate() const {
    (void)dims.voxels();
    spacing.validate();
    for (double r : {cord_radius_x, cord_radius_y, lobe_radius_x, lobe_radius_y})
        if (!(r > 0.0)) throw GeometryError("phantom radii must be positive");
    if (!(lesion_radius_min > 0.0) || lesion_radius_max < lesion_radius_min)
        throw GeometryError("lesion radii must be positive with min <= max");
    if (!(lesion_z_elongation >= 1.0)) throw ConfigError("lesion z elongation must be >= 1");
    if (!(sheath_thickness >= 0.0) || !(wobble_amplitude >= 0.0) || !(wobble_period > 0.0) ||
        !(lobe_offset >= 0.0) || !(bridge_half_height >= 0.0))
        throw ConfigError("phantom shape parameters must be non-negative");
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        check_intensity(tissue[l].magnitude, "magnitude");
        check_intensity(tissue[l].phase, "phase");
    }
    check_intensity(sheath.magnitude, "sheath magnitude");
    check_intensity(sheath.phase, "sheath phase");
    const double hx = (static_cast<double>(dims.nx) - 1.0) / 2.0, hy = (static_cast<double>(dims.ny) - 1.0) / 2.0;
    if (cord_radius_x + sheath_thickness + wobble_amplitude > hx ||
        cord_radius_y + sheath_thickness + wobble_amplitude > hy)
        throw GeometryError("cord does not fit in the " + std::to_string(dims.nx) + "x" + std::to_string(dims.ny) +
                            " slice");
}

Phantom generate(const PhantomConfig& cfg) {
    cfg.validate();
    const Dims d = cfg.dims;
    const double hx = (static_cast<double>(d.nx) - 1.0) / 2.0, hy = (static_cast<double>(d.ny) - 1.0) / 2.0;

    std::mt19937_64 geo_rng(augment::derive_seed(cfg.seed, 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double phase_x = 2.0 * std::numbers::pi * unit(geo_rng);
    const double phase_y = 2.0 * std::numbers::pi * unit(geo_rng);
    Geometry g;
    g.cx.resize(d.nz);
    g.cy.resize(d.nz);
    for (std::size_t z = 0; z < d.nz; ++z) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(z) / cfg.wobble_period;
        g.cx[z] = hx + cfg.wobble_amplitude * std::sin(w + phase_x);
        g.cy[z] = hy + cfg.wobble_amplitude * std::sin(w + phase_y);
    }

    // Healthy anatomy. Coordinates relative to the cord centre.
    std::vector<std::uint8_t> ids(d.voxels(), 0);
    std::vector<std::uint8_t> sheath(d.voxels(), 0);
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const double dx = static_cast<double>(x) - g.cx[z], dy = static_cast<double>(y) - g.cy[z];
                const std::size_t i = x + d.nx * (y + d.ny * z);
                const bool cord = in_ellipse(dx, dy, cfg.cord_radius_x, cfg.cord_radius_y);
                const bool gm = in_butterfly(cfg, dx, dy);
                if (gm && !cord)
                    throw GeometryError("gray-matter butterfly extends outside the cord at (" + std::to_string(x) +
                                        "," + std::to_string(y) + "," + std::to_string(z) + ")");
                if (cord)
                    ids[i] = static_cast<std::uint8_t>(gm ? Label::healthy_gm : Label::healthy_wm);
                else if (in_ellipse(dx, dy, cfg.cord_radius_x + cfg.sheath_thickness,
                                    cfg.cord_radius_y + cfg.sheath_thickness))
                    sheath[i] = 1;
            }

    // Lesions: z-elongated ellipsoids that follow the cord, relabelled by host tissue.
    std::mt19937_64 lesion_rng(augment::derive_seed(cfg.seed, 2));
    const std::size_t zmid = d.nz / 2;
    std::array<std::vector<std::pair<double, double>>, 2> hosts;  // wm, gm offsets in the middle slice
    for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
            const auto id = ids[x + d.nx * (y + d.ny * zmid)];
            const std::pair<double, double> off{static_cast<double>(x) - g.cx[zmid], static_cast<double>(y) - g.cy[zmid]};
            if (id == static_cast<std::uint8_t>(Label::healthy_wm)) hosts[0].push_back(off);
            if (id == static_cast<std::uint8_t>(Label::healthy_gm)) hosts[1].push_back(off);
        }
    std::vector<std::uint8_t> lesion(d.voxels(), 0);
    const double nzd = static_cast<double>(d.nz);
    for (std::size_t k = 0; k < cfg.lesion_count; ++k) {
        std::size_t host = 0;
        switch (cfg.lesion_target) {
            case LesionTarget::alternate: host = k % 2; break;
            case LesionTarget::wm: host = 0; break;
            case LesionTarget::gm: host = 1; break;
        }
        if (hosts[host].empty()) throw GeometryError("no host tissue for lesion placement");
        std::uniform_int_distribution<std::size_t> pick(0, hosts[host].size() - 1);
        const auto [ox, oy] = hosts[host][pick(lesion_rng)];
        const double r = cfg.lesion_radius_min + (cfg.lesion_radius_max - cfg.lesion_radius_min) * unit(lesion_rng);
        const double cz = (nzd - 1.0) * (1.0 + unit(lesion_rng)) / 3.0;
        const double rz = r * cfg.lesion_z_elongation;
        for (std::size_t z = 0; z < d.nz; ++z) {
            const double tz = (static_cast<double>(z) - cz) / rz;
            if (tz * tz > 1.0) continue;
            const double rr = r * r * (1.0 - tz * tz);
            for (std::size_t y = 0; y < d.ny; ++y)
                for (std::size_t x = 0; x < d.nx; ++x) {
                    const double dx = static_cast<double>(x) - g.cx[z] - ox, dy = static_cast<double>(y) - g.cy[z] - oy;
                    if (dx * dx + dy * dy <= rr) lesion[x + d.nx * (y + d.ny * z)] = 1;
                }
        }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!lesion[i]) continue;
        if (ids[i] == static_cast<std::uint8_t>(Label::healthy_wm)) ids[i] = static_cast<std::uint8_t>(Label::lesion_wm);
        if (ids[i] == static_cast<std::uint8_t>(Label::healthy_gm)) ids[i] = static_cast<std::uint8_t>(Label::lesion_gm);
    }

    // Intensities: class Gaussian plus acquisition noise, one stream per channel.
    auto channel = [&](std::uint64_t stream, bool magnitude) {
        std::mt19937_64 rng(augment::derive_seed(cfg.seed, stream));
        std::normal_distribution<double> n01(0.0, 1.0);
        std::vector<double> out(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const ChannelIntensity& ci = sheath[i] ? cfg.sheath : cfg.tissue[ids[i]];
            const ClassIntensity& c = magnitude ? ci.magnitude : ci.phase;
            const double a = n01(rng), b = n01(rng);
            out[i] = c.mean + c.stddev * a + cfg.noise_std * b;
        }
        return out;
    };
    Phantom p{ScalarVolume(d, cfg.spacing, channel(3, true), Channel::magnitude),
              ScalarVolume(d, cfg.spacing, channel(4, false), Channel::phase), LabelVolume(d, cfg.spacing, ids)};
    return p;
}

LabelVolume perturb_slices(const LabelVolume& labels, std::size_t max_shift, std::uint64_t seed) {
    const Dims d = labels.dims();
    if (d.nz < 2) throw DimensionError("perturb_slices needs at least two axial slices");
    if (max_shift == 0) return labels;
    std::mt19937_64 rng(augment::derive_seed(seed, 5));
    const auto m = static_cast<std::ptrdiff_t>(max_shift);
    std::uniform_int_distribution<std::ptrdiff_t> shift(-m, m);
    std::vector<std::uint8_t> out(labels.size(), 0);
    for (std::size_t z = 0; z < d.nz; ++z) {
        const std::ptrdiff_t sx = shift(rng), sy = shift(rng);
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const auto srcx = static_cast<std::ptrdiff_t>(x) - sx, srcy = static_cast<std::ptrdiff_t>(y) - sy;
                if (srcx < 0 || srcy < 0 || srcx >= static_cast<std::ptrdiff_t>(d.nx) ||
                    srcy >= static_cast<std::ptrdiff_t>(d.ny))
                    continue;
                out[labels.index(x, y, z)] = static_cast<std::uint8_t>(
                    labels(static_cast<std::size_t>(srcx), static_cast<std::size_t>(srcy), z));
            }
    }
    return LabelVolume(d, labels.spacing(), std::move(out));
}

pseudo::MockPredictor::Config mock_config(const PhantomConfig& cfg, std::optional<std::pair<double, double>> stretch) {
    pseudo::MockPredictor::Config mc;
    mc.use_phase = false;
    double spread = 0.0;
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        mc.centres[l] = {cfg.tissue[l].magnitude.mean, cfg.tissue[l].phase.mean};
        if (l > 0) spread = std::max(spread, std::hypot(cfg.tissue[l].magnitude.stddev, cfg.noise_std));
    }
    if (!(spread > 0.0)) spread = 0.01;
    mc.magnitude_sigma = spread;
    mc.phase_sigma = spread;
    if (stretch) {
        const auto [lo, hi] = *stretch;
        if (!(hi > lo)) throw DegenerateError("stretch range is empty");
        auto map = [&](double v) { return std::clamp((v - lo) / (hi - lo), 0.0, 1.0); };
        mc.centres[0].magnitude = 0.0;
        for (std::size_t l = 1; l < kLabelCount; ++l) mc.centres[l].magnitude = map(mc.centres[l].magnitude);
        mc.magnitude_sigma = spread / (hi - lo);
    }
    return mc;
}

}  // namespace cordpipe::phantom
