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

#include "cordpipe/spatial_aug.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

namespace cordpipe::augment {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    // 53 random mantissa bits; independent of the standard library's distribution code.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

bool coin(std::mt19937_64& rng, double p) { return p >= 1.0 || uniform(rng, 0.0, 1.0) < p; }

// Snaps coordinates within float noise of an integer, so quarter-turn rotations stay exact.
double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}

struct Source {
    double x;
    double y;
    bool valid;
};

Source source_of(const Matrix3& inv, std::size_t x, std::size_t y) {
    const double fx = static_cast<double>(x), fy = static_cast<double>(y);
    const double w = inv[6] * fx + inv[7] * fy + inv[8];
    if (!(std::abs(w) > 1e-12)) return {0, 0, false};
    return {snap((inv[0] * fx + inv[1] * fy + inv[2]) / w), snap((inv[3] * fx + inv[4] * fy + inv[5]) / w), true};
}

}  // namespace

bool AugProfile::is_identity() const {
    return translation_frac == 0.0 && rotation_deg == 0.0 && scale_lo == 1.0 && scale_hi == 1.0 &&
           shear_lo_deg == 0.0 && shear_hi_deg == 0.0 && perspective == 0.0;
}

void AugProfile::validate() const {
    if (!(translation_frac >= 0.0 && translation_frac <= 1.0)) throw ConfigError("translation must be in [0, 1]");
    if (!(rotation_deg >= 0.0 && rotation_deg <= 180.0)) throw ConfigError("rotation must be in [0, 180] degrees");
    if (!(scale_lo > 0.0 && scale_lo <= scale_hi)) throw ConfigError("scale range must satisfy 0 < lo <= hi");
    if (!(shear_lo_deg <= shear_hi_deg && shear_lo_deg > -90.0 && shear_hi_deg < 90.0))
        throw ConfigError("shear range must be ordered and inside (-90, 90) degrees");
    if (!(perspective >= 0.0 && perspective < 1.0)) throw ConfigError("perspective must be in [0, 1)");
    if (!(apply_probability >= 0.0 && apply_probability <= 1.0))
        throw ConfigError("apply probability must be in [0, 1]");
}

AugProfile AugProfile::none() { return {}; }
AugProfile AugProfile::aug1() { return {"aug1", 0.45, 90.0, 0.7, 1.7, -35.0, 35.0, 0.35, 1.0}; }
AugProfile AugProfile::aug2() { return {"aug2", 0.45, 180.0, 0.3, 2.0, -55.0, 55.0, 0.55, 1.0}; }
AugProfile AugProfile::aug3() { return {"aug3", 0.80, 180.0, 0.1, 3.0, -85.0, 85.0, 0.85, 1.0}; }

AugProfile AugProfile::by_name(std::string_view name) {
    std::string n(name);
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
    if (n == "none") return none();
    if (n == "aug1") return aug1();
    if (n == "aug2") return aug2();
    if (n == "aug3") return aug3();
    throw ConfigError("unknown augmentation profile '" + std::string(name) + "'");
}

Matrix3 identity_matrix() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
    Matrix3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[3 * i + j] += a[3 * i + k] * b[3 * k + j];
    return r;
}

double determinant(const Matrix3& m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Matrix3 invert(const Matrix3& m) {
    const double det = determinant(m);
    if (!(std::abs(det) > 1e-9)) throw TransformError("transform is not invertible (|det| <= 1e-9)");
    if (m == identity_matrix()) return m;
    const Matrix3 adj = {
        m[4] * m[8] - m[5] * m[7], m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
        m[5] * m[6] - m[3] * m[8], m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
        m[3] * m[7] - m[4] * m[6], m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3],
    };
    Matrix3 r;
    for (int i = 0; i < 9; ++i) r[i] = adj[i] / det;
    return r;
}

SampledTransform make_transform(const TransformParams& p, std::size_t nx, std::size_t ny) {
    SampledTransform t;
    t.params = p;
    t.nx = nx;
    t.ny = ny;
    const double cx = 0.5 * static_cast<double>(nx > 0 ? nx - 1 : 0);
    const double cy = 0.5 * static_cast<double>(ny > 0 ? ny - 1 : 0);
    const double hx = std::max(1.0, 0.5 * static_cast<double>(nx));
    const double hy = std::max(1.0, 0.5 * static_cast<double>(ny));
    const double c = std::cos(p.rotation_deg * kDegToRad);
    const double s = std::sin(p.rotation_deg * kDegToRad);
    const double sh = std::tan(p.shear_deg * kDegToRad);

    const Matrix3 to_center = {1, 0, -cx, 0, 1, -cy, 0, 0, 1};
    const Matrix3 from_center = {1, 0, cx, 0, 1, cy, 0, 0, 1};
    const Matrix3 translate = {1, 0, p.tx, 0, 1, p.ty, 0, 0, 1};
    const Matrix3 rotate = {c, -s, 0, s, c, 0, 0, 0, 1};
    const Matrix3 scale = {p.scale, 0, 0, 0, p.scale, 0, 0, 0, 1};
    const Matrix3 shear = {1, sh, 0, 0, 1, 0, 0, 0, 1};
    const Matrix3 perspective = {1, 0, 0, 0, 1, 0, p.persp_a / hx, p.persp_b / hy, 1};

    Matrix3 m = multiply(from_center, translate);
    for (const Matrix3* f : {&rotate, &scale, &shear, &perspective, &to_center}) m = multiply(m, *f);
    t.matrix = m;
    const bool identity = p.tx == 0 && p.ty == 0 && p.rotation_deg == 0 && p.scale == 1 && p.shear_deg == 0 &&
                          p.persp_a == 0 && p.persp_b == 0;
    if (identity) t.matrix = identity_matrix();
    return t;
}

SampledTransform sample_transform(const AugProfile& profile, std::uint64_t seed, std::size_t nx, std::size_t ny) {
    profile.validate();
    TransformParams p;
    if (!profile.is_identity()) {
        std::mt19937_64 rng(seed);
        const double pr = profile.apply_probability;
        // Draw order is fixed; every draw happens whether or not the component applies.
        const double tx = uniform(rng, -1.0, 1.0) * profile.translation_frac * static_cast<double>(nx);
        const double ty = uniform(rng, -1.0, 1.0) * profile.translation_frac * static_cast<double>(ny);
        const double rot = uniform(rng, -profile.rotation_deg, profile.rotation_deg);
        const double sc = uniform(rng, profile.scale_lo, profile.scale_hi);
        const double shr = uniform(rng, profile.shear_lo_deg, profile.shear_hi_deg);
        const double pa = uniform(rng, -0.5, 0.5) * profile.perspective;
        const double pb = uniform(rng, -0.5, 0.5) * profile.perspective;
        if (coin(rng, pr)) {
            p.tx = tx;
            p.ty = ty;
        }
        if (coin(rng, pr)) p.rotation_deg = rot;
        if (coin(rng, pr)) p.scale = sc;
        if (coin(rng, pr)) p.shear_deg = shr;
        if (coin(rng, pr)) {
            p.persp_a = pa;
            p.persp_b = pb;
        }
    }
    SampledTransform t = make_transform(p, nx, ny);
    t.seed = seed;
    return t;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t z) {
    // splitmix64 finaliser over the combined key.
    std::uint64_t x = seed ^ (z + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Plane<double> warp_image(const Plane<double>& plane, const SampledTransform& t, double fill) {
    const Matrix3 inv = invert(t.matrix);
    if (inv == identity_matrix()) return plane;
    const std::size_t nx = plane.nx(), ny = plane.ny();
    Plane<double> out(nx, ny, fill);
    auto fetch = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
        if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(nx) || y >= static_cast<std::ptrdiff_t>(ny))
            return fill;
        return plane(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    };
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x) {
            const Source s = source_of(inv, x, y);
            if (!s.valid || s.x <= -1.0 || s.y <= -1.0 || s.x >= static_cast<double>(nx) ||
                s.y >= static_cast<double>(ny))
                continue;
            const double fx0 = std::floor(s.x), fy0 = std::floor(s.y);
            const auto x0 = static_cast<std::ptrdiff_t>(fx0), y0 = static_cast<std::ptrdiff_t>(fy0);
            const double wx = s.x - fx0, wy = s.y - fy0;
            if (wx == 0.0 && wy == 0.0) {
                out(x, y) = fetch(x0, y0);
                continue;
            }
            const double top = fetch(x0, y0) + wx * (fetch(x0 + 1, y0) - fetch(x0, y0));
            const double bottom = fetch(x0, y0 + 1) + wx * (fetch(x0 + 1, y0 + 1) - fetch(x0, y0 + 1));
            out(x, y) = top + wy * (bottom - top);
        }
    return out;
}

Plane<std::uint8_t> warp_labels(const Plane<std::uint8_t>& plane, const SampledTransform& t, Label fill) {
    const Matrix3 inv = invert(t.matrix);
    if (inv == identity_matrix()) return plane;
    const std::size_t nx = plane.nx(), ny = plane.ny();
    Plane<std::uint8_t> out(nx, ny, static_cast<std::uint8_t>(fill));
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x) {
            const Source s = source_of(inv, x, y);
            if (!s.valid) continue;
            const double rx = std::floor(s.x + 0.5), ry = std::floor(s.y + 0.5);
            if (rx < 0 || ry < 0 || rx >= static_cast<double>(nx) || ry >= static_cast<double>(ny)) continue;
            out(x, y) = plane(static_cast<std::size_t>(rx), static_cast<std::size_t>(ry));
        }
    return out;
}

WarpedPair warp_pair(const Plane<double>& magnitude, const Plane<double>& phase, const Plane<std::uint8_t>& labels,
                     const SampledTransform& t) {
    if (!magnitude.same_shape(phase) || magnitude.nx() != labels.nx() || magnitude.ny() != labels.ny())
        throw DimensionError("warp_pair: magnitude, phase and label planes must share one shape");
    return {warp_image(magnitude, t), warp_image(phase, t), warp_labels(labels, t)};
}

}  // namespace cordpipe::augment
