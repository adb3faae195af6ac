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

// Brute-force reference implementations. Deliberately naive: sets,
// nested loops and direct formulas, sharing no code with the library.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "cordpipe/volume.hpp"

namespace oracle {

using cordpipe::Dims;
using cordpipe::Spacing;
using Voxel = std::tuple<long, long, long>;

inline std::set<Voxel> voxel_set(const std::vector<std::uint8_t>& m, const Dims& d) {
    std::set<Voxel> s;
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x)
                if (m[x + d.nx * (y + d.ny * z)]) s.insert({long(x), long(y), long(z)});
    return s;
}

inline std::size_t intersection_size(const std::set<Voxel>& a, const std::set<Voxel>& b) {
    std::size_t n = 0;
    for (const auto& v : a) n += b.count(v);
    return n;
}

inline std::optional<double> dice(const std::vector<std::uint8_t>& g, const std::vector<std::uint8_t>& p, const Dims& d) {
    const auto G = voxel_set(g, d), P = voxel_set(p, d);
    if (G.empty() && P.empty()) return std::nullopt;
    return 2.0 * double(intersection_size(G, P)) / double(G.size() + P.size());
}

/// Mean Dice over consecutive slice pairs whose union is non-empty.
inline std::optional<double> inter_slice_dice(const std::vector<std::uint8_t>& m, const Dims& d) {
    std::vector<std::set<std::pair<long, long>>> slices(d.nz);
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x)
                if (m[x + d.nx * (y + d.ny * z)]) slices[z].insert({long(x), long(y)});
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t z = 0; z + 1 < d.nz; ++z) {
        const auto& a = slices[z];
        const auto& b = slices[z + 1];
        if (a.size() + b.size() == 0) continue;
        std::size_t inter = 0;
        for (const auto& v : a) inter += b.count(v);
        sum += 2.0 * double(inter) / double(a.size() + b.size());
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / double(n);
}

/// Foreground voxels with at least one face neighbour that is background or outside.
inline std::vector<Voxel> surface(const std::vector<std::uint8_t>& m, const Dims& d, bool in_plane_only = false) {
    auto at = [&](long x, long y, long z) -> int {
        if (x < 0 || y < 0 || z < 0 || x >= long(d.nx) || y >= long(d.ny) || z >= long(d.nz)) return 0;
        return m[std::size_t(x) + d.nx * (std::size_t(y) + d.ny * std::size_t(z))];
    };
    std::vector<Voxel> out;
    const int offs[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (long z = 0; z < long(d.nz); ++z)
        for (long y = 0; y < long(d.ny); ++y)
            for (long x = 0; x < long(d.nx); ++x) {
                if (!at(x, y, z)) continue;
                bool edge = false;
                for (int k = 0; k < (in_plane_only ? 4 : 6); ++k)
                    if (!at(x + offs[k][0], y + offs[k][1], z + offs[k][2])) edge = true;
                if (edge) out.push_back({x, y, z});
            }
    return out;
}

inline double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p / 100.0 * double(v.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

/// All-pairs directed distances, then a linear-interpolated 95th percentile.
inline double directed_h95(const std::vector<Voxel>& a, const std::vector<Voxel>& b, const Spacing& s) {
    std::vector<double> best;
    for (const auto& [ax, ay, az] : a) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& [bx, by, bz] : b) {
            const double dx = double(ax - bx) * s.dx, dy = double(ay - by) * s.dy, dz = double(az - bz) * s.dz;
            m = std::min(m, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
        best.push_back(m);
    }
    return percentile(best, 95.0);
}

inline std::optional<double> hd95(const std::vector<std::uint8_t>& g, const std::vector<std::uint8_t>& p, const Dims& d,
                                  const Spacing& s) {
    const bool ge = std::none_of(g.begin(), g.end(), [](auto v) { return v != 0; });
    const bool pe = std::none_of(p.begin(), p.end(), [](auto v) { return v != 0; });
    if (ge && pe) return 0.0;
    if (ge || pe) return std::nullopt;
    const auto sg = surface(g, d), sp = surface(p, d);
    return std::max(directed_h95(sg, sp, s), directed_h95(sp, sg, s));
}

/// 256 uniform bins over [min, max]; returns the last background bin of the
/// first split that maximises w0 * w1 * (mu0 - mu1)^2.
inline std::size_t otsu_bin_index(const std::vector<double>& values) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    std::array<double, 256> h{};
    for (double v : values) {
        long b = long(std::floor((v - *mn) / (*mx - *mn) * 256.0));
        b = std::clamp(b, 0L, 255L);
        h[std::size_t(b)] += 1.0;
    }
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < 255; ++k) {
        double n0 = 0, s0 = 0, n1 = 0, s1 = 0;
        for (std::size_t i = 0; i < 256; ++i) {
            const double c = (double(i) + 0.5);
            if (i <= k) n0 += h[i], s0 += h[i] * c;
            else n1 += h[i], s1 += h[i] * c;
        }
        if (n0 == 0 || n1 == 0) continue;
        const double w0 = n0 / double(values.size()), w1 = n1 / double(values.size());
        const double var = w0 * w1 * (s0 / n0 - s1 / n1) * (s0 / n0 - s1 / n1);
        if (var > best * (1.0 + 1e-12)) best = var, arg = k;
    }
    return arg;
}

/// k x k window morphology with zero padding.
inline std::vector<std::uint8_t> morph(const std::vector<std::uint8_t>& m, std::size_t nx, std::size_t ny, std::size_t k,
                                       bool dilate) {
    const long r = long(k / 2);
    std::vector<std::uint8_t> out(m.size(), 0);
    for (long y = 0; y < long(ny); ++y)
        for (long x = 0; x < long(nx); ++x) {
            bool any = false, all = true;
            for (long dy = -r; dy <= r; ++dy)
                for (long dx = -r; dx <= r; ++dx) {
                    const long xx = x + dx, yy = y + dy;
                    const bool v = xx >= 0 && yy >= 0 && xx < long(nx) && yy < long(ny) &&
                                   m[std::size_t(xx) + nx * std::size_t(yy)];
                    any = any || v;
                    all = all && v;
                }
            out[std::size_t(x) + nx * std::size_t(y)] = dilate ? any : all;
        }
    return out;
}

/// Global histogram equalisation: fraction of pixels whose bin is <= the pixel's bin.
inline std::vector<double> global_he(const std::vector<double>& v, std::size_t bins) {
    auto bin = [&](double x) { return std::min<long>(long(bins) - 1, std::max(0L, long(std::floor(x * double(bins))))); };
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t n = 0;
        for (double w : v) n += bin(w) <= bin(v[i]);
        out[i] = double(n) / double(v.size());
    }
    return out;
}

}  // namespace oracle
