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

#include "cordpipe/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cordpipe/parallel.hpp"

namespace cordpipe::preprocess {
namespace {

void check_same_dims(const Dims& a, const Dims& b, const char* what) {
    if (!(a == b)) throw DimensionError(std::string(what) + ": dims " + to_string(a) + " vs " + to_string(b));
}

std::vector<double> scoped_values(const ScalarVolume& vol, const MaskVolume* mask) {
    if (mask == nullptr) return {vol.values().begin(), vol.values().end()};
    check_same_dims(vol.dims(), mask->dims(), "mask");
    std::vector<double> out;
    for (std::size_t i = 0; i < vol.size(); ++i)
        if ((*mask)[i] != 0) out.push_back(vol[i]);
    return out;
}

// Tile boundaries along one axis: tile i covers [edges[i], edges[i+1]).
std::vector<std::size_t> tile_edges(std::size_t n, std::size_t tiles) {
    std::vector<std::size_t> e(tiles + 1);
    for (std::size_t i = 0; i <= tiles; ++i) e[i] = i * n / tiles;
    return e;
}

// Lower tile index and blend weight for pixel coordinate p.
std::pair<std::size_t, double> tile_position(const std::vector<double>& centres, double p) {
    if (p <= centres.front()) return {0, 0.0};
    if (p >= centres.back()) return {centres.size() - 1, 0.0};
    std::size_t i = 0;
    while (centres[i + 1] <= p) ++i;
    return {i, (p - centres[i]) / (centres[i + 1] - centres[i])};
}

void clahe_plane(std::span<const double> src, std::span<double> dst, std::size_t nx, std::size_t ny,
                 const ClaheConfig& cfg) {
    const auto ex = tile_edges(nx, cfg.tiles_x);
    const auto ey = tile_edges(ny, cfg.tiles_y);
    std::vector<double> cx(cfg.tiles_x), cy(cfg.tiles_y);
    for (std::size_t i = 0; i < cfg.tiles_x; ++i) cx[i] = 0.5 * static_cast<double>(ex[i] + ex[i + 1] - 1);
    for (std::size_t j = 0; j < cfg.tiles_y; ++j) cy[j] = 0.5 * static_cast<double>(ey[j] + ey[j + 1] - 1);

    // One cumulative mapping per tile.
    std::vector<std::vector<double>> lut(cfg.tiles_x * cfg.tiles_y);
    std::vector<double> tile;
    for (std::size_t j = 0; j < cfg.tiles_y; ++j)
        for (std::size_t i = 0; i < cfg.tiles_x; ++i) {
            tile.clear();
            for (std::size_t y = ey[j]; y < ey[j + 1]; ++y)
                for (std::size_t x = ex[i]; x < ex[i + 1]; ++x) tile.push_back(src[x + nx * y]);
            auto hist = clahe_clipped_histogram(tile, cfg.clip_limit, cfg.bins);
            double acc = 0.0;
            for (auto& h : hist) {
                acc += h;
                h = std::min(acc, 1.0);
            }
            lut[i + cfg.tiles_x * j] = std::move(hist);
        }

    for (std::size_t y = 0; y < ny; ++y) {
        const auto [j0, wy] = tile_position(cy, static_cast<double>(y));
        const std::size_t j1 = std::min(j0 + 1, cfg.tiles_y - 1);
        for (std::size_t x = 0; x < nx; ++x) {
            const auto [i0, wx] = tile_position(cx, static_cast<double>(x));
            const std::size_t i1 = std::min(i0 + 1, cfg.tiles_x - 1);
            const std::size_t b = clahe_bin(src[x + nx * y], cfg.bins);
            const double v00 = lut[i0 + cfg.tiles_x * j0][b];
            const double v10 = lut[i1 + cfg.tiles_x * j0][b];
            const double v01 = lut[i0 + cfg.tiles_x * j1][b];
            const double v11 = lut[i1 + cfg.tiles_x * j1][b];
            const double top = v00 + wx * (v10 - v00);
            const double bottom = v01 + wx * (v11 - v01);
            dst[x + nx * y] = std::clamp(top + wy * (bottom - top), 0.0, 1.0);
        }
    }
}

}  // namespace

std::size_t otsu_bin(double v, double lo, double hi) {
    if (!(hi > lo)) return 0;
    const double t = (v - lo) / (hi - lo) * static_cast<double>(kOtsuBins);
    if (!(t > 0.0)) return 0;
    return std::min<std::size_t>(kOtsuBins - 1, static_cast<std::size_t>(t));
}

std::size_t otsu_threshold_bin(const std::array<std::uint64_t, kOtsuBins>& histogram) {
    std::size_t populated = 0;
    long double total = 0.0L, weighted = 0.0L;
    for (std::size_t b = 0; b < kOtsuBins; ++b) {
        populated += histogram[b] != 0;
        total += static_cast<long double>(histogram[b]);
        weighted += static_cast<long double>(b) * static_cast<long double>(histogram[b]);
    }
    if (populated < 2) throw DegenerateError("histogram has fewer than two populated bins; no valid split");

    // sigma_b^2(k) ∝ (N*S_k - N_k*S)^2 / (N_k (N - N_k)).
    std::array<long double, kOtsuBins> score{};
    long double nk = 0.0L, sk = 0.0L, best = 0.0L;
    for (std::size_t k = 0; k + 1 < kOtsuBins; ++k) {
        nk += static_cast<long double>(histogram[k]);
        sk += static_cast<long double>(k) * static_cast<long double>(histogram[k]);
        const long double denom = nk * (total - nk);
        if (denom <= 0.0L) continue;
        const long double num = total * sk - nk * weighted;
        score[k] = num * num / denom;
        best = std::max(best, score[k]);
    }
    for (std::size_t k = 0; k + 1 < kOtsuBins; ++k)
        if (score[k] > 0.0L && score[k] >= best * (1.0L - 1e-12L)) return k;
    return 0;
}

OtsuResult otsu_mask(const ScalarVolume& magnitude) {
    OtsuResult r;
    const auto [mn, mx] = std::minmax_element(magnitude.values().begin(), magnitude.values().end());
    r.min_value = *mn;
    r.max_value = *mx;
    if (!(r.max_value > r.min_value)) throw DegenerateError("constant volume has a degenerate histogram");
    for (double v : magnitude.values()) ++r.histogram[otsu_bin(v, r.min_value, r.max_value)];
    r.threshold_bin = otsu_threshold_bin(r.histogram);
    r.threshold = r.min_value + static_cast<double>(r.threshold_bin + 1) * (r.max_value - r.min_value) /
                                    static_cast<double>(kOtsuBins);
    r.mask = MaskVolume(magnitude.dims(), magnitude.spacing(), std::uint8_t{0});
    for (std::size_t i = 0; i < magnitude.size(); ++i)
        r.mask[i] = otsu_bin(magnitude[i], r.min_value, r.max_value) > r.threshold_bin ? 1 : 0;
    return r;
}

ScalarVolume apply_mask(const ScalarVolume& vol, const MaskVolume& mask, double fill) {
    check_same_dims(vol.dims(), mask.dims(), "apply_mask");
    ScalarVolume out = vol;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (mask[i] == 0) out[i] = fill;
    return out;
}

void ClaheConfig::validate() const {
    if (tiles_x < 1 || tiles_y < 1) throw ConfigError("CLAHE tile counts must be >= 1");
    if (!(clip_limit > 0.0 && clip_limit <= 1.0)) throw ConfigError("CLAHE clip_limit must be in (0, 1]");
    if (bins < 2) throw ConfigError("CLAHE needs at least 2 bins");
}

std::size_t clahe_bin(double v, std::size_t bins) {
    const double t = v * static_cast<double>(bins);
    if (!(t > 0.0)) return 0;
    return std::min(bins - 1, static_cast<std::size_t>(t));
}

double clahe_bin_cap(double clip_limit, std::size_t bins) {
    return std::max(clip_limit, 1.0 / static_cast<double>(bins));
}

std::vector<double> clahe_clipped_histogram(std::span<const double> tile_values, double clip_limit,
                                            std::size_t bins) {
    std::vector<double> hist(bins, 0.0);
    if (tile_values.empty()) return hist;
    std::vector<std::uint64_t> counts(bins, 0);
    for (double v : tile_values) ++counts[clahe_bin(v, bins)];
    const double n = static_cast<double>(tile_values.size());
    for (std::size_t b = 0; b < bins; ++b) hist[b] = static_cast<double>(counts[b]) / n;

    const double cap = clahe_bin_cap(clip_limit, bins);
    double excess = 0.0;
    for (auto& h : hist)
        if (h > cap) {
            excess += h - cap;
            h = cap;
        }
    // Spread the excess evenly over bins below the cap; bins that fill up drop out.
    while (excess > 1e-15) {
        std::size_t free = 0;
        for (double h : hist) free += h < cap;
        if (free == 0) break;
        const double share = excess / static_cast<double>(free);
        for (auto& h : hist) {
            if (h >= cap) continue;
            const double add = std::min(share, cap - h);
            h += add;
            excess -= add;
        }
    }
    return hist;
}

ScalarVolume clahe_slicewise(const ScalarVolume& vol, const ClaheConfig& cfg) {
    cfg.validate();
    const Dims& d = vol.dims();
    if (cfg.tiles_x > d.nx || cfg.tiles_y > d.ny)
        throw ConfigError("CLAHE grid " + std::to_string(cfg.tiles_x) + "x" + std::to_string(cfg.tiles_y) +
                          " is larger than the " + std::to_string(d.nx) + "x" + std::to_string(d.ny) + " slice");
    for (double v : vol.values())
        if (!(v >= 0.0 && v <= 1.0)) throw ValueError("CLAHE input must be normalised to [0, 1]");
    ScalarVolume out = vol;
    parallel_for(d.nz, [&](std::size_t z) {
        clahe_plane(vol.slice_values(z), out.slice_values(z), d.nx, d.ny, cfg);
    });
    return out;
}

void StretchConfig::validate() const {
    if (!(p_low >= 0.0 && p_high <= 100.0 && p_low < p_high))
        throw ConfigError("stretch percentiles must satisfy 0 <= p_low < p_high <= 100");
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw DegenerateError("percentile of an empty sample");
    if (!(p >= 0.0 && p <= 100.0)) throw ValueError("percentile must be in [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

StretchResult percentile_stretch_detail(const ScalarVolume& vol, const StretchConfig& cfg, const MaskVolume* mask) {
    cfg.validate();
    auto scope = scoped_values(vol, mask);
    if (scope.empty()) throw DegenerateError("stretch scope is empty");
    StretchResult r;
    r.q_low = percentile(scope, cfg.p_low);
    r.q_high = percentile(std::move(scope), cfg.p_high);
    if (!(r.q_high > r.q_low)) throw DegenerateError("stretch percentiles coincide; degenerate intensity range");
    r.volume = vol;
    const double span = r.q_high - r.q_low;
    for (auto& v : r.volume.values()) v = std::clamp((v - r.q_low) / span, 0.0, 1.0);
    return r;
}

ScalarVolume percentile_stretch(const ScalarVolume& vol, const StretchConfig& cfg, const MaskVolume* mask) {
    return percentile_stretch_detail(vol, cfg, mask).volume;
}

ScalarVolume zscore_normalize(const ScalarVolume& vol, const MaskVolume* mask) {
    const auto scope = scoped_values(vol, mask);
    if (scope.size() < 2) throw DegenerateError("z-score needs at least two voxels in scope");
    double mean = 0.0;
    for (double v : scope) mean += v;
    mean /= static_cast<double>(scope.size());
    double var = 0.0;
    for (double v : scope) var += (v - mean) * (v - mean);
    var /= static_cast<double>(scope.size());
    if (!(var > 0.0)) throw DegenerateError("zero variance in z-score scope");
    const double sd = std::sqrt(var);
    ScalarVolume out = vol;
    for (auto& v : out.values()) v = (v - mean) / sd;
    return out;
}

ScalarVolume minmax_normalize(const ScalarVolume& vol) {
    const auto [mn, mx] = std::minmax_element(vol.values().begin(), vol.values().end());
    const double lo = *mn, hi = *mx;
    ScalarVolume out = vol;
    for (auto& v : out.values()) v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    return out;
}

}  // namespace cordpipe::preprocess
