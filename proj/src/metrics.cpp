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

#include "cordpipe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cordpipe::metrics {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dims(const MaskVolume& a, const MaskVolume& b) {
    if (!(a.dims() == b.dims())) throw DimensionError("mask dims " + to_string(a.dims()) + " vs " + to_string(b.dims()));
}

// 1D squared distance transform along a strided line (lower envelope of parabolas).
// f holds 0 at sites, +inf elsewhere, or partial squared distances from earlier passes.
void edt_line(double* f, std::size_t n, std::size_t stride, double step, std::vector<double>& buf,
              std::vector<std::size_t>& v, std::vector<double>& z) {
    const double s2 = step * step;
    buf.resize(n);
    v.clear();
    z.clear();
    for (std::size_t i = 0; i < n; ++i) buf[i] = f[i * stride];
    for (std::size_t q = 0; q < n; ++q) {
        if (!std::isfinite(buf[q])) continue;
        const double fq = buf[q] + s2 * static_cast<double>(q) * static_cast<double>(q);
        double s = -kInf;
        while (!v.empty()) {
            const std::size_t p = v.back();
            const double fp = buf[p] + s2 * static_cast<double>(p) * static_cast<double>(p);
            s = (fq - fp) / (2.0 * s2 * static_cast<double>(q - p));
            if (s > z.back()) break;
            v.pop_back();
            z.pop_back();
            s = -kInf;
        }
        v.push_back(q);
        z.push_back(v.size() == 1 ? -kInf : s);
    }
    if (v.empty()) return;  // no sites on this line; leave +inf
    std::size_t k = 0;
    for (std::size_t q = 0; q < n; ++q) {
        while (k + 1 < v.size() && z[k + 1] < static_cast<double>(q)) ++k;
        const double d = static_cast<double>(q) - static_cast<double>(v[k]);
        f[q * stride] = s2 * d * d + buf[v[k]];
    }
}

struct Box {
    std::size_t x0, y0, z0, nx, ny, nz;
};

Box bounding_box(const std::vector<Index3>& a, const std::vector<Index3>& b) {
    std::size_t x0 = SIZE_MAX, y0 = SIZE_MAX, z0 = SIZE_MAX, x1 = 0, y1 = 0, z1 = 0;
    for (const auto* set : {&a, &b})
        for (const Index3& p : *set) {
            x0 = std::min(x0, p.x), y0 = std::min(y0, p.y), z0 = std::min(z0, p.z);
            x1 = std::max(x1, p.x), y1 = std::max(y1, p.y), z1 = std::max(z1, p.z);
        }
    return {x0, y0, z0, x1 - x0 + 1, y1 - y0 + 1, z1 - z0 + 1};
}

std::vector<double> distances_between(const std::vector<Index3>& from, const std::vector<Index3>& to,
                                      const Spacing& spacing, Connectivity conn) {
    const Box b = bounding_box(from, to);
    std::vector<double> f(b.nx * b.ny * b.nz, kInf);
    auto at = [&](const Index3& p) { return (p.x - b.x0) + b.nx * ((p.y - b.y0) + b.ny * (p.z - b.z0)); };
    for (const Index3& p : to) f[at(p)] = 0.0;

    std::vector<double> buf, z;
    std::vector<std::size_t> v;
    for (std::size_t k = 0; k < b.nz; ++k)
        for (std::size_t j = 0; j < b.ny; ++j) edt_line(&f[b.nx * (j + b.ny * k)], b.nx, 1, spacing.dx, buf, v, z);
    for (std::size_t k = 0; k < b.nz; ++k)
        for (std::size_t i = 0; i < b.nx; ++i) edt_line(&f[i + b.nx * b.ny * k], b.ny, b.nx, spacing.dy, buf, v, z);
    if (conn == Connectivity::face6)
        for (std::size_t j = 0; j < b.ny; ++j)
            for (std::size_t i = 0; i < b.nx; ++i)
                edt_line(&f[i + b.nx * j], b.nz, b.nx * b.ny, spacing.dz, buf, v, z);

    std::vector<double> out;
    out.reserve(from.size());
    for (const Index3& p : from) out.push_back(std::sqrt(f[at(p)]));
    return out;
}

std::optional<double> symmetric_hd95(const std::vector<Index3>& sg, const std::vector<Index3>& sp,
                                     const Spacing& spacing, Connectivity conn) {
    if (sg.empty() && sp.empty()) return 0.0;
    if (sg.empty() || sp.empty()) return std::nullopt;
    const double a = percentile_linear(distances_between(sg, sp, spacing, conn), 95.0);
    const double b = percentile_linear(distances_between(sp, sg, spacing, conn), 95.0);
    return std::max(a, b);
}

MaskVolume class_mask_of_plane(const Plane<std::uint8_t>& plane, Label cls, const Spacing& spacing) {
    MaskVolume m(Dims{plane.nx(), plane.ny(), 1}, spacing, std::uint8_t{0});
    const auto id = static_cast<std::uint8_t>(cls);
    for (std::size_t i = 0; i < plane.size(); ++i) m[i] = plane.values()[i] == id;
    return m;
}

void fill_means(MetricsReport& r) {
    double sd = 0, sh = 0, sz = 0;
    std::size_t nd = 0, nh = 0, nz = 0;
    for (const auto& c : r.classes) {
        if (c.dice) sd += *c.dice, ++nd;
        if (c.hd95) sh += *c.hd95, ++nh;
        if (c.dscz) sz += *c.dscz, ++nz;
    }
    if (nd) r.mean_dice = sd / static_cast<double>(nd);
    if (nh) r.mean_hd95 = sh / static_cast<double>(nh);
    if (nz) r.mean_dscz = sz / static_cast<double>(nz);
}

}  // namespace

std::optional<double> dice(const MaskVolume& gt, const MaskVolume& pred) {
    check_dims(gt, pred);
    std::size_t g = 0, p = 0, both = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const bool a = gt[i] != 0, b = pred[i] != 0;
        g += a, p += b, both += a && b;
    }
    if (g + p == 0) return std::nullopt;
    return 2.0 * static_cast<double>(both) / static_cast<double>(g + p);
}

std::vector<Index3> surface_voxels(const MaskVolume& mask, Connectivity conn) {
    const Dims& d = mask.dims();
    std::vector<Index3> out;
    auto bg = [&](std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z) {
        return !mask.contains(x, y, z) ||
               mask(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(z)) == 0;
    };
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                if (mask(x, y, z) == 0) continue;
                const auto sx = static_cast<std::ptrdiff_t>(x), sy = static_cast<std::ptrdiff_t>(y),
                           sz = static_cast<std::ptrdiff_t>(z);
                bool surface = bg(sx - 1, sy, sz) || bg(sx + 1, sy, sz) || bg(sx, sy - 1, sz) || bg(sx, sy + 1, sz);
                if (!surface && conn == Connectivity::face6) surface = bg(sx, sy, sz - 1) || bg(sx, sy, sz + 1);
                if (surface) out.push_back({x, y, z});
            }
    return out;
}

std::vector<double> directed_surface_distances(const MaskVolume& from, const MaskVolume& to, const Spacing& spacing,
                                               Connectivity conn) {
    check_dims(from, to);
    spacing.validate();
    const auto a = surface_voxels(from, conn);
    const auto b = surface_voxels(to, conn);
    if (a.empty() || b.empty()) throw DegenerateError("directed surface distance needs two non-empty surfaces");
    return distances_between(a, b, spacing, conn);
}

double percentile_linear(std::vector<double> values, double p) {
    if (values.empty()) throw DegenerateError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::optional<double> hd95(const MaskVolume& gt, const MaskVolume& pred, const Spacing& spacing, Connectivity conn) {
    check_dims(gt, pred);
    spacing.validate();
    if (gt == pred) return 0.0;
    return symmetric_hd95(surface_voxels(gt, conn), surface_voxels(pred, conn), spacing, conn);
}

std::optional<double> hd95(const MaskVolume& gt, const MaskVolume& pred) { return hd95(gt, pred, gt.spacing()); }

std::optional<double> inter_slice_dice(const MaskVolume& mask) {
    const Dims& d = mask.dims();
    if (d.nz < 2) throw DimensionError("inter-slice Dice needs at least two axial slices");
    double sum = 0.0;
    std::size_t valid = 0;
    for (std::size_t z = 0; z + 1 < d.nz; ++z) {
        auto a = mask.slice_values(z), b = mask.slice_values(z + 1);
        std::size_t na = 0, nb = 0, both = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const bool u = a[i] != 0, w = b[i] != 0;
            na += u, nb += w, both += u && w;
        }
        if (na + nb == 0) continue;
        sum += 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
        ++valid;
    }
    if (valid == 0) return std::nullopt;
    return sum / static_cast<double>(valid);
}

std::optional<double> inter_slice_dice(const LabelVolume& labels, Label cls) {
    return inter_slice_dice(labels.mask_of(cls));
}

MetricsReport evaluate(const LabelVolume& pred, const LabelVolume& gt, std::string volume_id) {
    if (!(pred.dims() == gt.dims()))
        throw DimensionError("prediction " + to_string(pred.dims()) + " vs ground truth " + to_string(gt.dims()));
    MetricsReport r;
    r.volume_id = std::move(volume_id);
    r.scope = "dense";
    r.scope_slices = gt.dims().nz;
    for (std::size_t c = 0; c < 4; ++c) {
        const Label l = kForegroundLabels[c];
        ClassMetrics& m = r.classes[c];
        m.cls = l;
        const MaskVolume g = gt.mask_of(l), p = pred.mask_of(l);
        m.present_in_gt = std::any_of(g.values().begin(), g.values().end(), [](auto v) { return v != 0; });
        m.present_in_pred = std::any_of(p.values().begin(), p.values().end(), [](auto v) { return v != 0; });
        if (pred.dims().nz >= 2) m.dscz = inter_slice_dice(p);
        if (!m.present_in_gt && !m.present_in_pred) continue;
        m.dice = dice(g, p);
        m.hd95 = hd95(g, p, gt.spacing());
    }
    fill_means(r);
    return r;
}

MetricsReport evaluate(const LabelVolume& pred, const SparseAnnotation& gt, std::string volume_id) {
    gt.validate();
    if (gt.z_indices.empty()) throw DegenerateError("sparse ground truth has no annotated slices");
    if (pred.dims().nx != gt.dims.nx || pred.dims().ny != gt.dims.ny || pred.dims().nz != gt.dims.nz)
        throw DimensionError("prediction " + to_string(pred.dims()) + " vs annotated volume " + to_string(gt.dims));
    MetricsReport r;
    r.volume_id = volume_id.empty() ? gt.volume_id : std::move(volume_id);
    r.scope = "sparse";
    r.scope_slices = gt.z_indices.size();
    const Spacing& spacing = pred.spacing();
    for (std::size_t c = 0; c < 4; ++c) {
        const Label l = kForegroundLabels[c];
        const auto id = static_cast<std::uint8_t>(l);
        ClassMetrics& m = r.classes[c];
        m.cls = l;
        if (pred.dims().nz >= 2) m.dscz = inter_slice_dice(pred, l);

        std::size_t ng = 0, np = 0, both = 0;
        double hd_sum = 0.0;
        std::size_t hd_n = 0;
        for (std::size_t k = 0; k < gt.z_indices.size(); ++k) {
            const auto& gplane = gt.planes[k];
            const auto pplane = axial_slice(pred, gt.z_indices[k]);
            std::size_t sg = 0, sp = 0;
            for (std::size_t i = 0; i < gplane.size(); ++i) {
                const bool a = gplane.values()[i] == id, b = pplane.values()[i] == id;
                sg += a, sp += b, both += a && b;
            }
            ng += sg, np += sp;
            if (sg == 0 && sp == 0) continue;
            if (sg == 0 || sp == 0) {
                ++m.hd95_undefined_slices;
                continue;
            }
            const auto h = hd95(class_mask_of_plane(gplane, l, spacing), class_mask_of_plane(pplane, l, spacing),
                                spacing, Connectivity::inplane4);
            hd_sum += *h;
            ++hd_n;
        }
        m.present_in_gt = ng > 0;
        m.present_in_pred = np > 0;
        if (ng + np == 0) continue;
        m.dice = 2.0 * static_cast<double>(both) / static_cast<double>(ng + np);
        if (hd_n > 0) m.hd95 = hd_sum / static_cast<double>(hd_n);
    }
    fill_means(r);
    return r;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return s;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    s.mean = mean;
    s.std = std::sqrt(var);
    if (mean > 0.0) s.cov = *s.std / mean;
    return s;
}

std::vector<AggregateRow> fold_aggregate(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw ValueError("fold aggregation needs at least one report");
    std::vector<AggregateRow> rows;
    auto add = [&](std::string cls, std::string metric, const std::vector<double>& vals) {
        const Summary s = summarize(vals);
        rows.push_back({std::move(cls), std::move(metric), s.n, s.mean, s.std, s.cov});
    };
    using Getter = std::optional<double> ClassMetrics::*;
    const std::array<std::pair<const char*, Getter>, 3> fields = {
        {{"dice", &ClassMetrics::dice}, {"hd95_mm", &ClassMetrics::hd95}, {"dscz", &ClassMetrics::dscz}}};
    for (std::size_t c = 0; c < 4; ++c)
        for (const auto& [name, field] : fields) {
            std::vector<double> vals;
            for (const auto& r : reports)
                if (const auto& v = r.classes[c].*field) vals.push_back(*v);
            add(std::string(label_name(kForegroundLabels[c])), name, vals);
        }
    using MeanGetter = std::optional<double> MetricsReport::*;
    const std::array<std::pair<const char*, MeanGetter>, 3> means = {{{"dice", &MetricsReport::mean_dice},
                                                                       {"hd95_mm", &MetricsReport::mean_hd95},
                                                                       {"dscz", &MetricsReport::mean_dscz}}};
    for (const auto& [name, field] : means) {
        std::vector<double> vals;
        for (const auto& r : reports)
            if (const auto& v = r.*field) vals.push_back(*v);
        add("mean", name, vals);
    }
    return rows;
}

}  // namespace cordpipe::metrics
