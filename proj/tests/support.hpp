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

#include <random>
#include <vector>

#include "cordpipe/volume.hpp"

namespace testing_support {

using namespace cordpipe;

/// Random label volume: either i.i.d. ids or a few random boxes, so both
/// speckle and compact shapes are covered.
inline LabelVolume random_labels(std::mt19937_64& rng, const Dims& d, const Spacing& s = {}) {
    std::vector<std::uint8_t> ids(d.voxels(), 0);
    std::uniform_int_distribution<int> mode(0, 2), id(0, kMaxLabel);
    const int m = mode(rng);
    if (m == 0) {
        for (auto& v : ids) v = static_cast<std::uint8_t>(id(rng));
    } else {
        std::uniform_int_distribution<int> boxes(0, 5);
        const int nb = boxes(rng);
        for (int b = 0; b < nb; ++b) {
            std::uniform_int_distribution<std::size_t> ux(0, d.nx - 1), uy(0, d.ny - 1), uz(0, d.nz - 1);
            std::size_t x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng), z0 = uz(rng), z1 = uz(rng);
            if (x0 > x1) std::swap(x0, x1);
            if (y0 > y1) std::swap(y0, y1);
            if (z0 > z1) std::swap(z0, z1);
            const auto l = static_cast<std::uint8_t>(id(rng));
            for (std::size_t z = z0; z <= z1; ++z)
                for (std::size_t y = y0; y <= y1; ++y)
                    for (std::size_t x = x0; x <= x1; ++x) ids[x + d.nx * (y + d.ny * z)] = l;
        }
        if (m == 2)  // sprinkle noise
            for (auto& v : ids)
                if (rng() % 17 == 0) v = static_cast<std::uint8_t>(id(rng));
    }
    return LabelVolume(d, s, std::move(ids));
}

inline Dims random_dims(std::mt19937_64& rng, std::size_t mx, std::size_t my, std::size_t mz) {
    return {std::uniform_int_distribution<std::size_t>(1, mx)(rng), std::uniform_int_distribution<std::size_t>(1, my)(rng),
            std::uniform_int_distribution<std::size_t>(1, mz)(rng)};
}

inline std::vector<std::uint8_t> mask_values(const LabelVolume& l, Label c) {
    std::vector<std::uint8_t> m(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) m[i] = l[i] == c;
    return m;
}

}  // namespace testing_support
