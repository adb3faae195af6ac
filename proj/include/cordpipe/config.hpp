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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cordpipe/preprocess.hpp"
#include "cordpipe/pseudo_label.hpp"
#include "cordpipe/region_map.hpp"
#include "cordpipe/soft_labels.hpp"
#include "cordpipe/spatial_aug.hpp"

namespace cordpipe::config {

/// Flattened "section.key" -> raw value text (quotes stripped from plain strings).
using KeyValues = std::map<std::string, std::string>;

/// Parses the TOML-style subset: [section] / [a.b] headers, key = value lines,
/// '#' comments, quoted strings, bool/number scalars and flat [x, y] arrays.
/// Throws ConfigError naming the source and line.
KeyValues parse_text(std::string_view text, const std::string& source = "<config>");
KeyValues parse_file(const std::filesystem::path& path);

/// "key=value" flag override; the later one wins.
void apply_override(KeyValues& kv, std::string_view assignment);

struct PreprocessConfig {
    bool otsu = true;
    bool clahe_enabled = false;
    preprocess::ClaheConfig clahe;
    std::vector<Channel> clahe_channels{Channel::magnitude};
    bool stretch_enabled = true;
    preprocess::StretchConfig stretch;
    std::vector<Channel> stretch_channels{Channel::phase};
    /// Percentiles over the Otsu mask ("mask") or every voxel ("volume").
    bool stretch_mask_scope = true;
};

struct PipelineConfig {
    PreprocessConfig preprocess;
    augment::AugProfile augment = augment::AugProfile::none();
    std::uint64_t augment_seed = 0;
    std::optional<soft::SoftProfile> softlabel = soft::SoftProfile::soft2();
    regions::MergeThresholds merge;
    pseudo::TtaConfig tta;
    bool tta_enabled = true;
    std::string predictor = "mock";  ///< "mock" or a command template
    std::size_t threads = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Unknown keys and malformed values raise ConfigError.
PipelineConfig from_key_values(const KeyValues& kv);

/// Optional file plus overrides applied in order.
PipelineConfig load(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides);

std::string_view channel_name(Channel c);
Channel parse_channel(std::string_view s);

}  // namespace cordpipe::config
