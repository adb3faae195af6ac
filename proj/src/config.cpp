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

#include "cordpipe/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace cordpipe::config {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

bool valid_key(std::string_view k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    return std::all_of(k.begin(), k.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; });
}

std::string unquote(const std::string& v, const std::string& where) {
    if (v.size() >= 2 && v.front() == '"') {
        if (v.back() != '"') throw ConfigError(where + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    return v;
}

std::vector<std::string> split_list(const std::string& raw, const std::string& key) {
    std::string v = trim(raw);
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(unquote(item, key));
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || !std::isfinite(out)) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return out;
}

std::vector<Channel> to_channels(const std::string& key, const std::string& v) {
    std::vector<Channel> out;
    for (const auto& s : split_list(v, key)) {
        if (s == "both") return {Channel::magnitude, Channel::phase};
        if (s == "none") continue;
        out.push_back(parse_channel(s));
    }
    return out;
}

std::optional<Label> class_key(std::string_view s) {
    for (Label l : kForegroundLabels)
        if (s == label_name(l)) return l;
    return std::nullopt;
}

}  // namespace

KeyValues parse_text(std::string_view text, const std::string& source) {
    KeyValues kv;
    std::string section;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!valid_key(section)) throw ConfigError(where + ": bad section name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!valid_key(key)) throw ConfigError(where + ": bad key '" + key + "'");
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (kv.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
        kv[full] = value.front() == '[' ? value : unquote(value, where);
    }
    return kv;
}

KeyValues parse_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str(), path.string());
}

void apply_override(KeyValues& kv, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (!valid_key(key) || value.empty()) throw ConfigError("override '" + std::string(assignment) + "' is malformed");
    kv[key] = value.front() == '[' ? value : unquote(value, "override " + key);
}

std::string_view channel_name(Channel c) { return c == Channel::magnitude ? "magnitude" : "phase"; }

Channel parse_channel(std::string_view s) {
    if (s == "magnitude") return Channel::magnitude;
    if (s == "phase") return Channel::phase;
    throw ConfigError("unknown channel '" + std::string(s) + "'");
}

void PipelineConfig::validate() const {
    preprocess.clahe.validate();
    preprocess.stretch.validate();
    augment.validate();
    if (softlabel) softlabel->validate();
    merge.validate();
    tta.validate();
    if (predictor.empty()) throw ConfigError("predictor must be 'mock' or a command template");
}

PipelineConfig from_key_values(const KeyValues& kv) {
    PipelineConfig c;
    // Profiles first so per-field overrides land on top of them.
    if (auto it = kv.find("augment.profile"); it != kv.end()) c.augment = augment::AugProfile::by_name(it->second);
    if (auto it = kv.find("softlabel.profile"); it != kv.end()) {
        if (it->second == "none")
            c.softlabel.reset();
        else
            c.softlabel = soft::SoftProfile::by_name(it->second);
    }

    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> fixed = {
        {"preprocess.otsu", [&](auto& k, auto& v) { c.preprocess.otsu = to_bool(k, v); }},
        {"preprocess.clahe.enabled", [&](auto& k, auto& v) { c.preprocess.clahe_enabled = to_bool(k, v); }},
        {"preprocess.clahe.tiles",
         [&](auto& k, auto& v) {
             auto parts = split_list(v, k);
             if (parts.size() == 1 && parts[0].find('x') != std::string::npos) {
                 const auto x = parts[0].find('x');
                 parts = {parts[0].substr(0, x), parts[0].substr(x + 1)};
             }
             if (parts.size() == 1) parts.push_back(parts[0]);
             if (parts.size() != 2) throw ConfigError(k + ": expected tiles as N, NxM or [N, M]");
             c.preprocess.clahe.tiles_x = to_uint(k, parts[0]);
             c.preprocess.clahe.tiles_y = to_uint(k, parts[1]);
         }},
        {"preprocess.clahe.clip", [&](auto& k, auto& v) { c.preprocess.clahe.clip_limit = to_double(k, v); }},
        {"preprocess.clahe.bins", [&](auto& k, auto& v) { c.preprocess.clahe.bins = to_uint(k, v); }},
        {"preprocess.clahe.channels", [&](auto& k, auto& v) { c.preprocess.clahe_channels = to_channels(k, v); }},
        {"preprocess.stretch.enabled", [&](auto& k, auto& v) { c.preprocess.stretch_enabled = to_bool(k, v); }},
        {"preprocess.stretch.p_low", [&](auto& k, auto& v) { c.preprocess.stretch.p_low = to_double(k, v); }},
        {"preprocess.stretch.p_high", [&](auto& k, auto& v) { c.preprocess.stretch.p_high = to_double(k, v); }},
        {"preprocess.stretch.channels", [&](auto& k, auto& v) { c.preprocess.stretch_channels = to_channels(k, v); }},
        {"preprocess.stretch.scope",
         [&](auto& k, auto& v) {
             if (v != "mask" && v != "volume") throw ConfigError(k + ": expected mask or volume");
             c.preprocess.stretch_mask_scope = v == "mask";
         }},
        {"augment.profile", [](auto&, auto&) {}},
        {"augment.seed", [&](auto& k, auto& v) { c.augment_seed = to_uint(k, v); }},
        {"augment.apply_probability", [&](auto& k, auto& v) { c.augment.apply_probability = to_double(k, v); }},
        {"softlabel.profile", [](auto&, auto&) {}},
        {"softlabel.side",
         [&](auto& k, auto& v) {
             if (!c.softlabel) throw ConfigError(k + ": soft labels are disabled");
             if (v == "inner")
                 c.softlabel->side = soft::MarginSide::inner;
             else if (v == "symmetric")
                 c.softlabel->side = soft::MarginSide::symmetric;
             else
                 throw ConfigError(k + ": expected inner or symmetric");
         }},
        {"merge.tissue_thresh", [&](auto& k, auto& v) { c.merge.tissue = to_double(k, v); }},
        {"merge.lesion_thresh", [&](auto& k, auto& v) { c.merge.lesion = to_double(k, v); }},
        {"tta.enabled", [&](auto& k, auto& v) { c.tta_enabled = to_bool(k, v); }},
        {"tta.transforms",
         [&](auto& k, auto& v) {
             c.tta.transforms.clear();
             for (const auto& s : split_list(v, k)) c.tta.transforms.push_back(pseudo::parse_flip(s));
         }},
        {"predictor.command", [&](auto&, auto& v) { c.predictor = v; }},
        {"threads", [&](auto& k, auto& v) { c.threads = to_uint(k, v); }},
        {"seed", [&](auto& k, auto& v) { c.seed = to_uint(k, v); }},
    };

    for (const auto& [key, value] : kv) {
        if (auto it = fixed.find(key); it != fixed.end()) {
            it->second(key, value);
            continue;
        }
        // softlabel.<class>.weight / softlabel.<class>.kernel
        if (key.rfind("softlabel.", 0) == 0) {
            const std::string rest = key.substr(10);
            const auto dot = rest.find('.');
            const auto cls = dot == std::string::npos ? std::nullopt : class_key(rest.substr(0, dot));
            if (cls) {
                if (!c.softlabel) throw ConfigError(key + ": soft labels are disabled");
                const std::string field = rest.substr(dot + 1);
                c.softlabel->name = "custom";
                if (field == "weight") {
                    c.softlabel->of(*cls).weight = to_double(key, value);
                    continue;
                }
                if (field == "kernel") {
                    c.softlabel->of(*cls).kernel = to_uint(key, value);
                    continue;
                }
            }
        }
        throw ConfigError("unknown config key '" + key + "'");
    }
    c.validate();
    return c;
}

PipelineConfig load(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides) {
    KeyValues kv = path ? parse_file(*path) : KeyValues{};
    for (const auto& o : overrides) apply_override(kv, o);
    return from_key_values(kv);
}

}  // namespace cordpipe::config
