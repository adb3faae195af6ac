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

#include <charconv>
#include <nlohmann/json.hpp>

#include "cordpipe/metrics.hpp"

namespace cordpipe::metrics {
namespace {

using nlohmann::ordered_json;

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

ordered_json value(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string report_csv_header() { return "volume_id,class,dice,hd95_mm,dscz,defined_flags\n"; }

std::string report_csv_rows(const MetricsReport& r) {
    std::string out;
    for (const auto& c : r.classes) {
        std::string flags;
        flags += c.dice ? '1' : '0';
        flags += c.hd95 ? '1' : '0';
        flags += c.dscz ? '1' : '0';
        out += csv_escape(r.volume_id) + "," + std::string(label_name(c.cls)) + "," + cell(c.dice) + "," +
               cell(c.hd95) + "," + cell(c.dscz) + "," + flags + "\n";
    }
    return out;
}

std::string reports_csv(const std::vector<MetricsReport>& reports) {
    std::string out = report_csv_header();
    for (const auto& r : reports) out += report_csv_rows(r);
    return out;
}

std::string reports_json(const std::vector<MetricsReport>& reports) {
    ordered_json root;
    root["volumes"] = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json v;
        v["volume_id"] = r.volume_id;
        v["scope"] = r.scope;
        v["scope_slices"] = r.scope_slices;
        ordered_json classes = ordered_json::object();
        for (const auto& c : r.classes) {
            ordered_json m;
            m["dice"] = value(c.dice);
            m["hd95_mm"] = value(c.hd95);
            m["dscz"] = value(c.dscz);
            m["present_in_gt"] = c.present_in_gt;
            m["present_in_pred"] = c.present_in_pred;
            if (r.scope == "sparse") m["hd95_undefined_slices"] = c.hd95_undefined_slices;
            classes[std::string(label_name(c.cls))] = std::move(m);
        }
        v["classes"] = std::move(classes);
        v["mean_dice"] = value(r.mean_dice);
        v["mean_hd95_mm"] = value(r.mean_hd95);
        v["mean_dscz"] = value(r.mean_dscz);
        root["volumes"].push_back(std::move(v));
    }
    if (!reports.empty()) {
        ordered_json agg = ordered_json::array();
        for (const auto& row : fold_aggregate(reports)) {
            ordered_json a;
            a["class"] = row.cls;
            a["metric"] = row.metric;
            a["n"] = row.n;
            a["mean"] = value(row.mean);
            a["std"] = value(row.std);
            a["cov"] = value(row.cov);
            a["cov_percent"] = value(row.cov_percent());
            agg.push_back(std::move(a));
        }
        root["aggregate"] = std::move(agg);
    }
    return root.dump(2) + "\n";
}

}  // namespace cordpipe::metrics
