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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cordpipe::cli {

namespace fs = std::filesystem;

/// Library error tagged with the file being processed; carries the exit code.
class CliError : public std::runtime_error {
public:
    CliError(std::string kind, int code, std::string file, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)), code_(code), file_(std::move(file)) {}
    const std::string& kind() const { return kind_; }
    int code() const { return code_; }
    const std::string& file() const { return file_; }

private:
    std::string kind_;
    int code_;
    std::string file_;
};

struct GlobalOptions {
    std::optional<fs::path> config;
    std::vector<std::string> overrides;
    bool dry_run = false;
    std::optional<std::size_t> threads;
};

struct PreprocessOptions {
    fs::path input;
    fs::path output;
    std::string channel = "magnitude";
    std::optional<fs::path> mask_from;
    std::optional<fs::path> mask_output;
};

struct SoftlabelOptions {
    fs::path labels;
    fs::path output_dir;
    std::optional<std::string> profile;
};

struct RegionsSplitOptions {
    fs::path labels;
    fs::path output_dir;
};

struct RegionsMergeOptions {
    fs::path wm, gm, lesion;
    fs::path output;
};

struct StackOptions {
    std::optional<fs::path> slice_dir;
    std::optional<fs::path> magnitude;
    std::optional<fs::path> phase;
    std::optional<fs::path> reference;
    fs::path output;
    std::optional<fs::path> probs_dir;
    bool ensemble = false;
    bool tta = false;
    std::vector<std::string> predictor_commands;
    std::vector<double> mock_stretch;
};

struct EvaluateOptions {
    std::optional<fs::path> prediction;
    std::optional<fs::path> reference;
    std::optional<fs::path> batch;
    std::optional<fs::path> csv;
    std::optional<fs::path> json;
    std::optional<std::string> volume_id;
};

struct PhantomOptions {
    std::uint64_t seed = 0;
    fs::path output_dir = ".";
    std::vector<std::size_t> dims;
    std::size_t sparse_every = 8;
    std::optional<std::size_t> lesions;
};

int run_preprocess(const GlobalOptions& g, const PreprocessOptions& o);
int run_softlabel(const GlobalOptions& g, const SoftlabelOptions& o);
int run_regions_split(const GlobalOptions& g, const RegionsSplitOptions& o);
int run_regions_merge(const GlobalOptions& g, const RegionsMergeOptions& o);
int run_stack(const GlobalOptions& g, const StackOptions& o);
int run_evaluate(const GlobalOptions& g, const EvaluateOptions& o);
int run_phantom(const GlobalOptions& g, const PhantomOptions& o);

/// Single-line, machine-parseable error record.
std::string error_record(const std::string& kind, const std::string& file, const std::string& message);

}  // namespace cordpipe::cli
