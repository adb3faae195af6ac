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

#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

#include "cordpipe/config.hpp"
#include "cordpipe/metrics.hpp"
#include "cordpipe/nifti.hpp"
#include "cordpipe/parallel.hpp"
#include "cordpipe/phantom.hpp"
#include "cordpipe/preprocess.hpp"
#include "cordpipe/pseudo_label.hpp"
#include "cordpipe/region_map.hpp"
#include "cordpipe/soft_labels.hpp"
#include "cordpipe/sparse_annotation.hpp"

namespace cordpipe::cli {
namespace {

// Runs f, tagging any library error with the file it concerns.
template <class F>
auto on_file(const fs::path& file, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const CliError&) {
        throw;
    } catch (const ValidationError& e) {
        throw CliError(e.kind(), 1, file.string(), e.what());
    } catch (const IoError& e) {
        throw CliError(e.kind(), 2, file.string(), e.what());
    }
}

config::PipelineConfig load_config(const GlobalOptions& g) {
    const std::string where = g.config ? g.config->string() : "";
    auto cfg = on_file(where, [&] { return config::load(g.config, g.overrides); });
    if (g.threads) cfg.threads = *g.threads;
    if (cfg.threads > 0) ::setenv("CORDPIPE_THREADS", std::to_string(cfg.threads).c_str(), 1);
    return cfg;
}

ScalarVolume load_scalar(const fs::path& p, Channel c = Channel::magnitude) {
    return on_file(p, [&] { return nifti::load_scalar(p, c); });
}

LabelVolume load_labels(const fs::path& p) {
    return on_file(p, [&] { return nifti::load_labels(p); });
}

template <class V>
void save(const fs::path& p, const V& v) {
    on_file(p, [&] {
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        nifti::save(p, v);
    });
}

void ensure_dir(const fs::path& d) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw CliError("file", 2, d.string(), "cannot create directory: " + ec.message());
}

void require_same_dims(const Dims& a, const Dims& b, const fs::path& file) {
    if (!(a == b))
        throw CliError("dimension", 1, file.string(), "dims " + to_string(b) + " do not match " + to_string(a));
}

void dry_run_ok(const std::string& command) { std::cout << "dry-run ok command=" << command << '\n'; }

bool contains(const std::vector<Channel>& v, Channel c) { return std::find(v.begin(), v.end(), c) != v.end(); }

// slice_<z>.nii[.gz] files of one directory, keyed by z.
std::map<std::size_t, fs::path> list_slices(const fs::path& dir) {
    static const std::regex pattern(R"(slice_(\d+)\.nii(\.gz)?)");
    if (!fs::is_directory(dir)) throw CliError("file", 2, dir.string(), "not a directory");
    std::map<std::size_t, fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = e.path().filename().string();
        if (!e.is_regular_file() || !std::regex_match(name, m, pattern)) continue;
        const std::size_t z = std::stoull(m[1].str());
        if (!out.emplace(z, e.path()).second)
            throw CliError("index", 1, e.path().string(), "duplicate slice index " + std::to_string(z));
    }
    if (out.empty()) throw CliError("file", 2, dir.string(), "no slice_<z>.nii files found");
    return out;
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw CliError("file", 2, dir.string(), "not a directory");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw CliError("file", 2, dir.string(), "no member subdirectories for --ensemble");
    return out;
}

struct SliceSet {
    std::vector<std::pair<std::size_t, regions::RegionPlanes>> planes;
    Spacing spacing;
};

SliceSet read_slice_dir(const fs::path& dir, std::optional<pseudo::Flip> undo) {
    SliceSet s;
    for (const auto& [z, path] : list_slices(dir)) {
        auto img = on_file(path, [&] { return nifti::load_image(path); });
        auto planes = on_file(path, [&] { return pseudo::decode_region_planes(nifti::encode(img)); });
        if (undo) planes = {pseudo::apply_flip(planes.wm, *undo), pseudo::apply_flip(planes.gm, *undo),
                            pseudo::apply_flip(planes.lesion, *undo)};
        s.spacing = {img.spacing.dx, img.spacing.dy, img.spacing.dx};
        s.planes.emplace_back(z, std::move(planes));
    }
    return s;
}

// One member's stack: plain slices, or the mean over flip subdirectories.
regions::RegionStack read_member(const fs::path& dir, bool tta, const pseudo::TtaConfig& flips, Spacing& spacing) {
    auto stack_of = [&](const SliceSet& s) {
        spacing = s.spacing;
        return on_file(dir, [&] { return pseudo::stack_slices(s.planes, s.planes.size(), s.spacing); });
    };
    if (!tta) return stack_of(read_slice_dir(dir, std::nullopt));
    std::vector<regions::RegionStack> views;
    for (pseudo::Flip f : flips.transforms) views.push_back(stack_of(read_slice_dir(dir / std::string(pseudo::flip_name(f)), f)));
    if (views.size() == 1) return std::move(views.front());
    return on_file(dir, [&] { return pseudo::ensemble(views); });
}

void write_probs(const fs::path& dir, const regions::RegionStack& s) {
    ensure_dir(dir);
    save(dir / "region_wm.nii.gz", s.wm);
    save(dir / "region_gm.nii.gz", s.gm);
    save(dir / "region_lesion.nii.gz", s.lesion);
}

std::string id_of(const fs::path& p) {
    std::string name = p.filename().string();
    for (const char* ext : {".nii.gz", ".nii", ".hdr", ".json"})
        if (name.size() > std::strlen(ext) && name.ends_with(ext)) return name.substr(0, name.size() - std::strlen(ext));
    return name;
}

metrics::MetricsReport evaluate_one(const fs::path& pred_path, const fs::path& ref_path, const std::string& id) {
    const LabelVolume pred = load_labels(pred_path);
    if (ref_path.extension() == ".json") {
        const SparseAnnotation ann =
            on_file(ref_path, [&] { return load_sparse_annotation(ref_path, pred.dims(), pred.spacing()); });
        return on_file(ref_path, [&] { return metrics::evaluate(pred, ann, id); });
    }
    const LabelVolume gt = load_labels(ref_path);
    require_same_dims(gt.dims(), pred.dims(), pred_path);
    return on_file(pred_path, [&] { return metrics::evaluate(pred, gt, id); });
}

void write_text(const fs::path& p, const std::string& text) {
    on_file(p, [&] {
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        nifti::write_file_atomic(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    });
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string error_record(const std::string& kind, const std::string& file, const std::string& message) {
    return "error kind=" + kind + " file=" + quote(file) + " message=" + quote(message);
}

int run_preprocess(const GlobalOptions& g, const PreprocessOptions& o) {
    const auto cfg = load_config(g);
    const Channel channel = config::parse_channel(o.channel);
    ScalarVolume vol = load_scalar(o.input, channel);

    std::optional<preprocess::OtsuResult> otsu;
    if (cfg.preprocess.otsu) {
        if (o.mask_from) {
            const ScalarVolume src = load_scalar(*o.mask_from);
            require_same_dims(vol.dims(), src.dims(), *o.mask_from);
            otsu = on_file(*o.mask_from, [&] { return preprocess::otsu_mask(src); });
        } else {
            if (channel != Channel::magnitude)
                throw CliError("config", 1, o.input.string(), "phase input needs --mask-from <magnitude> for the Otsu mask");
            otsu = on_file(o.input, [&] { return preprocess::otsu_mask(vol); });
        }
    }
    if (g.dry_run) {
        dry_run_ok("preprocess");
        return 0;
    }

    const MaskVolume* mask = otsu ? &otsu->mask : nullptr;
    if (mask) vol = preprocess::apply_mask(vol, *mask);
    std::ostringstream note;
    note << "preprocess file=" << quote(o.output.string()) << " channel=" << o.channel;
    if (otsu) note << " otsu_threshold=" << metrics::format_number(otsu->threshold);
    bool unit_range = false;
    if (cfg.preprocess.stretch_enabled && contains(cfg.preprocess.stretch_channels, channel)) {
        auto r = on_file(o.input, [&] {
            return preprocess::percentile_stretch_detail(vol, cfg.preprocess.stretch,
                                                         cfg.preprocess.stretch_mask_scope ? mask : nullptr);
        });
        vol = std::move(r.volume);
        unit_range = true;
        note << " q_low=" << metrics::format_number(r.q_low) << " q_high=" << metrics::format_number(r.q_high);
    }
    if (cfg.preprocess.clahe_enabled && contains(cfg.preprocess.clahe_channels, channel)) {
        if (!unit_range) vol = preprocess::minmax_normalize(vol);
        vol = on_file(o.input, [&] { return preprocess::clahe_slicewise(vol, cfg.preprocess.clahe); });
        if (mask) vol = preprocess::apply_mask(vol, *mask);
        note << " clahe=" << cfg.preprocess.clahe.tiles_x << "x" << cfg.preprocess.clahe.tiles_y;
    }
    save(o.output, vol);
    if (o.mask_output && mask) save(*o.mask_output, LabelVolume(mask->dims(), mask->spacing(), std::vector<std::uint8_t>(mask->values().begin(), mask->values().end())));
    std::cout << note.str() << '\n';
    return 0;
}

int run_softlabel(const GlobalOptions& g, const SoftlabelOptions& o) {
    GlobalOptions gg = g;
    if (o.profile) gg.overrides.push_back("softlabel.profile=" + *o.profile);
    const auto cfg = load_config(gg);
    const LabelVolume labels = load_labels(o.labels);
    if (g.dry_run) {
        dry_run_ok("softlabel");
        return 0;
    }
    ensure_dir(o.output_dir);
    SoftLabelVolume soft(labels.dims(), labels.spacing());
    if (cfg.softlabel) {
        soft = on_file(o.labels, [&] { return soft::soften(labels, *cfg.softlabel); });
    } else {
        for (Label l : kForegroundLabels) {
            auto& ch = soft.channel(l);
            for (std::size_t i = 0; i < labels.size(); ++i) ch[i] = labels[i] == l ? 1.0 : 0.0;
        }
    }
    for (Label l : kForegroundLabels)
        save(o.output_dir / ("soft_" + std::string(label_name(l)) + ".nii.gz"), soft.channel(l));
    std::cout << "softlabel profile=" << (cfg.softlabel ? cfg.softlabel->name : "none") << " dir=" << quote(o.output_dir.string())
              << '\n';
    return 0;
}

int run_regions_split(const GlobalOptions& g, const RegionsSplitOptions& o) {
    (void)load_config(g);
    const LabelVolume labels = load_labels(o.labels);
    if (g.dry_run) {
        dry_run_ok("regions split");
        return 0;
    }
    write_probs(o.output_dir, regions::to_regions(labels));
    return 0;
}

int run_regions_merge(const GlobalOptions& g, const RegionsMergeOptions& o) {
    const auto cfg = load_config(g);
    regions::RegionStack s{load_scalar(o.wm), load_scalar(o.gm), load_scalar(o.lesion)};
    require_same_dims(s.wm.dims(), s.gm.dims(), o.gm);
    require_same_dims(s.wm.dims(), s.lesion.dims(), o.lesion);
    on_file(o.wm, [&] { s.validate(); });
    if (g.dry_run) {
        dry_run_ok("regions merge");
        return 0;
    }
    save(o.output, regions::merge_regions(s, cfg.merge));
    return 0;
}

int run_stack(const GlobalOptions& g, const StackOptions& o) {
    const auto cfg = load_config(g);
    if (o.slice_dir.has_value() == o.magnitude.has_value())
        throw CliError("config", 1, "", "stack needs exactly one of <slice-dir> or --magnitude");

    regions::RegionStack stack;
    Spacing spacing;
    if (o.slice_dir) {
        std::vector<fs::path> members = o.ensemble ? sorted_subdirs(*o.slice_dir) : std::vector<fs::path>{*o.slice_dir};
        std::vector<regions::RegionStack> stacks;
        for (const auto& m : members) stacks.push_back(read_member(m, o.tta, cfg.tta, spacing));
        for (std::size_t k = 1; k < stacks.size(); ++k) require_same_dims(stacks[0].dims(), stacks[k].dims(), members[k]);
        if (g.dry_run) {
            dry_run_ok("stack");
            return 0;
        }
        stack = stacks.size() == 1 ? std::move(stacks.front()) : pseudo::ensemble(stacks);
    } else {
        const ScalarVolume mag = load_scalar(*o.magnitude);
        std::optional<ScalarVolume> phase;
        if (o.phase) {
            phase = load_scalar(*o.phase, Channel::phase);
            require_same_dims(mag.dims(), phase->dims(), *o.phase);
        }
        std::vector<std::string> commands = o.predictor_commands;
        if (commands.empty() && cfg.predictor != "mock") commands.push_back(cfg.predictor);
        std::vector<std::unique_ptr<pseudo::SlicePredictor>> owned;
        if (commands.empty()) {
            std::optional<std::pair<double, double>> stretch;
            if (o.mock_stretch.size() == 2) stretch = std::make_pair(o.mock_stretch[0], o.mock_stretch[1]);
            owned.push_back(std::make_unique<pseudo::MockPredictor>(phantom::mock_config(phantom::PhantomConfig{}, stretch)));
        }
        for (const auto& c : commands) owned.push_back(std::make_unique<pseudo::SubprocessPredictor>(c));
        if (g.dry_run) {
            dry_run_ok("stack");
            return 0;
        }
        std::vector<const pseudo::SlicePredictor*> preds;
        for (const auto& p : owned) preds.push_back(p.get());
        const pseudo::TtaConfig tta = (cfg.tta_enabled || o.tta) ? cfg.tta : pseudo::TtaConfig::identity_only();
        stack = on_file(*o.magnitude, [&] {
            return pseudo::predict_volume_ensemble(preds, mag, phase ? &*phase : nullptr, tta, cfg.threads);
        });
        spacing = mag.spacing();
    }
    if (o.reference) {
        const ScalarVolume ref = load_scalar(*o.reference);
        require_same_dims(ref.dims(), stack.dims(), *o.reference);
        spacing = ref.spacing();
    }
    for (auto* v : {&stack.wm, &stack.gm, &stack.lesion}) *v = ProbabilityVolume(v->dims(), spacing, std::vector<double>(v->values().begin(), v->values().end()));
    const LabelVolume labels = regions::merge_regions(stack, cfg.merge);
    save(o.output, labels);
    if (o.probs_dir) write_probs(*o.probs_dir, stack);
    const auto j = [&]() -> std::optional<pseudo::JitterSummary> {
        if (labels.dims().nz < 2) return std::nullopt;
        return pseudo::jitter_score(labels);
    }();
    std::cout << "stack file=" << quote(o.output.string()) << " slices=" << labels.dims().nz;
    if (j)
        for (Label l : kForegroundLabels) {
            const auto v = j->of(l);
            std::cout << " dscz_" << label_name(l) << "=" << (v ? metrics::format_number(*v) : "NA");
        }
    std::cout << '\n';
    return 0;
}

int run_evaluate(const GlobalOptions& g, const EvaluateOptions& o) {
    (void)load_config(g);
    struct Job {
        std::string id;
        fs::path pred, ref;
    };
    std::vector<Job> jobs;
    if (o.batch) {
        if (o.prediction || o.reference) throw CliError("config", 1, o.batch->string(), "--batch excludes positional inputs");
        std::ifstream in(*o.batch);
        if (!in) throw CliError("file", 2, o.batch->string(), "cannot open manifest");
        const fs::path base = o.batch->parent_path();
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
            std::istringstream ls(line);
            Job j;
            std::string p, r, extra;
            if (!(ls >> j.id)) continue;
            if (!(ls >> p >> r) || (ls >> extra))
                throw CliError("format", 2, o.batch->string(),
                               "line " + std::to_string(lineno) + ": expected 'volume_id prediction reference'");
            j.pred = fs::path(p).is_absolute() ? fs::path(p) : base / p;
            j.ref = fs::path(r).is_absolute() ? fs::path(r) : base / r;
            jobs.push_back(std::move(j));
        }
        if (jobs.empty()) throw CliError("format", 2, o.batch->string(), "manifest lists no volumes");
    } else {
        if (!o.prediction || !o.reference)
            throw CliError("config", 1, "", "evaluate needs <prediction> <reference> or --batch");
        jobs.push_back({o.volume_id.value_or(id_of(*o.prediction)), *o.prediction, *o.reference});
    }

    std::vector<std::optional<metrics::MetricsReport>> reports(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    // Volume-level parallelism; the first failure in manifest order is reported.
    parallel_for(jobs.size(), [&](std::size_t k) {
        try {
            if (g.dry_run) {
                (void)load_labels(jobs[k].pred);
                if (jobs[k].ref.extension() != ".json") (void)load_labels(jobs[k].ref);
                return;
            }
            reports[k] = evaluate_one(jobs[k].pred, jobs[k].ref, jobs[k].id);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    if (g.dry_run) {
        dry_run_ok("evaluate");
        return 0;
    }
    std::vector<metrics::MetricsReport> done;
    for (auto& r : reports) done.push_back(std::move(*r));

    const std::string csv = metrics::reports_csv(done);
    if (o.csv) write_text(*o.csv, csv);
    if (o.json) write_text(*o.json, metrics::reports_json(done));
    if (!o.csv && !o.json) std::cout << csv;
    for (const auto& r : done) {
        std::cerr << "evaluate volume_id=" << quote(r.volume_id) << " scope="
                  << (r.scope == "sparse" ? std::to_string(r.scope_slices) : std::string("dense"))
                  << " mean_dice=" << (r.mean_dice ? metrics::format_number(*r.mean_dice) : "NA") << '\n';
    }
    return 0;
}

int run_phantom(const GlobalOptions& g, const PhantomOptions& o) {
    const auto cfg = load_config(g);
    phantom::PhantomConfig pc;
    pc.seed = o.seed;
    if (o.dims.size() == 3) pc.dims = {o.dims[0], o.dims[1], o.dims[2]};
    if (o.lesions) pc.lesion_count = *o.lesions;
    (void)cfg;
    on_file(o.output_dir, [&] { pc.validate(); });
    if (g.dry_run) {
        dry_run_ok("phantom");
        return 0;
    }
    const phantom::Phantom p = on_file(o.output_dir, [&] { return phantom::generate(pc); });
    ensure_dir(o.output_dir);
    save(o.output_dir / "magnitude.nii.gz", p.magnitude);
    save(o.output_dir / "phase.nii.gz", p.phase);
    save(o.output_dir / "labels.nii.gz", p.labels);
    std::vector<std::size_t> zs;
    if (o.sparse_every > 0)
        for (std::size_t z = 0; z < pc.dims.nz; z += o.sparse_every) zs.push_back(z);
    const SparseAnnotation ann = sparse_from_dense(p.labels, zs, "phantom_" + std::to_string(o.seed));
    const fs::path sidecar = o.output_dir / "labels_sparse.json";
    on_file(sidecar, [&] { return write_sparse_annotation(ann, sidecar, "labels_sparse_planes.nii.gz"); });
    std::cout << "phantom seed=" << o.seed << " dims=" << to_string(pc.dims) << " dir=" << quote(o.output_dir.string())
              << " sparse_slices=" << zs.size() << '\n';
    return 0;
}

}  // namespace cordpipe::cli
