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

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "cordpipe/errors.hpp"

using namespace cordpipe::cli;

int main(int argc, char** argv) {
    CLI::App app{"cordpipe: sparse-to-dense spinal cord segmentation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "cordpipe 0.1.0");

    GlobalOptions g;
    app.add_option("--config", g.config, "TOML-style pipeline config file")->check(CLI::ExistingFile);
    app.add_option("--set", g.overrides, "config override key=value (repeatable, wins over --config)");
    app.add_flag("--dry-run", g.dry_run, "validate config and inputs without writing outputs");
    app.add_option("--threads", g.threads, "worker threads (default: CORDPIPE_THREADS or all cores)");

    PreprocessOptions pre;
    auto* c_pre = app.add_subcommand("preprocess", "Otsu mask, percentile stretch and CLAHE on one channel");
    c_pre->add_option("input", pre.input, "input NIfTI (.nii or .nii.gz)")->required();
    c_pre->add_option("-o,--output", pre.output, "output NIfTI")->required();
    c_pre->add_option("--channel", pre.channel, "channel of the input")->check(CLI::IsMember({"magnitude", "phase"}));
    c_pre->add_option("--mask-from", pre.mask_from, "magnitude volume used for the Otsu mask");
    c_pre->add_option("--mask-out", pre.mask_output, "write the Otsu mask as uint8 NIfTI");

    SoftlabelOptions sl;
    auto* c_sl = app.add_subcommand("softlabel", "boundary-softened targets from exclusive labels");
    c_sl->add_option("labels", sl.labels, "label NIfTI")->required();
    c_sl->add_option("-o,--output-dir", sl.output_dir, "directory for soft_<class>.nii.gz")->required();
    c_sl->add_option("--profile", sl.profile, "none | soft1 | soft2 | soft3");

    auto* c_rg = app.add_subcommand("regions", "convert between exclusive labels and overlapping regions");
    c_rg->require_subcommand(1);
    RegionsSplitOptions rs;
    auto* c_split = c_rg->add_subcommand("split", "labels -> region_{wm,gm,lesion}.nii.gz");
    c_split->add_option("labels", rs.labels, "label NIfTI")->required();
    c_split->add_option("-o,--output-dir", rs.output_dir, "output directory")->required();
    RegionsMergeOptions rm;
    auto* c_merge = c_rg->add_subcommand("merge", "region probabilities -> exclusive labels");
    c_merge->add_option("wm", rm.wm, "white-matter region NIfTI")->required();
    c_merge->add_option("gm", rm.gm, "gray-matter region NIfTI")->required();
    c_merge->add_option("lesion", rm.lesion, "lesion region NIfTI")->required();
    c_merge->add_option("-o,--output", rm.output, "output label NIfTI")->required();

    StackOptions st;
    auto* c_st = app.add_subcommand("stack", "assemble per-slice region predictions into a dense label volume");
    c_st->add_option("slice-dir", st.slice_dir, "directory of slice_<z>.nii[.gz] (nx, ny, 3) predictions");
    c_st->add_option("--magnitude", st.magnitude, "run a predictor over this volume instead of reading slices");
    c_st->add_option("--phase", st.phase, "phase volume passed to the predictor");
    c_st->add_option("--reference", st.reference, "volume whose spacing the output takes");
    c_st->add_option("-o,--output", st.output, "output label NIfTI")->required();
    c_st->add_option("--probs-out", st.probs_dir, "also write averaged region probabilities here");
    c_st->add_flag("--ensemble", st.ensemble, "average over fold subdirectories of slice-dir");
    c_st->add_flag("--tta", st.tta, "average over flip subdirectories (identity, flip-x, ...)");
    c_st->add_option("--predictor-command", st.predictor_commands,
                     "external predictor template with {input} and {output}; repeat to ensemble");
    c_st->add_option("--mock-stretch", st.mock_stretch, "q_low q_high the input was stretched with")->expected(2);

    EvaluateOptions ev;
    auto* c_ev = app.add_subcommand("evaluate", "Dice, HD95 and inter-slice Dice against dense or sparse truth");
    c_ev->add_option("prediction", ev.prediction, "predicted label NIfTI");
    c_ev->add_option("reference", ev.reference, "ground-truth label NIfTI or sparse sidecar .json");
    c_ev->add_option("--batch", ev.batch, "manifest of 'volume_id prediction reference' lines");
    c_ev->add_option("--csv", ev.csv, "write the CSV report here (default: stdout)");
    c_ev->add_option("--json", ev.json, "write the JSON report (with aggregates) here");
    c_ev->add_option("--id", ev.volume_id, "volume id in the report");

    PhantomOptions ph;
    auto* c_ph = app.add_subcommand("phantom", "synthetic magnitude/phase/label triplet with a sparse sidecar");
    c_ph->add_option("--seed", ph.seed, "RNG seed")->required();
    c_ph->add_option("-o,--output-dir", ph.output_dir, "output directory");
    c_ph->add_option("--dims", ph.dims, "nx ny nz")->expected(3);
    c_ph->add_option("--sparse-every", ph.sparse_every, "annotate every k-th slice in the sidecar (0: none)");
    c_ph->add_option("--lesions", ph.lesions, "lesion count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << error_record("usage", "", e.what()) << '\n';
        return 1;
    }

    try {
        if (c_pre->parsed()) return run_preprocess(g, pre);
        if (c_sl->parsed()) return run_softlabel(g, sl);
        if (c_split->parsed()) return run_regions_split(g, rs);
        if (c_merge->parsed()) return run_regions_merge(g, rm);
        if (c_st->parsed()) return run_stack(g, st);
        if (c_ev->parsed()) return run_evaluate(g, ev);
        if (c_ph->parsed()) return run_phantom(g, ph);
    } catch (const CliError& e) {
        std::cerr << error_record(e.kind(), e.file(), e.what()) << '\n';
        return e.code();
    } catch (const cordpipe::IoError& e) {
        std::cerr << error_record(e.kind(), "", e.what()) << '\n';
        return 2;
    } catch (const cordpipe::Error& e) {
        std::cerr << error_record(e.kind(), "", e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << error_record("internal", "", e.what()) << '\n';
        return 2;
    }
    return 1;
}
