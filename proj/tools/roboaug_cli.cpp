// roboaug: command line front end for the augmentation engine.
//
//   roboaug augment    --input DIR --output DIR --aug-method M ...
//   roboaug eval-seg   --backend B --data DIR
//   roboaug score      --raw CSV
//   roboaug scale-plan --demos N --factor K [--mix] --seed S
//   roboaug bench      --input DIR --aug-method M [--aug-method M ...]
//
// Exit codes: 0 ok, 2 config/schema, 3 backend, 4 I/O.

#include "roboaug/engine.hpp"
#include "roboaug/errors.hpp"
#include "roboaug/image_io.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

using namespace roboaug;

namespace {

struct AugmentArgs {
    std::string input, output;
    std::string method = "engine";
    std::string robo_seg = "passthrough", obj_seg = "passthrough";
    std::size_t batch_size = 1;
    std::uint64_t seed = 0;
    std::string prompt_pool;
    std::string asset_pool;
    std::string scope = "per-frame";
    int dilate = 0, feather = 0;
    std::string gen_backend = "procedural";
    std::string proposals = "grid";
    std::string resample = "bilinear";
    std::size_t inpaint_count = 5;
    double inpaint_overlap = 0.05;
    double texture_jitter = 0.0;
    int workers = 0;
    bool overwrite = false, resume = false, extract_names = false;
};

GenBackendDescriptor::Kind external_kind_for(AugMethod m)
{
    switch (m) {
    case AugMethod::background: return GenBackendDescriptor::Kind::scene_diffusion;
    case AugMethod::inpainting: return GenBackendDescriptor::Kind::inpaint_diffusion;
    default: return GenBackendDescriptor::Kind::background_diffusion;
    }
}

Resample parse_resample(const std::string& s)
{
    if (s == "nearest")
        return Resample::nearest;
    if (s == "bilinear")
        return Resample::bilinear;
    throw ConfigError("unknown resample mode '" + s + "'");
}

EngineConfig engine_config(const AugmentArgs& a)
{
    EngineConfig cfg;
    cfg.robo_seg = BackendDescriptor::parse(a.robo_seg);
    cfg.obj_seg = BackendDescriptor::parse(a.obj_seg);
    cfg.aug.method = parse_aug_method(a.method);
    cfg.aug.seed = a.seed;
    cfg.aug.background_scope = parse_background_scope(a.scope);
    cfg.aug.dilate_radius = a.dilate;
    cfg.aug.feather_radius = a.feather;
    cfg.aug.inpaint_count = a.inpaint_count;
    cfg.aug.inpaint_overlap = a.inpaint_overlap;
    cfg.aug.resample = parse_resample(a.resample);
    cfg.aug.texture_scale_jitter = a.texture_jitter;
    cfg.aug.generator = GenBackendDescriptor::parse(a.gen_backend, external_kind_for(cfg.aug.method));
    cfg.aug.proposals = ProposalDescriptor::parse(a.proposals);
    cfg.batch_size = a.batch_size;
    cfg.prompt_pool = a.prompt_pool;
    if (!a.asset_pool.empty())
        cfg.asset_pool = a.asset_pool;
    cfg.output = a.output;
    cfg.workers = a.workers;
    cfg.extract_object_names = a.extract_names;
    cfg.overwrite = a.overwrite;
    cfg.resume = a.resume;
    return cfg;
}

bool uses_passthrough(const EngineConfig& cfg)
{
    return cfg.robo_seg.kind == BackendDescriptor::Kind::passthrough ||
           cfg.obj_seg.kind == BackendDescriptor::Kind::passthrough ||
           (cfg.aug.method == AugMethod::inpainting && cfg.aug.proposals.kind == ProposalDescriptor::Kind::passthrough);
}

std::shared_ptr<const GroundTruthIndex> ground_truth_for(const EngineConfig& cfg, const std::string& input)
{
    if (!uses_passthrough(cfg))
        return nullptr;
    return std::make_shared<const GroundTruthIndex>(GroundTruthIndex::from_dataset(input));
}

void emit(const std::string& text, const std::string& out_path)
{
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    write_file(out_path, text);
}

void add_engine_options(CLI::App* cmd, AugmentArgs& a)
{
    cmd->add_option("--robo-seg", a.robo_seg, "robot segmenter: external:URI | passthrough | chroma[:R,G,B[:TOL]]");
    cmd->add_option("--obj-seg", a.obj_seg, "object segmenter: external:URI | passthrough");
    cmd->add_option("--seed", a.seed, "base seed");
    cmd->add_option("--prompt-pool", a.prompt_pool, "scene descriptions, one per line");
    cmd->add_option("--asset-pool", a.asset_pool, "texture or image directory");
    cmd->add_option("--background-scope", a.scope, "per-frame | per-episode");
    cmd->add_option("--dilate", a.dilate, "foreground dilation radius")->check(CLI::NonNegativeNumber);
    cmd->add_option("--feather", a.feather, "feather radius")->check(CLI::NonNegativeNumber);
    cmd->add_option("--gen-backend", a.gen_backend, "generator: procedural | external:URI");
    cmd->add_option("--proposals", a.proposals, "inpainting proposals: grid[:N] | passthrough | external:URI");
    cmd->add_option("--resample", a.resample, "nearest | bilinear");
    cmd->add_option("--inpaint-count", a.inpaint_count, "regions to inpaint");
    cmd->add_option("--inpaint-overlap", a.inpaint_overlap, "max proposal overlap with the foreground");
    cmd->add_option("--texture-jitter", a.texture_jitter, "extra random texture zoom");
    cmd->add_flag("--extract-object-names", a.extract_names, "guess object names from the instruction");
}

int run(int argc, char** argv)
{
    CLI::App app{"Robot demonstration augmentation"};
    app.require_subcommand(1);

    AugmentArgs aug;
    auto* augment = app.add_subcommand("augment", "augment a dataset");
    augment->add_option("--input", aug.input, "dataset root")->required();
    augment->add_option("--output", aug.output, "output root")->required();
    augment->add_option("--aug-method", aug.method, "engine|background|imagenet|texture|inpainting|none")->required();
    augment->add_option("--batch-size", aug.batch_size, "segmentation batch size")->check(CLI::PositiveNumber);
    augment->add_option("--workers", aug.workers, "episode workers (0 = default)")->check(CLI::NonNegativeNumber);
    augment->add_flag("--overwrite", aug.overwrite, "replace an existing output");
    augment->add_flag("--resume", aug.resume, "keep staging on failure and skip finished episodes");
    add_engine_options(augment, aug);

    std::string seg_backend, seg_data, seg_out;
    auto* eval = app.add_subcommand("eval-seg", "score a segmenter on an annotated set");
    eval->add_option("--backend", seg_backend, "segmenter")->required();
    eval->add_option("--data", seg_data, "annotated root")->required();
    eval->add_option("--out", seg_out, "write JSON here instead of stdout");

    std::string raw_csv, score_format = "both", score_out;
    auto* score = app.add_subcommand("score", "normalize raw behavior scores");
    score->add_option("--raw", raw_csv, "raw score CSV")->required();
    score->add_option("--format", score_format, "text | json | both")
        ->check(CLI::IsMember({"text", "json", "both"}));
    score->add_option("--json-out", score_out, "also write JSON here");

    std::size_t demos = 0;
    int factor = 1;
    bool mix = false;
    std::uint64_t plan_seed = 0;
    auto* plan = app.add_subcommand("scale-plan", "plan a scaled training set");
    plan->add_option("--demos", demos, "original demos")->required();
    plan->add_option("--factor", factor, "scale factor")->required();
    plan->add_flag("--mix", mix, "keep the originals");
    plan->add_option("--seed", plan_seed, "base seed");

    AugmentArgs bench_args;
    std::vector<std::string> bench_methods;
    std::string bench_out;
    auto* bench_cmd = app.add_subcommand("bench", "time per-frame augmentation");
    bench_cmd->add_option("--input", bench_args.input, "dataset root")->required();
    bench_cmd->add_option("--aug-method", bench_methods, "methods to time")->required();
    bench_cmd->add_option("--out", bench_out, "write JSON here instead of stdout");
    add_engine_options(bench_cmd, bench_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*augment) {
        const EngineConfig cfg = engine_config(aug);
        Engine engine(cfg, ground_truth_for(cfg, aug.input));
        const auto out = engine.augment_dataset(fs::path(aug.input));
        spdlog::info("wrote {}", out.string());
    } else if (*eval) {
        const auto report = eval_seg(BackendDescriptor::parse(seg_backend), seg_data);
        emit(to_json(report).dump(2) + "\n", seg_out);
    } else if (*score) {
        const auto report = score_table(RawScoreTable::read_csv(fs::path(raw_csv)));
        const auto json = to_json(report).dump(2) + "\n";
        if (score_format != "json")
            std::cout << to_text(report);
        if (score_format != "text")
            std::cout << json;
        if (!score_out.empty())
            write_file(score_out, json);
    } else if (*plan) {
        std::cout << to_json(scale_plan(demos, factor, mix, plan_seed)).dump(2) << "\n";
    } else if (*bench_cmd) {
        std::vector<AugMethod> methods;
        for (const auto& m : bench_methods)
            methods.push_back(parse_aug_method(m));
        bench_args.method = bench_methods.front();
        EngineConfig cfg = engine_config(bench_args);

        const DatasetReader reader(bench_args.input);
        std::vector<Frame> frames;
        for (std::size_t i = 0; i < reader.size(); ++i) {
            auto ep = reader.episode(i);
            for (auto& f : ep.frames)
                frames.push_back(std::move(f));
        }
        auto names = reader.entry(0).metadata.object_names;
        if (names.empty() && cfg.extract_object_names)
            names = extract_object_names(reader.entry(0).metadata.instruction);
        const auto report = bench(cfg, methods, frames, names, ground_truth_for(cfg, bench_args.input));
        emit(to_json(report).dump(2) + "\n", bench_out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
