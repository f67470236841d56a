#include "roboaug/engine.hpp"

#include "roboaug/errors.hpp"
#include "roboaug/image_io.hpp"
#include "roboaug/kernels.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace roboaug {

namespace {

bool needs_assets(AugMethod m)
{
    return m == AugMethod::texture || m == AugMethod::imagenet;
}

bool needs_prompts(AugMethod m)
{
    return m == AugMethod::engine || m == AugMethod::background;
}

int thread_count(int workers)
{
#ifdef _OPENMP
    return workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
    return 1;
#endif
}

void make_dirs(const fs::path& p)
{
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw IoError("cannot create " + p.string() + ": " + ec.message());
}

void remove_tree(const fs::path& p)
{
    std::error_code ec;
    fs::remove_all(p, ec);
    if (ec)
        throw IoError("cannot remove " + p.string() + ": " + ec.message());
}

void write_frames(const std::vector<Frame>& frames, const fs::path& episode_dir)
{
    make_dirs(episode_dir / "frames");
    for (std::size_t i = 0; i < frames.size(); ++i)
        write_png(frames[i], episode_dir / "frames" / frame_file_name(i));
}

constexpr const char* done_marker = ".done";

} // namespace

void EngineConfig::validate() const
{
    if (batch_size < 1)
        throw ConfigError("batch_size must be >= 1");
    if (workers < 0)
        throw ConfigError("workers must be >= 0");
    robo_seg.validate();
    obj_seg.validate();
    aug.validate();
    if (needs_assets(aug.method) != asset_pool.has_value())
        throw ConfigError(needs_assets(aug.method)
                              ? "method '" + std::string(to_string(aug.method)) + "' needs an asset pool"
                              : "an asset pool only applies to the texture and imagenet methods");
    if (needs_prompts(aug.method) && prompts.prompts.empty() && prompt_pool.empty())
        throw ConfigError("method '" + std::string(to_string(aug.method)) + "' needs a prompt pool");
}

struct Engine::Backends {
    std::unique_ptr<Segmenter> robot;
    std::unique_ptr<Segmenter> objects;
    std::unique_ptr<Generator> generator;
    std::unique_ptr<ProposalSource> proposals;
    std::optional<AssetPool> assets;
    PromptPool prompts;
    std::string generator_name;
};

Engine::Engine(EngineConfig cfg, std::shared_ptr<const GroundTruthIndex> ground_truth)
    : Engine(cfg, make_segmenter(cfg.robo_seg, ground_truth), make_segmenter(cfg.obj_seg, ground_truth),
             ground_truth)
{
}

Engine::Engine(EngineConfig cfg, std::unique_ptr<Segmenter> robot, std::unique_ptr<Segmenter> objects,
               std::shared_ptr<const GroundTruthIndex> ground_truth)
    : cfg_(std::move(cfg)), ground_truth_(std::move(ground_truth)), backends_(std::make_unique<Backends>())
{
    cfg_.validate();
    backends_->robot = std::move(robot);
    backends_->objects = std::move(objects);
    backends_->generator = make_generator(cfg_.aug.generator);
    backends_->generator_name = cfg_.aug.generator.kind == GenBackendDescriptor::Kind::procedural
                                    ? "procedural"
                                    : "external:" + cfg_.aug.generator.endpoint;
    if (cfg_.aug.method == AugMethod::inpainting)
        backends_->proposals = make_proposal_source(cfg_.aug.proposals, ground_truth_);
    if (cfg_.asset_pool)
        backends_->assets = AssetPool::from_directory(
            cfg_.aug.method == AugMethod::texture ? AssetPool::Kind::texture : AssetPool::Kind::image,
            *cfg_.asset_pool);
    if (!cfg_.prompts.prompts.empty())
        backends_->prompts = cfg_.prompts;
    else if (!cfg_.prompt_pool.empty())
        backends_->prompts = load_prompt_pool(cfg_.prompt_pool);
}

Engine::~Engine() = default;

std::vector<std::string> Engine::names_for(const Metadata& meta) const
{
    if (!meta.object_names.empty() || !cfg_.extract_object_names)
        return meta.object_names;
    return extract_object_names(meta.instruction);
}

namespace {

struct Background {
    Frame image;
    std::optional<std::string> prompt;
    std::string source;
};

} // namespace

AugFrame Engine::gen_image(const Frame& frame, std::span<const std::string> object_names, const FrameKey& key)
{
    return run(std::span(&frame, 1), object_names, key.episode_id, key.index).front();
}

std::vector<AugFrame> Engine::gen_video(std::span<const Frame> frames, std::span<const std::string> object_names,
                                        std::string_view episode_id)
{
    return run(frames, object_names, episode_id, 0);
}

std::vector<AugFrame> Engine::run(std::span<const Frame> frames, std::span<const std::string> object_names,
                                  std::string_view episode_id, std::size_t first_index)
{
    std::vector<AugFrame> out;
    if (frames.empty())
        return out;
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (frames[i].dims() != frames[0].dims())
            throw ValidationError("frame " + std::to_string(first_index + i) + " is " + to_string(frames[i].dims()) +
                                  ", expected " + to_string(frames[0].dims()));

    const AugConfig& aug = cfg_.aug;
    const std::string method(to_string(aug.method));
    out.reserve(frames.size());
    if (aug.method == AugMethod::none) {
        for (std::size_t i = 0; i < frames.size(); ++i)
            out.push_back({frames[i], {method, frame_stream_seed(aug.seed, episode_id, first_index + i), {}, "none"}});
        return out;
    }

    std::vector<BinaryMask> fgs = segment_video(*backends_->robot, frames, robot_prompt, cfg_.batch_size, first_index);
    for (const auto& name : object_names) {
        const auto obj = segment_video(*backends_->objects, frames, name, cfg_.batch_size, first_index);
        for (std::size_t i = 0; i < frames.size(); ++i)
            kernels::or_into(fgs[i].bits(), obj[i].bits());
    }

    auto make_background = [&](const Frame& frame, const BinaryMask& fg, Rng& rng) -> Background {
        switch (aug.method) {
        case AugMethod::engine: {
            std::string prompt = sample_prompt(backends_->prompts, rng);
            Frame img = gen_background_engine(frame, fg, prompt, *backends_->generator, rng);
            return {std::move(img), std::move(prompt), backends_->generator_name};
        }
        case AugMethod::background: {
            std::string prompt = sample_prompt(backends_->prompts, rng);
            Frame img = gen_background_scene(prompt, frame.dims(), *backends_->generator, rng);
            return {std::move(img), std::move(prompt), backends_->generator_name};
        }
        case AugMethod::texture:
            return {gen_background_texture(*backends_->assets, frame.dims(), rng,
                                           {aug.resample, aug.texture_scale_jitter}),
                    std::nullopt, "texture-pool"};
        case AugMethod::imagenet:
            return {gen_background_image(*backends_->assets, frame.dims(), rng, aug.resample), std::nullopt,
                    "image-pool"};
        default: break;
        }
        throw ConfigError("method '" + method + "' does not synthesize a background");
    };

    std::optional<Background> shared;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const std::size_t index = first_index + i;
        const std::uint64_t stream = frame_stream_seed(aug.seed, episode_id, index);
        Rng rng(stream);
        try {
            if (aug.method == AugMethod::inpainting) {
                const auto proposals = region_proposals(*backends_->proposals, frames[i]);
                std::optional<std::string> prompt;
                if (!backends_->prompts.prompts.empty())
                    prompt = sample_prompt(backends_->prompts, rng);
                Frame img = inpaint_augment(frames[i], fgs[i], proposals, *backends_->generator, rng,
                                            {aug.inpaint_count, aug.inpaint_overlap}, prompt.value_or(""));
                out.push_back({std::move(img), {method, stream, prompt, backends_->generator_name}});
                continue;
            }

            Background local;
            const Background* bg = nullptr;
            if (aug.background_scope == BackgroundScope::per_episode) {
                if (!shared)
                    shared = make_background(frames[i], fgs[i], rng);
                bg = &*shared;
            } else {
                local = make_background(frames[i], fgs[i], rng);
                bg = &local;
            }

            BinaryMask fg = aug.dilate_radius > 0 ? dilate(fgs[i], aug.dilate_radius) : std::move(fgs[i]);
            Foreground blend_mask = aug.feather_radius > 0 ? Foreground{feather(fg, aug.feather_radius)}
                                                           : Foreground{std::move(fg)};
            out.push_back(composite(frames[i], blend_mask, bg->image, {method, stream, bg->prompt, bg->source}));
        } catch (const Error& e) {
            rethrow_with_context(e, "frame " + std::to_string(index));
        }
    }
    return out;
}

Episode Engine::augment_episode(const Episode& ep)
{
    validate_episode(ep);
    const auto names = names_for(ep.metadata);
    Episode out{ep.id, {}, ep.metadata};
    try {
        auto frames = gen_video(ep.frames, names, ep.id);
        out.frames.reserve(frames.size());
        for (auto& f : frames)
            out.frames.push_back(std::move(f.frame));
    } catch (const Error& e) {
        rethrow_with_context(e, "episode '" + ep.id + "'");
    }
    return out;
}

fs::path Engine::staging_dir() const
{
    fs::path out = cfg_.output;
    if (!out.has_filename())
        out = out.parent_path();
    return out.parent_path() / ("." + out.filename().string() + ".staging");
}

void Engine::prepare_staging(const fs::path& staging) const
{
    if (cfg_.output.empty())
        throw ConfigError("no output directory configured");
    std::error_code ec;
    if (fs::exists(cfg_.output, ec) && !(fs::is_directory(cfg_.output) && fs::is_empty(cfg_.output)) &&
        !cfg_.overwrite)
        throw IoError("output " + cfg_.output.string() + " already exists; pass overwrite to replace it");
    if (!cfg_.resume)
        remove_tree(staging);
    make_dirs(staging / "episodes");
}

void Engine::publish(const fs::path& staging) const
{
    for (const auto& e : fs::directory_iterator(staging / "episodes"))
        fs::remove(e.path() / done_marker);
    remove_tree(cfg_.output);
    std::error_code ec;
    fs::rename(staging, cfg_.output, ec);
    if (ec)
        throw IoError("cannot move " + staging.string() + " to " + cfg_.output.string() + ": " + ec.message());
}

DemoDataset Engine::augment_dataset(const DemoDataset& ds)
{
    std::set<std::string> ids;
    for (const auto& ep : ds.episodes)
        if (!ids.insert(ep.id).second)
            throw SchemaError("duplicate episode id '" + ep.id + "'");

    const fs::path staging = staging_dir();
    prepare_staging(staging);

    DemoDataset out;
    out.root = cfg_.output;
    out.episodes.resize(ds.episodes.size());
    std::vector<std::exception_ptr> errors(ds.episodes.size());
    const long n = static_cast<long>(ds.episodes.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(cfg_.workers))
    for (long i = 0; i < n; ++i) {
        try {
            out.episodes[i] = augment_episode(ds.episodes[i]);
            save_episode(out.episodes[i], staging / "episodes" / out.episodes[i].id);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& err : errors) {
        if (err) {
            if (!cfg_.resume)
                remove_tree(staging);
            std::rethrow_exception(err);
        }
    }
    publish(staging);
    return out;
}

fs::path Engine::augment_dataset(const fs::path& input)
{
    const DatasetReader reader(input);
    const fs::path staging = staging_dir();
    prepare_staging(staging);

    std::vector<std::exception_ptr> errors(reader.size());
    const long n = static_cast<long>(reader.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(cfg_.workers))
    for (long i = 0; i < n; ++i) {
        try {
            const auto& entry = reader.entry(i);
            const fs::path dir = staging / "episodes" / entry.id;
            if (cfg_.resume && fs::exists(dir / done_marker))
                continue;
            remove_tree(dir);
            const Episode aug = augment_episode(reader.episode(i));
            write_frames(aug.frames, dir);
            write_file(dir / "meta.json", read_file(entry.meta_path));
            write_file(dir / done_marker, std::string_view{});
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& err : errors) {
        if (err) {
            if (!cfg_.resume)
                remove_tree(staging);
            std::rethrow_exception(err);
        }
    }
    publish(staging);
    return cfg_.output;
}

// ---- scaling experiments ----------------------------------------------------

int epochs_for_factor(int factor)
{
    switch (factor) {
    case 1: return 1000;
    case 2: return 700;
    case 4: return 400;
    case 6: return 300;
    default: break;
    }
    if (factor < 1)
        throw ConfigError("scale factor must be >= 1");
    const int epochs = static_cast<int>(std::lround(1000.0 / factor));
    spdlog::warn("no calibrated epoch count for factor {}; using round(1000/{}) = {}", factor, factor, epochs);
    return epochs;
}

ScalePlan scale_plan(std::size_t n_demos, int factor, bool mix, std::uint64_t base_seed)
{
    if (n_demos < 1)
        throw ConfigError("scale plan needs at least one demo");
    if (factor < 1)
        throw ConfigError("scale factor must be >= 1");
    if (mix && factor < 2)
        throw ConfigError("a mixed plan needs factor >= 2");

    ScalePlan plan;
    plan.factor = factor;
    plan.mix = mix;
    plan.train_epochs = epochs_for_factor(factor);
    const auto copies = static_cast<std::size_t>(factor);
    plan.episodes.reserve(copies * n_demos);
    for (std::size_t copy = 0; copy < copies; ++copy) {
        const bool augmented = !(mix && copy == 0);
        const std::uint64_t seed = hash_combine(base_seed, copy);
        for (std::size_t src = 0; src < n_demos; ++src)
            plan.episodes.push_back({src, copy, seed, augmented});
    }
    return plan;
}

nlohmann::json to_json(const ScalePlan& plan)
{
    nlohmann::json eps = nlohmann::json::array();
    std::size_t originals = 0;
    for (const auto& e : plan.episodes) {
        eps.push_back(
            {{"source_id", e.source_id}, {"copy_index", e.copy_index}, {"seed", e.seed}, {"augmented", e.augmented}});
        originals += e.augmented ? 0 : 1;
    }
    return {{"factor", plan.factor},
            {"mix", plan.mix},
            {"train_epochs", plan.train_epochs},
            {"total", plan.episodes.size()},
            {"originals", originals},
            {"augmented", plan.episodes.size() - originals},
            {"episodes", eps}};
}

// ---- benchmarking & evaluation ----------------------------------------------

BenchReport bench(const EngineConfig& base, std::span<const AugMethod> methods, std::span<const Frame> frames,
                  std::span<const std::string> object_names, std::shared_ptr<const GroundTruthIndex> ground_truth)
{
    if (frames.size() < 10)
        throw ConfigError("bench needs at least 10 frames, got " + std::to_string(frames.size()));
    BenchReport report;
    for (const AugMethod m : methods) {
        EngineConfig cfg = base;
        cfg.aug.method = m;
        cfg.batch_size = 1;
        if (!needs_assets(m))
            cfg.asset_pool.reset();
        Engine engine(cfg, ground_truth);

        std::vector<double> secs;
        secs.reserve(frames.size());
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            engine.gen_image(frames[i], object_names, {"bench", i});
            const auto t1 = std::chrono::steady_clock::now();
            secs.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        double mean = 0.0;
        for (double s : secs)
            mean += s;
        mean /= static_cast<double>(secs.size());
        double var = 0.0;
        for (double s : secs)
            var += (s - mean) * (s - mean);
        var /= static_cast<double>(secs.size() - 1);
        report.results.push_back({std::string(to_string(m)), frames.size(), mean, std::sqrt(var)});
    }
    return report;
}

nlohmann::json to_json(const BenchReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json per_method = nlohmann::json::object();
    for (const auto& r : report.results) {
        rows.push_back({{"method", r.method}, {"frames", r.frames}, {"sec_per_frame", r.mean_sec},
                        {"stddev_sec", r.stddev_sec}});
        per_method[r.method] = r.mean_sec;
    }
    return {{"batch_size", 1}, {"results", rows}, {"sec_per_frame", per_method}};
}

GIoUReport eval_seg(const BackendDescriptor& backend, const fs::path& annotated_root)
{
    const auto records = load_roboseg(annotated_root);
    if (records.empty())
        throw SchemaError("no annotated images in " + annotated_root.string());
    std::shared_ptr<const GroundTruthIndex> gt;
    if (backend.kind == BackendDescriptor::Kind::passthrough)
        gt = std::make_shared<const GroundTruthIndex>(GroundTruthIndex::from_roboseg(records));
    auto seg = make_segmenter(backend, gt);

    std::vector<BinaryMask> preds, truths;
    std::vector<std::string> ids;
    for (const auto& rec : records) {
        try {
            preds.push_back(segment(*seg, SegRequest{rec.image, std::string(robot_prompt)}));
        } catch (const Error& e) {
            rethrow_with_context(e, "image '" + rec.name + "'");
        }
        truths.push_back(rec.robot());
        ids.push_back(rec.name);
    }
    return mean_giou(preds, truths, ids);
}

} // namespace roboaug
