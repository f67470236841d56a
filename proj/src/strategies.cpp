#include "roboaug/strategies.hpp"

#include "json_endpoint.hpp"
#include "pixel_math.hpp"

#include "roboaug/errors.hpp"
#include "roboaug/image_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>

namespace roboaug {

// ---- prompt pool -----------------------------------------------------------

PromptPool load_prompt_pool(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open prompt pool " + path.string());
    PromptPool pool;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        pool.prompts.push_back(line);
    }
    if (pool.prompts.empty())
        throw ConfigError("prompt pool " + path.string() + " is empty");
    return pool;
}

void save_prompt_pool(const PromptPool& pool, const fs::path& path)
{
    std::string text;
    for (const auto& p : pool.prompts) {
        if (p.find('\n') != std::string::npos)
            throw ConfigError("prompts cannot contain newlines");
        text += p;
        text += '\n';
    }
    write_file(path, text);
}

const std::string& sample_prompt(const PromptPool& pool, Rng& rng)
{
    if (pool.prompts.empty())
        throw ConfigError("cannot sample from an empty prompt pool");
    return pool.prompts[rng.uniform_index(pool.prompts.size())];
}

// ---- asset pools -----------------------------------------------------------

struct AssetPool::Cache {
    std::mutex mutex;
    std::vector<std::shared_ptr<const Frame>> frames;
};

AssetPool::AssetPool(Kind kind, std::vector<fs::path> entries)
    : kind_(kind), entries_(std::move(entries)), cache_(std::make_shared<Cache>())
{
    if (entries_.empty())
        throw ConfigError("asset pool is empty");
    cache_->frames.resize(entries_.size());
}

AssetPool AssetPool::from_directory(Kind kind, const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw IoError("asset pool directory " + dir.string() + " does not exist");
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file())
            continue;
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
            entries.push_back(e.path());
    }
    std::sort(entries.begin(), entries.end());
    if (entries.empty())
        throw ConfigError("asset pool directory " + dir.string() + " holds no images");
    return AssetPool(kind, std::move(entries));
}

std::shared_ptr<const Frame> AssetPool::load(std::size_t i) const
{
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->frames.at(i);
    if (!slot) {
        try {
            slot = std::make_shared<const Frame>(read_frame(entries_[i]));
        } catch (const Error& e) {
            throw ValidationError("asset '" + entries_[i].string() + "' is unusable: " + e.what());
        }
    }
    return slot;
}

Frame cover_crop(const Frame& src, Dims dims, Resample mode, double extra_scale)
{
    const double scale = std::max(static_cast<double>(dims.width) / src.width(),
                                  static_cast<double>(dims.height) / src.height()) *
                         extra_scale;
    const CoverMap map{scale, static_cast<int>(std::floor((src.width() * scale - dims.width) / 2.0 + 1e-9)),
                       static_cast<int>(std::floor((src.height() * scale - dims.height) / 2.0 + 1e-9))};
    Frame out(dims);
    kernels::resample(src.bytes(), src.dims(), out.bytes(), dims, map, mode);
    return out;
}

Frame gen_background_texture(const AssetPool& pool, Dims dims, Rng& rng, TextureOptions opts)
{
    if (pool.kind() != AssetPool::Kind::texture)
        throw ConfigError("texture strategy needs a texture pool");
    if (opts.scale_jitter < 0.0)
        throw ConfigError("texture scale jitter must be >= 0");
    const auto asset = pool.load(rng.uniform_index(pool.size()));
    const double zoom = opts.scale_jitter > 0.0 ? 1.0 + opts.scale_jitter * rng.uniform01() : 1.0;
    return cover_crop(*asset, dims, opts.resample, zoom);
}

Frame gen_background_image(const AssetPool& pool, Dims dims, Rng& rng, Resample mode)
{
    if (pool.kind() != AssetPool::Kind::image)
        throw ConfigError("image strategy needs an image pool");
    const auto asset = pool.load(rng.uniform_index(pool.size()));
    return cover_crop(*asset, dims, mode);
}

// ---- generative backends ---------------------------------------------------

namespace {

std::string param_or(const std::map<std::string, std::string>& params, const std::string& key, std::string fallback)
{
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

int parse_int(std::string_view s, std::string_view what)
{
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end)
        throw ConfigError("invalid " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

Rgb palette_color(std::uint64_t h, int lo, int hi)
{
    auto channel = [&](int shift) {
        return static_cast<std::uint8_t>(lo + static_cast<int>((h >> shift) & 0xff) * (hi - lo) / 255);
    };
    return {channel(0), channel(8), channel(16)};
}

Rgb scale_color(Rgb c, double f)
{
    return {detail::to_byte(c.r * f), detail::to_byte(c.g * f), detail::to_byte(c.b * f)};
}

std::uint64_t mask_hash(const BinaryMask& m)
{
    std::uint64_t h = hash_combine(static_cast<std::uint64_t>(m.width()), static_cast<std::uint64_t>(m.height()));
    std::uint64_t word = 0;
    int nbits = 0;
    for (auto b : m.bits()) {
        word = (word << 1) | b;
        if (++nbits == 64) {
            h = hash_combine(h, word);
            word = 0;
            nbits = 0;
        }
    }
    return hash_combine(h, word ^ static_cast<std::uint64_t>(nbits));
}

std::string_view kind_name(GenBackendDescriptor::Kind k)
{
    switch (k) {
    case GenBackendDescriptor::Kind::background_diffusion: return "background";
    case GenBackendDescriptor::Kind::scene_diffusion: return "scene";
    case GenBackendDescriptor::Kind::inpaint_diffusion: return "inpaint";
    default: return "procedural";
    }
}

Frame splice(const Frame& base, const Frame& patch, const BinaryMask& region)
{
    Frame out(base.dims());
    kernels::select(patch.bytes(), region.bits(), base.bytes(), out.bytes());
    return out;
}

class ProceduralGenerator final : public Generator {
public:
    Frame background(const Frame& frame, const BinaryMask& foreground, std::string_view prompt,
                     std::uint64_t seed) override
    {
        Frame out(frame.dims());
        kernels::render_scene(procedural_scene(prompt, frame.dims(), seed, &foreground), frame.dims(), out.bytes());
        return out;
    }

    Frame scene(std::string_view prompt, Dims dims, std::uint64_t seed) override
    {
        Frame out(dims);
        kernels::render_scene(procedural_scene(prompt, dims, seed), dims, out.bytes());
        return out;
    }

    Frame inpaint(const Frame& frame, const BinaryMask& region, std::string_view prompt, std::uint64_t seed) override
    {
        // Fill with noise tinted by the mean color of a ring around the region.
        const BinaryMask ring = mask_difference(dilate(region, 3), region);
        const BinaryMask& context = ring.none() ? complement(region) : ring;
        std::array<std::uint64_t, 3> sum{};
        std::uint64_t n = 0;
        const auto bits = context.bits();
        const auto px = frame.bytes();
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (!bits[i])
                continue;
            for (int c = 0; c < 3; ++c)
                sum[c] += px[3 * i + c];
            ++n;
        }
        Rgb mean{128, 128, 128};
        if (n > 0)
            mean = {static_cast<std::uint8_t>(sum[0] / n), static_cast<std::uint8_t>(sum[1] / n),
                    static_cast<std::uint8_t>(sum[2] / n)};

        NoiseScene fill;
        fill.seed = hash_combine(seed, hash_text(prompt));
        fill.horizon = 0;
        fill.lower_a = scale_color(mean, 0.95);
        fill.lower_b = scale_color(mean, 1.15);
        fill.base_cell = 8.0;
        fill.octaves = 3;
        Frame patch(frame.dims());
        kernels::render_scene(fill, frame.dims(), patch.bytes());
        return splice(frame, patch, region);
    }

    GenBackendDescriptor::Kind kind() const override { return GenBackendDescriptor::Kind::procedural; }
};

class ExternalGenerator final : public Generator {
public:
    explicit ExternalGenerator(const GenBackendDescriptor& desc)
        : kind_(desc.kind),
          endpoint_(desc.endpoint, parse_int(param_or(desc.params, "timeout_ms", "120000"), "timeout_ms"),
                    param_or(desc.params, "concurrent", "false") == "true")
    {
    }

    Frame background(const Frame& frame, const BinaryMask& foreground, std::string_view prompt,
                     std::uint64_t seed) override
    {
        auto body = request("background", prompt, frame.dims(), seed);
        body["image_b64"] = base64_encode(encode_png(frame));
        body["mask_b64"] = base64_encode(encode_png(encode_mask(foreground)));
        return reply_image(endpoint_.post("/generate", body), frame.dims());
    }

    Frame scene(std::string_view prompt, Dims dims, std::uint64_t seed) override
    {
        return reply_image(endpoint_.post("/generate", request("scene", prompt, dims, seed)), dims);
    }

    Frame inpaint(const Frame& frame, const BinaryMask& region, std::string_view prompt, std::uint64_t seed) override
    {
        auto body = request("inpaint", prompt, frame.dims(), seed);
        body["image_b64"] = base64_encode(encode_png(frame));
        body["mask_b64"] = base64_encode(encode_png(encode_mask(region)));
        // Only the requested region is taken from the model output.
        return splice(frame, reply_image(endpoint_.post("/generate", body), frame.dims()), region);
    }

    GenBackendDescriptor::Kind kind() const override { return kind_; }

private:
    static nlohmann::json request(std::string_view kind, std::string_view prompt, Dims dims, std::uint64_t seed)
    {
        return {{"prompt", prompt},  {"width", dims.width},
                {"height", dims.height}, {"seed", seed & 0x7fffffffULL},
                {"kind", kind}};
    }

    Frame reply_image(const nlohmann::json& reply, Dims expect) const
    {
        const auto it = reply.find("image_b64");
        if (it == reply.end() || !it->is_string())
            throw ProtocolError("generator " + endpoint_.uri() + " reply lacks 'image_b64'");
        Frame img;
        try {
            img = decode_frame(base64_decode(it->get<std::string>()), "generated image");
        } catch (const ValidationError& e) {
            throw ProtocolError("generator " + endpoint_.uri() + " sent an unusable image: " + e.what());
        }
        if (img.dims() != expect)
            throw ProtocolError("generator " + endpoint_.uri() + " image is " + to_string(img.dims()) +
                                ", expected " + to_string(expect));
        return img;
    }

    GenBackendDescriptor::Kind kind_;
    detail::JsonEndpoint endpoint_;
};

void require_kind(const Generator& g, GenBackendDescriptor::Kind want, std::string_view op)
{
    if (g.kind() != GenBackendDescriptor::Kind::procedural && g.kind() != want)
        throw ConfigError(std::string(op) + " needs a " + std::string(kind_name(want)) +
                          " generator or the procedural backend");
}

} // namespace

GenBackendDescriptor GenBackendDescriptor::parse(std::string_view text, Kind external_kind)
{
    GenBackendDescriptor d;
    if (text == "procedural") {
        d.kind = Kind::procedural;
    } else if (text.starts_with("external:")) {
        d.kind = external_kind;
        d.endpoint = detail::split_endpoint_params(text.substr(9), d.params);
    } else {
        throw ConfigError("unknown generator backend '" + std::string(text) + "'");
    }
    d.validate();
    return d;
}

void GenBackendDescriptor::validate() const
{
    if ((kind != Kind::procedural) == endpoint.empty())
        throw ConfigError(kind == Kind::procedural ? "the procedural generator takes no endpoint"
                                                   : "generator backend needs an endpoint");
}

std::unique_ptr<Generator> make_generator(const GenBackendDescriptor& desc)
{
    desc.validate();
    if (desc.kind == GenBackendDescriptor::Kind::procedural)
        return std::make_unique<ProceduralGenerator>();
    return std::make_unique<ExternalGenerator>(desc);
}

NoiseScene procedural_scene(std::string_view prompt, Dims dims, std::uint64_t seed, const BinaryMask* foreground)
{
    const std::uint64_t ph = hash_text(prompt);
    std::uint64_t s = hash_combine(hash_combine(seed, ph), hash_combine(dims.width, dims.height));

    NoiseScene scene;
    scene.upper_a = palette_color(splitmix64(ph ^ 0x1111), 120, 235);
    scene.upper_b = palette_color(splitmix64(ph ^ 0x2222), 120, 235);
    scene.lower_a = palette_color(splitmix64(ph ^ 0x3333), 40, 190);
    scene.lower_b = palette_color(splitmix64(ph ^ 0x4444), 40, 190);
    scene.base_cell = std::max(4.0, std::min(dims.width, dims.height) / 6.0);

    const double u = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
    scene.horizon = static_cast<int>(dims.height * (0.3 + 0.25 * u));
    if (foreground) {
        s = hash_combine(s, mask_hash(*foreground));
        // Put the table edge above the lower half of the foreground so the
        // manipulated objects rest on the table surface.
        if (const auto box = bbox(*foreground))
            scene.horizon = std::clamp(box->y0 + (box->y1 - box->y0) / 2, dims.height / 5, (4 * dims.height) / 5);
    }
    scene.seed = s;
    return scene;
}

Frame gen_background_engine(const Frame& frame, const BinaryMask& foreground, std::string_view prompt,
                            Generator& backend, Rng& rng)
{
    if (foreground.dims() != frame.dims())
        throw ValidationError("foreground mask is " + to_string(foreground.dims()) + ", frame is " +
                              to_string(frame.dims()));
    require_kind(backend, GenBackendDescriptor::Kind::background_diffusion, "engine strategy");
    const std::uint64_t seed = rng.next();
    try {
        return backend.background(frame, foreground, prompt, seed);
    } catch (const Error& e) {
        rethrow_with_context(e, "background generation for prompt '" + std::string(prompt) + "'");
    }
}

Frame gen_background_scene(std::string_view prompt, Dims dims, Generator& backend, Rng& rng)
{
    require_kind(backend, GenBackendDescriptor::Kind::scene_diffusion, "background strategy");
    const std::uint64_t seed = rng.next();
    try {
        return backend.scene(prompt, dims, seed);
    } catch (const Error& e) {
        rethrow_with_context(e, "scene generation for prompt '" + std::string(prompt) + "'");
    }
}

// ---- inpainting ------------------------------------------------------------

ProposalDescriptor ProposalDescriptor::parse(std::string_view text)
{
    ProposalDescriptor d;
    if (text == "passthrough") {
        d.kind = Kind::passthrough;
    } else if (text.starts_with("external:")) {
        d.kind = Kind::external;
        d.endpoint = detail::split_endpoint_params(text.substr(9), d.params);
        if (d.endpoint.empty())
            throw ConfigError("external proposal source needs an endpoint");
    } else if (text == "grid" || text.starts_with("grid:")) {
        d.kind = Kind::grid;
        if (text.size() > 5)
            d.cells = parse_int(text.substr(5), "grid size");
        if (d.cells < 1)
            throw ConfigError("grid size must be >= 1");
    } else {
        throw ConfigError("unknown proposal source '" + std::string(text) + "'");
    }
    return d;
}

namespace {

class GridProposals final : public ProposalSource {
public:
    explicit GridProposals(int cells) : cells_(cells) {}

    std::vector<BinaryMask> propose(const Frame& frame) override
    {
        std::vector<BinaryMask> out;
        const Dims d = frame.dims();
        for (int gy = 0; gy < cells_; ++gy) {
            for (int gx = 0; gx < cells_; ++gx) {
                const int x0 = gx * d.width / cells_, x1 = (gx + 1) * d.width / cells_;
                const int y0 = gy * d.height / cells_, y1 = (gy + 1) * d.height / cells_;
                BinaryMask m(d);
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        m.set(x, y);
                out.push_back(std::move(m));
            }
        }
        return out;
    }

private:
    int cells_;
};

class StoredProposals final : public ProposalSource {
public:
    explicit StoredProposals(std::shared_ptr<const GroundTruthIndex> gt) : gt_(std::move(gt)) {}

    std::vector<BinaryMask> propose(const Frame& frame) override
    {
        const auto* e = gt_ ? gt_->find(frame) : nullptr;
        if (!e)
            throw BackendError("passthrough proposal source has no ground truth for this frame");
        return e->proposals;
    }

private:
    std::shared_ptr<const GroundTruthIndex> gt_;
};

class ExternalProposals final : public ProposalSource {
public:
    explicit ExternalProposals(const ProposalDescriptor& d)
        : endpoint_(d.endpoint, parse_int(param_or(d.params, "timeout_ms", "60000"), "timeout_ms"),
                    param_or(d.params, "concurrent", "false") == "true")
    {
    }

    std::vector<BinaryMask> propose(const Frame& frame) override
    {
        const auto reply = endpoint_.post("/proposals", {{"image_b64", base64_encode(encode_png(frame))}});
        const auto it = reply.find("masks_b64");
        if (it == reply.end() || !it->is_array())
            throw ProtocolError("proposal backend " + endpoint_.uri() + " reply lacks 'masks_b64'");
        std::vector<BinaryMask> out;
        for (const auto& m : *it) {
            if (!m.is_string())
                throw ProtocolError("proposal backend " + endpoint_.uri() + " mask is not a string");
            GrayImage g;
            try {
                g = decode_gray(base64_decode(m.get<std::string>()), "proposal mask");
            } catch (const ValidationError& e) {
                throw ProtocolError("proposal backend " + endpoint_.uri() + ": " + e.what());
            }
            out.push_back(decode_mask(g));
        }
        return out;
    }

private:
    detail::JsonEndpoint endpoint_;
};

struct RankKey {
    std::size_t area;
    int y0, x0;
};

bool ranks_before(const RankKey& a, const RankKey& b)
{
    if (a.area != b.area)
        return a.area > b.area;
    if (a.y0 != b.y0)
        return a.y0 < b.y0;
    return a.x0 < b.x0;
}

RankKey rank_key(const BinaryMask& m)
{
    const auto box = bbox(m);
    return {m.popcount(), box ? box->y0 : 0, box ? box->x0 : 0};
}

} // namespace

std::unique_ptr<ProposalSource> make_proposal_source(const ProposalDescriptor& desc,
                                                     std::shared_ptr<const GroundTruthIndex> ground_truth)
{
    switch (desc.kind) {
    case ProposalDescriptor::Kind::grid: return std::make_unique<GridProposals>(desc.cells);
    case ProposalDescriptor::Kind::passthrough: return std::make_unique<StoredProposals>(std::move(ground_truth));
    case ProposalDescriptor::Kind::external: return std::make_unique<ExternalProposals>(desc);
    }
    throw ConfigError("unsupported proposal source");
}

std::vector<BinaryMask> region_proposals(ProposalSource& source, const Frame& frame)
{
    std::vector<BinaryMask> props = source.propose(frame);
    std::vector<std::pair<RankKey, BinaryMask>> keyed;
    for (auto& p : props) {
        if (p.dims() != frame.dims())
            throw ProtocolError("proposal mask is " + to_string(p.dims()) + ", frame is " + to_string(frame.dims()));
        auto key = rank_key(p);
        if (key.area > 0)
            keyed.emplace_back(key, std::move(p));
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return ranks_before(a.first, b.first); });
    std::vector<BinaryMask> out;
    out.reserve(keyed.size());
    for (auto& [k, m] : keyed)
        out.push_back(std::move(m));
    return out;
}

std::vector<std::size_t> select_inpaint_targets(const BinaryMask& foreground, std::span<const BinaryMask> proposals,
                                                InpaintOptions opts)
{
    std::vector<std::pair<RankKey, std::size_t>> candidates;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const auto& p = proposals[i];
        if (p.dims() != foreground.dims())
            throw ValidationError("proposal " + std::to_string(i) + " is " + to_string(p.dims()) + ", frame is " +
                                  to_string(foreground.dims()));
        const auto key = rank_key(p);
        if (key.area == 0)
            continue;
        const auto shared = intersection_count(p, foreground);
        if (static_cast<double>(shared) <= opts.overlap_threshold * static_cast<double>(key.area))
            candidates.emplace_back(key, i);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return ranks_before(a.first, b.first); });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < candidates.size() && i < opts.count; ++i)
        out.push_back(candidates[i].second);
    return out;
}

Frame inpaint_augment(const Frame& frame, const BinaryMask& foreground, std::span<const BinaryMask> proposals,
                      Generator& backend, Rng& rng, InpaintOptions opts, std::string_view prompt)
{
    if (foreground.dims() != frame.dims())
        throw ValidationError("foreground mask does not match frame dims");
    require_kind(backend, GenBackendDescriptor::Kind::inpaint_diffusion, "inpainting strategy");
    const std::uint64_t seed = rng.next();
    if (proposals.empty()) {
        spdlog::warn("no region proposals; frame left unchanged");
        return frame;
    }
    const auto chosen = select_inpaint_targets(foreground, proposals, opts);
    if (chosen.empty())
        return frame;
    BinaryMask region(frame.dims());
    for (auto i : chosen)
        kernels::or_into(region.bits(), proposals[i].bits());
    region = mask_difference(region, foreground);
    if (region.none())
        return frame;
    Frame patched;
    try {
        patched = backend.inpaint(frame, region, prompt, seed);
    } catch (const Error& e) {
        rethrow_with_context(e, "inpainting");
    }
    if (patched.dims() != frame.dims())
        throw ProtocolError("inpainting backend changed frame dimensions");
    // Enforce locality regardless of what the backend did elsewhere.
    return splice(frame, patched, region);
}

// ---- configuration -----------------------------------------------------------

AugMethod parse_aug_method(std::string_view text)
{
    if (text == "engine" || text == "robo_engine")
        return AugMethod::engine;
    if (text == "background")
        return AugMethod::background;
    if (text == "imagenet")
        return AugMethod::imagenet;
    if (text == "texture")
        return AugMethod::texture;
    if (text == "inpainting")
        return AugMethod::inpainting;
    if (text == "none")
        return AugMethod::none;
    throw ConfigError("unknown augmentation method '" + std::string(text) + "'");
}

std::string_view to_string(AugMethod m)
{
    switch (m) {
    case AugMethod::engine: return "engine";
    case AugMethod::background: return "background";
    case AugMethod::imagenet: return "imagenet";
    case AugMethod::texture: return "texture";
    case AugMethod::inpainting: return "inpainting";
    case AugMethod::none: return "none";
    }
    return "?";
}

BackgroundScope parse_background_scope(std::string_view text)
{
    if (text == "per-frame" || text == "per_frame")
        return BackgroundScope::per_frame;
    if (text == "per-episode" || text == "per_episode")
        return BackgroundScope::per_episode;
    throw ConfigError("unknown background scope '" + std::string(text) + "'");
}

std::string_view to_string(BackgroundScope s)
{
    return s == BackgroundScope::per_frame ? "per_frame" : "per_episode";
}

void AugConfig::validate() const
{
    if (dilate_radius < 0 || feather_radius < 0)
        throw ConfigError("dilate/feather radius must be >= 0");
    if (inpaint_overlap < 0.0 || inpaint_overlap > 1.0)
        throw ConfigError("inpaint overlap threshold must be within [0,1]");
    if (texture_scale_jitter < 0.0)
        throw ConfigError("texture scale jitter must be >= 0");
    generator.validate();
}

} // namespace roboaug
