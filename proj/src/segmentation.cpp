#include "roboaug/segmentation.hpp"

#include "json_endpoint.hpp"

#include "roboaug/errors.hpp"
#include "roboaug/image_io.hpp"
#include "roboaug/kernels.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>

namespace roboaug {

namespace {

int parse_int(std::string_view s, std::string_view what)
{
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end)
        throw ConfigError("invalid " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

Rgb parse_rgb(std::string_view s)
{
    int vals[3];
    for (int i = 0; i < 3; ++i) {
        const auto comma = s.find(',');
        if ((i < 2) == (comma == std::string_view::npos))
            throw ConfigError("key color must be R,G,B, got '" + std::string(s) + "'");
        vals[i] = parse_int(s.substr(0, comma), "color channel");
        if (vals[i] < 0 || vals[i] > 255)
            throw ConfigError("color channel out of range in '" + std::string(s) + "'");
        s = i < 2 ? s.substr(comma + 1) : std::string_view{};
    }
    return {static_cast<std::uint8_t>(vals[0]), static_cast<std::uint8_t>(vals[1]),
            static_cast<std::uint8_t>(vals[2])};
}

std::string param_or(const std::map<std::string, std::string>& params, const std::string& key, std::string fallback)
{
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

class PassthroughSegmenter final : public Segmenter {
public:
    explicit PassthroughSegmenter(std::shared_ptr<const GroundTruthIndex> gt) : gt_(std::move(gt)) {}

    BinaryMask segment(const SegRequest& req) override
    {
        const auto* entry = gt_ ? gt_->find(req.image) : nullptr;
        if (!entry)
            throw BackendError("passthrough backend has no ground truth for this frame");
        return req.prompt == robot_prompt ? entry->robot : entry->object;
    }

    std::string name() const override { return "passthrough"; }

private:
    std::shared_ptr<const GroundTruthIndex> gt_;
};

class ChromaSegmenter final : public Segmenter {
public:
    ChromaSegmenter(Rgb key, int tolerance) : key_(key), tolerance_(tolerance) {}

    BinaryMask segment(const SegRequest& req) override { return chroma_key_segment(req.image, key_, tolerance_); }

    std::string name() const override { return "chroma"; }

private:
    Rgb key_;
    int tolerance_;
};

class ExternalSegmenter final : public Segmenter {
public:
    explicit ExternalSegmenter(const BackendDescriptor& desc)
        : endpoint_(desc.endpoint, parse_int(param_or(desc.params, "timeout_ms", "30000"), "timeout_ms"),
                    param_or(desc.params, "concurrent", "false") == "true"),
          path_exchange_(param_or(desc.params, "exchange", "b64") == "path"),
          use_batch_route_(param_or(desc.params, "batch", "true") == "true"),
          exchange_dir_(param_or(desc.params, "exchange_dir",
                                 (std::filesystem::temp_directory_path() / "roboaug-exchange").string()))
    {
    }

    BinaryMask segment(const SegRequest& req) override
    {
        nlohmann::json body{{"prompt", req.prompt}, {"mode", "semantic"}};
        if (!path_exchange_) {
            body["image_b64"] = base64_encode(encode_png(req.image));
            const auto reply = endpoint_.post("/segment", body);
            return decode_reply_mask(reply, "mask_b64", req.image.dims());
        }
        std::filesystem::create_directories(exchange_dir_);
        static std::atomic<std::uint64_t> counter{0};
        char name[64];
        std::snprintf(name, sizeof name, "req-%llu.png", static_cast<unsigned long long>(counter++));
        const auto image_path = exchange_dir_ / name;
        write_png(req.image, image_path);
        body["image_path"] = image_path.string();
        nlohmann::json reply;
        try {
            reply = endpoint_.post("/segment", body);
        } catch (...) {
            std::filesystem::remove(image_path);
            throw;
        }
        std::filesystem::remove(image_path);
        const auto it = reply.find("mask_path");
        if (it == reply.end() || !it->is_string())
            throw ProtocolError("backend " + endpoint_.uri() + " reply lacks 'mask_path'");
        const std::filesystem::path mask_path = it->get<std::string>();
        BinaryMask mask = decode_mask(read_gray(mask_path));
        std::filesystem::remove(mask_path);
        return mask;
    }

    std::vector<BinaryMask> segment_batch(std::span<const Frame> frames, std::string_view prompt) override
    {
        if (path_exchange_ || !use_batch_route_ || frames.size() < 2)
            return Segmenter::segment_batch(frames, prompt);
        nlohmann::json images = nlohmann::json::array();
        nlohmann::json prompts = nlohmann::json::array();
        for (const auto& f : frames) {
            images.push_back(base64_encode(encode_png(f)));
            prompts.push_back(prompt);
        }
        const auto reply =
            endpoint_.post("/segment_batch", {{"images_b64", images}, {"prompts", prompts}, {"mode", "semantic"}});
        const auto it = reply.find("masks_b64");
        if (it == reply.end() || !it->is_array() || it->size() != frames.size())
            throw ProtocolError("backend " + endpoint_.uri() + " batch reply must carry " +
                                std::to_string(frames.size()) + " masks");
        std::vector<BinaryMask> out;
        for (std::size_t i = 0; i < frames.size(); ++i)
            out.push_back(decode_b64_mask((*it)[i], frames[i].dims()));
        return out;
    }

    std::string name() const override { return "external:" + endpoint_.uri(); }

private:
    BinaryMask decode_reply_mask(const nlohmann::json& reply, const char* key, Dims expect) const
    {
        const auto it = reply.find(key);
        if (it == reply.end())
            throw ProtocolError("backend " + endpoint_.uri() + " reply lacks '" + key + "'");
        return decode_b64_mask(*it, expect);
    }

    BinaryMask decode_b64_mask(const nlohmann::json& value, Dims expect) const
    {
        if (!value.is_string())
            throw ProtocolError("backend " + endpoint_.uri() + " mask payload is not a string");
        GrayImage raster;
        try {
            raster = decode_gray(base64_decode(value.get<std::string>()), "backend mask");
        } catch (const ValidationError& e) {
            throw ProtocolError("backend " + endpoint_.uri() + " sent an unusable mask: " + e.what());
        }
        if (raster.dims != expect)
            throw ProtocolError("backend " + endpoint_.uri() + " mask is " + to_string(raster.dims) +
                                ", frame is " + to_string(expect));
        return decode_mask(raster);
    }

    detail::JsonEndpoint endpoint_;
    bool path_exchange_;
    bool use_batch_route_;
    std::filesystem::path exchange_dir_;
};

} // namespace

BackendDescriptor BackendDescriptor::parse(std::string_view text)
{
    BackendDescriptor d;
    if (text == "passthrough") {
        d.kind = Kind::passthrough;
    } else if (text.starts_with("external:")) {
        d.kind = Kind::external;
        d.endpoint = detail::split_endpoint_params(text.substr(9), d.params);
    } else if (text == "chroma" || text.starts_with("chroma:")) {
        d.kind = Kind::chroma_key;
        d.params["key"] = "0,255,0";
        d.params["tolerance"] = "40";
        if (text.size() > 7) {
            const auto rest = text.substr(7);
            const auto colon = rest.find(':');
            d.params["key"] = std::string(rest.substr(0, colon));
            if (colon != std::string_view::npos)
                d.params["tolerance"] = std::string(rest.substr(colon + 1));
        }
    } else {
        throw ConfigError("unknown segmentation backend '" + std::string(text) + "'");
    }
    d.validate();
    return d;
}

std::string BackendDescriptor::to_string() const
{
    switch (kind) {
    case Kind::external: return "external:" + endpoint;
    case Kind::chroma_key:
        return "chroma:" + param_or(params, "key", "0,255,0") + ":" + param_or(params, "tolerance", "40");
    default: return "passthrough";
    }
}

void BackendDescriptor::validate() const
{
    if ((kind == Kind::external) != !endpoint.empty())
        throw ConfigError(kind == Kind::external ? "external backend needs an endpoint"
                                                 : "only external backends take an endpoint");
    if (kind == Kind::chroma_key) {
        parse_rgb(param_or(params, "key", "0,255,0"));
        const int tol = parse_int(param_or(params, "tolerance", "40"), "tolerance");
        if (tol < 0 || tol > 255)
            throw ConfigError("chroma tolerance must be within 0..255");
    }
}

void GroundTruthIndex::add(const Frame& frame, Entry entry)
{
    for (const auto* m : {&entry.robot, &entry.object})
        if (m->dims() != frame.dims())
            throw ValidationError("ground-truth mask is " + to_string(m->dims()) + ", frame is " +
                                  to_string(frame.dims()));
    for (const auto& p : entry.proposals)
        if (p.dims() != frame.dims())
            throw ValidationError("proposal mask does not match frame dims");
    const auto [it, inserted] = entries_.insert_or_assign(frame_digest(frame), std::move(entry));
    if (!inserted)
        spdlog::warn("duplicate frame content in ground truth; keeping the last masks");
}

const GroundTruthIndex::Entry* GroundTruthIndex::find(const Frame& frame) const
{
    const auto it = entries_.find(frame_digest(frame));
    return it == entries_.end() ? nullptr : &it->second;
}

GroundTruthIndex GroundTruthIndex::from_roboseg(std::span<const AnnotatedFrame> records)
{
    GroundTruthIndex idx;
    for (const auto& r : records)
        idx.add(r.image, {r.robot(), r.object, {}});
    return idx;
}

GroundTruthIndex GroundTruthIndex::from_dataset(const std::filesystem::path& root)
{
    GroundTruthIndex idx;
    DatasetReader reader(root);
    for (std::size_t e = 0; e < reader.size(); ++e) {
        const auto& entry = reader.entry(e);
        const auto masks = root / "episodes" / entry.id / "masks";
        if (!std::filesystem::is_directory(masks / "robot"))
            continue;
        const Episode ep = reader.episode(e);
        for (std::size_t i = 0; i < ep.frames.size(); ++i) {
            const auto file = frame_file_name(i);
            const auto robot_path = masks / "robot" / file;
            if (!std::filesystem::is_regular_file(robot_path))
                throw SchemaError("episode '" + ep.id + "': missing ground-truth robot mask " + file);
            Entry gt;
            gt.robot = decode_mask(read_gray(robot_path));
            const auto obj_path = masks / "object" / file;
            gt.object = std::filesystem::is_regular_file(obj_path) ? decode_mask(read_gray(obj_path))
                                                                   : BinaryMask(ep.frames[i].dims());
            for (int k = 0;; ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "%06zu_%02d.png", i, k);
                const auto p = masks / "proposals" / name;
                if (!std::filesystem::is_regular_file(p))
                    break;
                gt.proposals.push_back(decode_mask(read_gray(p)));
            }
            idx.add(ep.frames[i], std::move(gt));
        }
    }
    return idx;
}

void write_ground_truth(const std::filesystem::path& episode_dir, std::size_t frame_index,
                        const GroundTruthIndex::Entry& entry)
{
    const auto masks = episode_dir / "masks";
    for (const char* sub : {"robot", "object", "proposals"})
        std::filesystem::create_directories(masks / sub);
    const auto file = frame_file_name(frame_index);
    write_png(encode_mask(entry.robot), masks / "robot" / file);
    write_png(encode_mask(entry.object), masks / "object" / file);
    for (std::size_t k = 0; k < entry.proposals.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "%06zu_%02zu.png", frame_index, k);
        write_png(encode_mask(entry.proposals[k]), masks / "proposals" / name);
    }
}

std::vector<BinaryMask> Segmenter::segment_batch(std::span<const Frame> frames, std::string_view prompt)
{
    std::vector<BinaryMask> out;
    out.reserve(frames.size());
    for (const auto& f : frames)
        out.push_back(segment(SegRequest{f, std::string(prompt)}));
    return out;
}

std::unique_ptr<Segmenter> make_segmenter(const BackendDescriptor& desc,
                                          std::shared_ptr<const GroundTruthIndex> ground_truth)
{
    desc.validate();
    switch (desc.kind) {
    case BackendDescriptor::Kind::external: return std::make_unique<ExternalSegmenter>(desc);
    case BackendDescriptor::Kind::chroma_key:
        return std::make_unique<ChromaSegmenter>(parse_rgb(param_or(desc.params, "key", "0,255,0")),
                                                 parse_int(param_or(desc.params, "tolerance", "40"), "tolerance"));
    case BackendDescriptor::Kind::passthrough: return std::make_unique<PassthroughSegmenter>(std::move(ground_truth));
    }
    throw ConfigError("unsupported backend kind");
}

BinaryMask segment(Segmenter& backend, const SegRequest& req)
{
    if (req.prompt.empty())
        throw ConfigError("segmentation prompt must not be empty");
    BinaryMask mask = backend.segment(req);
    if (mask.dims() != req.image.dims())
        throw ProtocolError(backend.name() + " returned a " + to_string(mask.dims()) + " mask for a " +
                            to_string(req.image.dims()) + " frame");
    return mask;
}

std::vector<BinaryMask> segment_video(Segmenter& backend, std::span<const Frame> frames, std::string_view prompt,
                                      std::size_t batch_size, std::size_t first_index)
{
    if (batch_size < 1)
        throw ConfigError("batch_size must be >= 1");
    if (prompt.empty())
        throw ConfigError("segmentation prompt must not be empty");
    std::vector<BinaryMask> out;
    out.reserve(frames.size());
    for (std::size_t start = 0; start < frames.size(); start += batch_size) {
        const std::size_t n = std::min(batch_size, frames.size() - start);
        std::vector<BinaryMask> part;
        try {
            part = n == 1 ? std::vector<BinaryMask>{backend.segment(SegRequest{frames[start], std::string(prompt)})}
                          : backend.segment_batch(frames.subspan(start, n), prompt);
        } catch (const Error& e) {
            rethrow_with_context(e, n == 1 ? "frame " + std::to_string(first_index + start)
                                           : "frames " + std::to_string(first_index + start) + "-" +
                                                 std::to_string(first_index + start + n - 1));
        }
        if (part.size() != n)
            throw ProtocolError(backend.name() + " returned " + std::to_string(part.size()) + " masks for " +
                                std::to_string(n) + " frames");
        for (std::size_t i = 0; i < n; ++i) {
            if (part[i].dims() != frames[start + i].dims())
                throw ProtocolError("frame " + std::to_string(first_index + start + i) + ": " + backend.name() +
                                    " returned a " + to_string(part[i].dims()) + " mask for a " +
                                    to_string(frames[start + i].dims()) + " frame");
            out.push_back(std::move(part[i]));
        }
    }
    return out;
}

BinaryMask robot_foreground(const Frame& frame, Segmenter& robot, Segmenter& objects,
                            std::span<const std::string> object_names)
{
    BinaryMask fg = segment(robot, SegRequest{frame, std::string(robot_prompt)});
    for (const auto& name : object_names)
        kernels::or_into(fg.bits(), segment(objects, SegRequest{frame, name}).bits());
    return fg;
}

BinaryMask chroma_key_segment(const Frame& frame, Rgb key, int tolerance)
{
    BinaryMask fg(frame.dims());
    kernels::chroma_key(frame.bytes(), key, tolerance, fg.bits());
    return fg;
}

} // namespace roboaug
