#include "roboaug/dataset.hpp"

#include "roboaug/errors.hpp"
#include "roboaug/image_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

namespace roboaug {

using ojson = nlohmann::ordered_json;

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool want_dirs)
{
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
        if (want_dirs ? e.is_directory() : e.is_regular_file())
            out.push_back(e.path());
    }
    if (ec)
        throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

void check_episode_id(const std::string& id)
{
    if (id.empty() || id == "." || id == ".." || id.find_first_of("/\\") != std::string::npos)
        throw SchemaError("invalid episode id '" + id + "'");
}

void make_dirs(const fs::path& p)
{
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw IoError("cannot create " + p.string() + ": " + ec.message());
}

} // namespace

bool structurally_equal(const DemoDataset& a, const DemoDataset& b)
{
    return a.episodes == b.episodes;
}

std::string metadata_to_json(const Metadata& meta)
{
    ojson j = ojson::object();
    j["instruction"] = meta.instruction;
    j["object_names"] = meta.object_names;
    j["extra"] = meta.extra;
    return j.dump(2) + "\n";
}

Metadata parse_metadata(std::string_view text, std::string_view episode_id)
{
    const std::string where = "episode '" + std::string(episode_id) + "': ";
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw SchemaError(where + "meta.json is not valid JSON: " + e.what());
    }
    if (!j.is_object())
        throw SchemaError(where + "meta.json must hold an object");

    Metadata meta;
    const auto it = j.find("instruction");
    if (it == j.end() || !it->is_string())
        throw SchemaError(where + "meta.json needs a string 'instruction'");
    meta.instruction = it->get<std::string>();
    if (meta.instruction.empty())
        throw SchemaError(where + "instruction is empty");

    if (const auto names = j.find("object_names"); names != j.end()) {
        if (!names->is_array())
            throw SchemaError(where + "'object_names' must be an array of strings");
        for (const auto& n : *names) {
            if (!n.is_string())
                throw SchemaError(where + "'object_names' must be an array of strings");
            meta.object_names.push_back(n.get<std::string>());
        }
    }
    if (const auto extra = j.find("extra"); extra != j.end()) {
        if (!extra->is_object())
            throw SchemaError(where + "'extra' must be an object");
        meta.extra = *extra;
    }
    return meta;
}

std::string frame_file_name(std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu.png", index);
    return buf;
}

DatasetReader::DatasetReader(fs::path root) : root_(std::move(root))
{
    if (!fs::is_directory(root_))
        throw IoError("dataset root " + root_.string() + " does not exist");
    const fs::path episodes = root_ / "episodes";
    if (!fs::is_directory(episodes))
        throw SchemaError("no episodes found in " + root_.string());

    for (const auto& dir : sorted_entries(episodes, true)) {
        Entry e;
        e.id = dir.filename().string();
        e.meta_path = dir / "meta.json";
        if (!fs::is_regular_file(e.meta_path))
            throw SchemaError("episode '" + e.id + "': missing meta.json");
        const auto text = read_file(e.meta_path);
        e.metadata = parse_metadata(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()), e.id);

        const fs::path frames = dir / "frames";
        if (fs::is_directory(frames)) {
            for (const auto& f : sorted_entries(frames, false))
                if (f.extension() == ".png")
                    e.frame_paths.push_back(f);
        }
        if (e.frame_paths.empty())
            throw SchemaError("episode '" + e.id + "': no frames");
        for (std::size_t i = 0; i < e.frame_paths.size(); ++i) {
            if (e.frame_paths[i].filename() != frame_file_name(i))
                throw SchemaError("episode '" + e.id + "': expected frame " + frame_file_name(i) + ", found " +
                                  e.frame_paths[i].filename().string());
            const Dims d = read_png_dims(e.frame_paths[i]);
            if (i == 0) {
                e.dims = d;
            } else if (d != e.dims) {
                throw ValidationError("episode '" + e.id + "': frame " + frame_file_name(i) + " is " + to_string(d) +
                                      ", expected " + to_string(e.dims));
            }
        }
        entries_.push_back(std::move(e));
    }
    if (entries_.empty())
        throw SchemaError("no episodes found in " + root_.string());
}

Episode DatasetReader::episode(std::size_t i) const
{
    const Entry& e = entries_.at(i);
    Episode ep{e.id, {}, e.metadata};
    ep.frames.reserve(e.frame_paths.size());
    for (const auto& p : e.frame_paths) {
        Frame f = read_frame(p);
        if (f.dims() != e.dims)
            throw ValidationError("episode '" + e.id + "': frame " + p.filename().string() + " is " +
                                  to_string(f.dims()) + ", expected " + to_string(e.dims));
        ep.frames.push_back(std::move(f));
    }
    return ep;
}

DemoDataset load_dataset(const fs::path& root)
{
    DatasetReader reader(root);
    DemoDataset ds;
    ds.root = root;
    for (std::size_t i = 0; i < reader.size(); ++i)
        ds.episodes.push_back(reader.episode(i));
    return ds;
}

void validate_episode(const Episode& ep)
{
    check_episode_id(ep.id);
    if (ep.frames.empty())
        throw SchemaError("episode '" + ep.id + "': no frames");
    if (ep.metadata.instruction.empty())
        throw SchemaError("episode '" + ep.id + "': instruction is empty");
    for (std::size_t i = 1; i < ep.frames.size(); ++i)
        if (ep.frames[i].dims() != ep.frames[0].dims())
            throw ValidationError("episode '" + ep.id + "': frame " + std::to_string(i) + " is " +
                                  to_string(ep.frames[i].dims()) + ", expected " + to_string(ep.frames[0].dims()));
}

void save_episode(const Episode& ep, const fs::path& episode_dir)
{
    validate_episode(ep);
    make_dirs(episode_dir / "frames");
    for (std::size_t i = 0; i < ep.frames.size(); ++i)
        write_png(ep.frames[i], episode_dir / "frames" / frame_file_name(i));
    write_file(episode_dir / "meta.json", metadata_to_json(ep.metadata));
}

fs::path save_dataset(const DemoDataset& ds, const fs::path& root, SaveOptions opts)
{
    std::set<std::string> ids;
    for (const auto& ep : ds.episodes) {
        if (!ids.insert(ep.id).second)
            throw SchemaError("duplicate episode id '" + ep.id + "'");
        validate_episode(ep);
    }
    std::error_code ec;
    if (fs::exists(root, ec)) {
        if (!fs::is_directory(root) || !fs::is_empty(root)) {
            if (!opts.overwrite)
                throw IoError("output " + root.string() + " already exists; pass overwrite to replace it");
            fs::remove_all(root, ec);
            if (ec)
                throw IoError("cannot remove " + root.string() + ": " + ec.message());
        }
    }
    make_dirs(root / "episodes");
    for (const auto& ep : ds.episodes)
        save_episode(ep, root / "episodes" / ep.id);
    return root;
}

std::vector<std::string> extract_object_names(std::string_view instruction)
{
    std::vector<std::string> words;
    std::string cur;
    for (char c : instruction) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty())
        words.push_back(std::move(cur));

    std::vector<std::string> names;
    auto add = [&](const std::string& w) {
        if (w != "the" && w != "to" && std::find(names.begin(), names.end(), w) == names.end())
            names.push_back(w);
    };
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i] == "the" && i + 1 < words.size())
            add(words[i + 1]);
        if (words[i] == "to" && i > 0)
            add(words[i - 1]);
    }
    return names;
}

std::vector<AnnotatedFrame> load_roboseg(const fs::path& root)
{
    if (!fs::is_directory(root))
        throw IoError("annotated set root " + root.string() + " does not exist");
    const fs::path ann_path = root / "annotations.json";
    if (!fs::is_regular_file(ann_path))
        throw SchemaError("missing " + ann_path.string());
    const auto ann_bytes = read_file(ann_path);
    nlohmann::json ann;
    try {
        ann = nlohmann::json::parse(ann_bytes.begin(), ann_bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("annotations.json is not valid JSON: " + std::string(e.what()));
    }
    if (!ann.is_object())
        throw SchemaError("annotations.json must map image names to records");
    if (!fs::is_directory(root / "images"))
        throw SchemaError("missing images/ directory in " + root.string());

    std::vector<AnnotatedFrame> out;
    std::vector<std::string> problems;
    for (const auto& img_path : sorted_entries(root / "images", false)) {
        if (img_path.extension() != ".png")
            continue;
        const std::string name = img_path.stem().string();
        const std::string file = name + ".png";
        const fs::path main_path = root / "masks" / "robot_main" / file;
        const fs::path aux_path = root / "masks" / "robot_aux" / file;
        const fs::path obj_path = root / "masks" / "object" / file;
        const auto rec_it = ann.find(name);

        bool complete = true;
        if (!fs::is_regular_file(main_path)) {
            problems.push_back("image '" + name + "': missing robot_main mask");
            complete = false;
        }
        if (!fs::is_regular_file(obj_path)) {
            problems.push_back("image '" + name + "': missing object mask");
            complete = false;
        }
        if (rec_it == ann.end()) {
            problems.push_back("image '" + name + "': missing annotation entry");
            complete = false;
        }
        if (!complete)
            continue;

        AnnotatedFrame rec;
        rec.name = name;
        rec.image = read_frame(img_path);
        auto load_mask = [&](const fs::path& p, const char* cls) {
            BinaryMask m = decode_mask(read_gray(p));
            if (m.dims() != rec.image.dims())
                throw ValidationError("image '" + name + "': " + cls + " mask is " + to_string(m.dims()) +
                                      ", image is " + to_string(rec.image.dims()));
            return m;
        };
        rec.robot_main = load_mask(main_path, "robot_main");
        rec.object = load_mask(obj_path, "object");
        if (fs::is_regular_file(aux_path)) {
            rec.robot_aux = load_mask(aux_path, "robot_aux");
        } else {
            spdlog::warn("image '{}': no robot_aux mask, using an empty mask", name);
            rec.robot_aux = BinaryMask(rec.image.dims());
        }

        const auto& r = *rec_it;
        if (!r.is_object())
            throw SchemaError("annotation for '" + name + "' must be an object");
        rec.instruction = r.value("instruction", std::string{});
        if (const auto d = r.find("descriptions"); d != r.end()) {
            if (!d->is_array())
                throw SchemaError("annotation for '" + name + "': 'descriptions' must be an array");
            for (const auto& s : *d)
                rec.descriptions.push_back(s.get<std::string>());
        }
        out.push_back(std::move(rec));
    }
    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "incomplete annotations:";
        for (const auto& p : problems)
            msg << "\n  " << p;
        throw ValidationError(msg.str());
    }
    return out;
}

void save_roboseg(const std::vector<AnnotatedFrame>& records, const fs::path& root)
{
    for (const char* sub : {"images", "masks/robot_main", "masks/robot_aux", "masks/object"})
        make_dirs(root / sub);
    ojson ann = ojson::object();
    for (const auto& rec : records) {
        const std::string file = rec.name + ".png";
        write_png(rec.image, root / "images" / file);
        write_png(encode_mask(rec.robot_main), root / "masks" / "robot_main" / file);
        write_png(encode_mask(rec.robot_aux), root / "masks" / "robot_aux" / file);
        write_png(encode_mask(rec.object), root / "masks" / "object" / file);
        ann[rec.name] = {{"instruction", rec.instruction}, {"descriptions", rec.descriptions}};
    }
    write_file(root / "annotations.json", ann.dump(2) + "\n");
}

ValidationReport validate_annotation(const AnnotatedFrame& rec, double overlap_threshold)
{
    ValidationReport report;
    const Dims d = rec.image.dims();
    bool dims_ok = true;
    for (const auto& [m, cls] : {std::pair{&rec.robot_main, "robot_main"}, std::pair{&rec.robot_aux, "robot_aux"},
                                 std::pair{&rec.object, "object"}}) {
        if (m->dims() != d) {
            dims_ok = false;
            report.violations.push_back({Violation::Kind::dimension_mismatch,
                                         std::string(cls) + " mask is " + to_string(m->dims()) + ", image is " +
                                             to_string(d)});
        }
    }
    if (dims_ok && rec.robot_main.dims() == rec.object.dims()) {
        const std::size_t main_area = rec.robot_main.popcount();
        if (main_area > 0) {
            const std::size_t shared = intersection_count(rec.robot_main, rec.object);
            const double frac = static_cast<double>(shared) / static_cast<double>(main_area);
            if (frac > overlap_threshold) {
                std::ostringstream msg;
                msg << "robot_main and object overlap on " << shared << " of " << main_area << " robot_main pixels";
                report.violations.push_back({Violation::Kind::overlap, msg.str()});
            }
        }
    }
    if (rec.instruction.empty())
        report.violations.push_back({Violation::Kind::missing_instruction, "missing instruction"});
    return report;
}

} // namespace roboaug
