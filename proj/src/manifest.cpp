#include "tonekit/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "tonekit/util.hpp"

namespace tonekit::manifest {

namespace {

std::string trim_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') {
        s.pop_back();
    }
    return s;
}

} // namespace

std::size_t Manifest::train_count() const {
    std::size_t n = 0;
    for (const auto& r : rows) {
        n += r.split == evaluation::Split::train;
    }
    return n;
}

evaluation::Split split_from_string(const std::string& s, const std::string& context) {
    if (s == "train") {
        return evaluation::Split::train;
    }
    if (s == "test") {
        return evaluation::Split::test;
    }
    throw ParseError(context + ": split must be 'train' or 'test', got '" + s + "'");
}

std::string to_string(evaluation::Split split) {
    return split == evaluation::Split::train ? "train" : "test";
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open manifest: " + path.string());
    }
    const auto base = path.parent_path();
    const bool jsonl = path.extension() == ".jsonl";

    Manifest m;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;

    auto add_row = [&](Row row, const std::string& context) {
        if (row.sample_id.empty()) {
            throw ParseError(context + ": empty sample_id");
        }
        if (row.sample_id.find_first_of("/\\") != std::string::npos || row.sample_id == "." ||
            row.sample_id == "..") {
            throw ParseError(context + ": sample_id is not usable as a file name: '" +
                             row.sample_id + "'");
        }
        if (!seen.insert(row.sample_id).second) {
            throw ParseError(context + ": duplicate sample_id '" + row.sample_id + "'");
        }
        if (row.image_path.is_relative()) {
            row.image_path = base / row.image_path;
        }
        if (row.lesion_mask_path.is_relative()) {
            row.lesion_mask_path = base / row.lesion_mask_path;
        }
        m.rows.push_back(std::move(row));
    };

    if (jsonl) {
        while (std::getline(in, line)) {
            ++line_no;
            line = trim_cr(line);
            if (line.empty()) {
                continue;
            }
            std::string context = path.filename().string() + ":" + std::to_string(line_no);
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                throw ParseError(context + ": invalid JSON object");
            }
            for (const char* key : {"sample_id", "image_path", "lesion_mask_path", "label", "split"}) {
                if (!j.contains(key)) {
                    throw ParseError(context + ": missing field '" + key + "'");
                }
            }
            Row row;
            row.sample_id = j["sample_id"].get<std::string>();
            row.image_path = j["image_path"].get<std::string>();
            row.lesion_mask_path = j["lesion_mask_path"].get<std::string>();
            row.label = j["label"].get<std::string>();
            row.split = split_from_string(j["split"].get<std::string>(), context);
            add_row(std::move(row), context);
        }
    } else {
        if (!std::getline(in, line)) {
            throw ParseError(path.string() + ": empty manifest");
        }
        ++line_no;
        auto header = util::split_csv_line(trim_cr(line));
        const std::vector<std::string> expected = {"sample_id", "image_path", "lesion_mask_path",
                                                   "label", "split"};
        if (header != expected) {
            throw ParseError(path.filename().string() +
                             ":1: header must be sample_id,image_path,lesion_mask_path,label,split");
        }
        while (std::getline(in, line)) {
            ++line_no;
            line = trim_cr(line);
            if (line.empty()) {
                continue;
            }
            std::string context = path.filename().string() + ":" + std::to_string(line_no);
            auto fields = util::split_csv_line(line);
            if (fields.size() != expected.size()) {
                throw ParseError(context + ": expected " + std::to_string(expected.size()) +
                                 " fields, got " + std::to_string(fields.size()));
            }
            Row row;
            row.sample_id = fields[0];
            row.image_path = fields[1];
            row.lesion_mask_path = fields[2];
            row.label = fields[3];
            row.split = split_from_string(fields[4], context);
            add_row(std::move(row), context);
        }
    }

    if (m.rows.empty()) {
        throw ParseError(path.string() + ": manifest has no data rows");
    }
    return m;
}

} // namespace tonekit::manifest
