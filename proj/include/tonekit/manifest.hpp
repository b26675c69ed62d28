#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/evaluation.hpp"

namespace tonekit::manifest {

struct Row {
    std::string sample_id;
    std::filesystem::path image_path;       // resolved against the manifest directory
    std::filesystem::path lesion_mask_path;
    std::string label;
    evaluation::Split split = evaluation::Split::train;
};

struct Manifest {
    std::vector<Row> rows;

    std::size_t train_count() const;
};

/// Loads a CSV (.csv, header required) or JSONL (.jsonl) manifest.
/// Relative paths resolve against the manifest's directory. Duplicate
/// sample ids and schema violations abort with a line-numbered message.
Manifest load_manifest(const std::filesystem::path& path);

evaluation::Split split_from_string(const std::string& s, const std::string& context);
std::string to_string(evaluation::Split split);

} // namespace tonekit::manifest
