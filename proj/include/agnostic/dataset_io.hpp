#pragma once

#include <filesystem>

#include "agnostic/dataset.hpp"
#include "agnostic/pgm.hpp"

namespace agnostic {

inline constexpr const char* kManifestName = "manifest.csv";

// Writes `<id>.pgm` and its shape mask `<id>.mask.pgm` per example, and manifest.csv with columns
// `filename,target_label,protected_label,split` (target_label "-" when
// absent). Creates `dir` if needed.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Inverse of save_dataset. A directory without a manifest loads as an empty
// dataset; a missing mask file loads as an all-zero mask. Malformed rows or images throw FormatError naming file and line.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace agnostic
