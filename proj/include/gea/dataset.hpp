#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gea {

struct PairRecord {
  std::string id;
  std::filesystem::path low_path;
  std::filesystem::path gt_path;
};

struct SkippedPair {
  std::string id;
  std::string reason;
};

struct Discovery {
  std::vector<PairRecord> pairs;     // sorted by id, ids unique
  std::vector<SkippedPair> skipped;  // sorted by id
  std::size_t discovered = 0;        // pairs.size() + skipped.size()
};

// Pairs `<dir>/low/<id>.<ext>` with `<dir>/high/<id>.<ext>` (png/jpg/jpeg,
// case-insensitive). A manifest CSV with header `id,low,gt` (paths relative to
// `dir`) replaces discovery; `<dir>/manifest.csv` is used when present and no
// explicit manifest is given. Files are only checked for existence here;
// decoding happens later.
Discovery discover_pairs(const std::filesystem::path& dir,
                         const std::optional<std::filesystem::path>& manifest = std::nullopt);

// Minimal RFC 4180 record splitter (quoted fields, doubled quotes).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace gea
