#include "gea/dataset.hpp"

#include "gea/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gea {

namespace fs = std::filesystem;

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted field in CSV");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

bool is_image_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// id -> all matching files, sorted.
std::map<std::string, std::vector<fs::path>> scan(const fs::path& dir) {
  std::map<std::string, std::vector<fs::path>> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image_ext(entry.path())) continue;
    out[entry.path().stem().string()].push_back(entry.path());
  }
  for (auto& [id, files] : out) std::sort(files.begin(), files.end());
  return out;
}

Discovery from_manifest(const fs::path& dir, const fs::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + manifest.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto rows = parse_csv(ss.str());
  if (rows.empty() || rows.front() != std::vector<std::string>{"id", "low", "gt"})
    throw DataError("manifest must start with the header 'id,low,gt'");

  Discovery d;
  std::map<std::string, int> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) ++seen[rows[i].empty() ? "" : rows[i][0]];
  std::set<std::string> reported;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string id = r.empty() ? "" : r[0];
    if (r.size() != 3 || id.empty()) {
      d.skipped.push_back({id.empty() ? "<row " + std::to_string(i + 1) + ">" : id,
                           "malformed manifest row"});
      continue;
    }
    if (seen[id] > 1) {
      if (reported.insert(id).second) d.skipped.push_back({id, "duplicate id in manifest"});
      continue;
    }
    const fs::path low = dir / r[1], gt = dir / r[2];
    if (!fs::is_regular_file(low))
      d.skipped.push_back({id, "low image missing: " + low.string()});
    else if (!fs::is_regular_file(gt))
      d.skipped.push_back({id, "gt image missing: " + gt.string()});
    else
      d.pairs.push_back({id, low, gt});
  }
  return d;
}

Discovery from_layout(const fs::path& dir) {
  if (!fs::is_directory(dir / "low") || !fs::is_directory(dir / "high"))
    throw DataError("dataset directory must contain low/ and high/: " + dir.string());
  const auto lows = scan(dir / "low");
  const auto highs = scan(dir / "high");
  std::set<std::string> ids;
  for (const auto& [id, f] : lows) ids.insert(id);
  for (const auto& [id, f] : highs) ids.insert(id);

  Discovery d;
  for (const auto& id : ids) {
    const auto l = lows.find(id);
    const auto h = highs.find(id);
    if (l == lows.end()) {
      d.skipped.push_back({id, "no low image"});
    } else if (h == highs.end()) {
      d.skipped.push_back({id, "no high (gt) image"});
    } else if (l->second.size() > 1 || h->second.size() > 1) {
      d.skipped.push_back({id, "ambiguous: several files share this id"});
    } else {
      d.pairs.push_back({id, l->second.front(), h->second.front()});
    }
  }
  return d;
}

}  // namespace

Discovery discover_pairs(const fs::path& dir, const std::optional<fs::path>& manifest) {
  if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
  Discovery d;
  if (manifest)
    d = from_manifest(dir, *manifest);
  else if (fs::is_regular_file(dir / "manifest.csv"))
    d = from_manifest(dir, dir / "manifest.csv");
  else
    d = from_layout(dir);
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(d.pairs.begin(), d.pairs.end(), by_id);
  std::stable_sort(d.skipped.begin(), d.skipped.end(), by_id);
  d.discovered = d.pairs.size() + d.skipped.size();
  return d;
}

}  // namespace gea
