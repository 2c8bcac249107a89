#include "gea/serialize.hpp"

#include "gea/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace gea {

Json number(double v) {
  if (std::isnan(v)) throw Error("refusing to serialise NaN");
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw DataError("expected a number, got " + j.dump());
}

std::string format_double(double v) {
  if (std::isnan(v)) throw Error("refusing to format NaN");
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json to_json(const AnchorMatrix& m) {
  Json a = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(number(m.a(r, c)));
  Json b = Json::array();
  for (int r = 0; r < 3; ++r) b.push_back(number(m.b(r)));
  Json j;
  j["family"] = std::string(family_name(m.family));
  j["a"] = std::move(a);
  j["b"] = std::move(b);
  return j;
}

namespace {

std::vector<double> number_array(const Json& j, const char* key, std::size_t n) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != n)
    throw DataError(std::string("field '") + key + "' must be an array of " + std::to_string(n) +
                    " numbers");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw DataError(std::string("field '") + key + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

AnchorMatrix anchor_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw DataError("anchor matrix JSON needs a 'family' string");
  const auto fam = parse_family(j.at("family").get<std::string>());
  if (!fam) throw DataError("unknown matrix family '" + j.at("family").get<std::string>() + "'");
  const auto a = number_array(j, "a", 9);
  const auto b = number_array(j, "b", 3);
  AnchorMatrix m;
  m.family = *fam;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m.a(r, c) = a[static_cast<std::size_t>(3 * r + c)];
    m.b(r) = b[static_cast<std::size_t>(r)];
  }
  if (!m.is_valid())
    throw DataError("matrix entries violate the constraints of family '" +
                    std::string(family_name(m.family)) + "'");
  return m;
}

Json to_json(const GeoWarp& w, MotionModel model) {
  Json p = Json::array();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) p.push_back(number(w.p(r, c)));
  Json j;
  j["model"] = std::string(model_name(model));
  j["p"] = std::move(p);
  return j;
}

GeoWarp warp_from_json(const Json& j) {
  if (!j.is_object()) throw DataError("warp JSON must be an object");
  const auto p = number_array(j, "p", 6);
  GeoWarp w;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) w.p(r, c) = p[static_cast<std::size_t>(3 * r + c)];
  if (!w.is_invertible()) throw DataError("warp in JSON is not invertible");
  return w;
}

Json to_json(const MatrixDiagnostics& d) {
  Json j;
  j["diag_mean"] = number(d.diag_mean);
  j["offdiag_mean"] = number(d.offdiag_mean);
  j["bias_mean"] = number(d.bias_mean);
  j["diagonal_dominant"] = d.diagonal_dominant;
  j["input_mean_luma"] = number(d.input_mean_luma);
  j["min_norm_solution"] = d.min_norm_solution;
  return j;
}

Json to_json(const EnergyReport& r) {
  Json j;
  j["e_lum"] = number(r.e_lum);
  j["e_chr"] = number(r.e_chr);
  j["e_tex"] = number(r.e_tex);
  j["f_lum"] = number(r.f_lum);
  j["f_chr"] = number(r.f_chr);
  j["f_tex"] = number(r.f_tex);
  j["n_pixels"] = r.n_pixels;
  return j;
}

Json to_json(const ResidualHistogram& h) {
  Json edges = Json::array();
  for (double e : h.bin_edges) edges.push_back(number(e));
  Json j;
  j["channel"] = std::string(channel_name(h.channel));
  j["n"] = h.n;
  j["mean"] = number(h.mean);
  j["std"] = number(h.std);
  j["bin_edges"] = std::move(edges);
  j["counts"] = h.counts;
  return j;
}

Json to_json(const PairScore& s) {
  Json j;
  j["psnr_db"] = number(s.psnr_db);
  j["ssim"] = number(s.ssim);
  j["l_rec"] = number(s.l_rec);
  j["l_color"] = number(s.l_color);
  return j;
}

Json to_json(const CropRect& c) {
  Json j;
  j["row0"] = c.row0;
  j["col0"] = c.col0;
  j["rows"] = c.rows;
  j["cols"] = c.cols;
  return j;
}

std::string histogram_csv(const ResidualHistogram& h) {
  std::string out = "edge_lo,edge_hi,count\r\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += format_double(h.bin_edges[i]);
    out += ',';
    out += format_double(h.bin_edges[i + 1]);
    out += ',';
    out += std::to_string(h.counts[i]);
    out += "\r\n";
  }
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace gea
