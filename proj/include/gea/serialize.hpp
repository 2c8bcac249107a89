#pragma once

#include "gea/anchor.hpp"
#include "gea/energy.hpp"
#include "gea/metrics.hpp"
#include "gea/registration.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace gea {

using Json = nlohmann::ordered_json;

// Finite values become JSON numbers (shortest round-trip decimal form);
// +/-infinity become the strings "inf" / "-inf"; NaN throws gea::Error.
Json number(double v);
// Inverse of number(): accepts numbers and the "inf"/"-inf" strings.
double number_from(const Json& j);

// Shortest round-trip decimal text, locale independent; "inf"/"-inf" for
// infinities. NaN throws.
std::string format_double(double v);

Json to_json(const AnchorMatrix& m);
// Throws DataError on malformed input or when the family constraints fail.
AnchorMatrix anchor_from_json(const Json& j);

Json to_json(const GeoWarp& w, MotionModel model);
GeoWarp warp_from_json(const Json& j);

Json to_json(const MatrixDiagnostics& d);
Json to_json(const EnergyReport& r);
Json to_json(const ResidualHistogram& h);
Json to_json(const PairScore& s);
Json to_json(const CropRect& c);

// (edge_lo, edge_hi, count) rows with a header line, RFC 4180.
std::string histogram_csv(const ResidualHistogram& h);

Json read_json_file(const std::filesystem::path& path);
// Pretty-printed with 2-space indent and a trailing newline.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string dump(const Json& j);

}  // namespace gea
