#include <cstdlib>
#include <cstdio>
#include <sstream>

#include "scanres/corpus.hpp"
#include "scanres/image_io.hpp"

namespace scanres {
namespace {

constexpr std::string_view kMagic = "# scanres-features";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void check_token(std::string_view text, std::string_view what) {
  if (text.empty() || text.find_first_of(",\n\r= ") != std::string_view::npos) {
    fail(ErrorCode::InvalidParameter, std::string(what) + " '" + std::string(text) + "' contains a reserved character");
  }
}

double parse_double(std::string_view text, int line_no) {
  double v = 0.0;
  std::string s(text);
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string serialize_features(const FeatureTable& table) {
  std::ostringstream out;
  out << kMagic << " version=" << FeatureTable::kVersion;
  for (const auto& [k, v] : table.metadata) {
    check_token(k, "metadata key");
    check_token(v, "metadata value");
    out << ' ' << k << '=' << v;
  }
  out << "\nregion_id,dpi,origin,label";
  for (std::size_t i = 0; i < kFeatureCount; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& s : table.samples) {
    check_token(s.region_id, "region id");
    out << s.region_id << ',' << value(s.dpi) << ',' << to_string(s.origin) << ',' << to_string(s.label);
    for (double v : s.features.values) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

FeatureTable parse_features(std::string_view text) {
  FeatureTable table;
  const auto lines = split(text, '\n');
  if (lines.empty() || lines[0].substr(0, kMagic.size()) != kMagic) {
    fail(ErrorCode::ParseError, "missing scanres-features metadata line");
  }
  bool versioned = false;
  for (auto field : split(lines[0].substr(kMagic.size()), ' ')) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::ParseError, "bad metadata field '" + std::string(field) + "'");
    const std::string key(field.substr(0, eq)), val(field.substr(eq + 1));
    if (key == "version") {
      if (val != std::to_string(FeatureTable::kVersion)) fail(ErrorCode::VersionError, "feature table version " + val);
      versioned = true;
    } else {
      table.metadata[key] = val;
    }
  }
  if (!versioned) fail(ErrorCode::VersionError, "feature table has no version");

  std::string expected = "region_id,dpi,origin,label";
  for (std::size_t i = 0; i < kFeatureCount; ++i) expected += ",f" + std::to_string(i);
  if (lines.size() < 2 || lines[1] != expected) fail(ErrorCode::ParseError, "unexpected feature table header");

  for (std::size_t n = 2; n < lines.size(); ++n) {
    const auto line = lines[n];
    if (line.empty()) continue;
    const int line_no = static_cast<int>(n + 1);
    const auto cols = split(line, ',');
    if (cols.size() != 4 + kFeatureCount) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": wrong column count");
    Sample s;
    s.region_id = std::string(cols[0]);
    const auto dpi = dpi_from_int(static_cast<int>(parse_double(cols[1], line_no)));
    if (!dpi) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unsupported dpi");
    s.dpi = *dpi;
    s.origin = parse_origin(cols[2]);
    s.label = parse_label(cols[3]);
    for (std::size_t i = 0; i < kFeatureCount; ++i) s.features[i] = parse_double(cols[4 + i], line_no);
    table.samples.push_back(std::move(s));
  }
  return table;
}

void save_features(const std::filesystem::path& path, const FeatureTable& table) {
  write_file(path, serialize_features(table));
}

FeatureTable load_features(const std::filesystem::path& path) { return parse_features(read_file(path)); }

}  // namespace scanres
