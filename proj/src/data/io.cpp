#include "ffa/data/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "ffa/error.hpp"

namespace ffa::data {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::uint32_t read_be32(std::istream& is, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError(path.string() + ": truncated IDX header");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return is;
}

}  // namespace

Dataset load_tabular(const std::filesystem::path& path, const FeatureSchema& schema,
                     char delimiter) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  const std::size_t d = schema.dimension();
  const auto& specs = schema.features();
  const auto& names = schema.class_names();
  std::vector<std::map<std::string, double>> codes(d);
  std::vector<Sample> samples;
  int max_label = -1;

  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = split_line(t, delimiter);
    if (cells.size() != d + 1) {
      throw ParseError("expected " + std::to_string(d + 1) + " columns, found " +
                           std::to_string(cells.size()),
                       lineno);
    }
    if (first_content) {
      first_content = false;
      bool numeric_ok = true;
      for (std::size_t j = 0; j < d; ++j) {
        if (specs[j].kind == FeatureKind::continuous && !parse_number(cells[j])) numeric_ok = false;
      }
      if (!numeric_ok) continue;  // header
    }
    Sample s;
    s.features.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      if (specs[j].kind == FeatureKind::continuous) {
        auto v = parse_number(cells[j]);
        if (!v) throw ParseError("feature '" + specs[j].name + "' is not numeric: '" + cells[j] + "'", lineno);
        s.features[j] = *v;
      } else {
        auto& table = codes[j];
        auto it = table.find(cells[j]);
        if (it == table.end()) it = table.emplace(cells[j], static_cast<double>(table.size())).first;
        s.features[j] = it->second;
      }
    }
    const auto& lab = cells[d];
    if (!names.empty()) {
      auto it = std::find(names.begin(), names.end(), lab);
      if (it == names.end()) throw ParseError("unknown label '" + lab + "'", lineno);
      s.label = static_cast<int>(it - names.begin());
    } else {
      auto v = parse_number(lab);
      if (!v || *v < 0 || *v != static_cast<double>(static_cast<int>(*v))) {
        throw ParseError("unknown label '" + lab + "' (expected a non-negative integer)", lineno);
      }
      s.label = static_cast<int>(*v);
    }
    max_label = std::max(max_label, s.label);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ParseError(path.string() + ": no samples", 0);
  const std::size_t classes =
      names.empty() ? static_cast<std::size_t>(max_label + 1) : names.size();
  return Dataset(schema, classes, std::move(samples));
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  auto is = open_binary(path);
  const auto magic = read_be32(is, path);
  if (magic != 0x00000803u) {
    std::ostringstream msg;
    msg << path.string() << ": bad IDX image magic 0x" << std::hex << magic;
    throw FormatError(msg.str());
  }
  IdxImages img;
  img.count = read_be32(is, path);
  img.rows = read_be32(is, path);
  img.cols = read_be32(is, path);
  img.pixels.resize(std::size_t{img.count} * img.rows * img.cols);
  if (!is.read(reinterpret_cast<char*>(img.pixels.data()),
               static_cast<std::streamsize>(img.pixels.size()))) {
    throw FormatError(path.string() + ": truncated IDX image data");
  }
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  auto is = open_binary(path);
  const auto magic = read_be32(is, path);
  if (magic != 0x00000801u) {
    std::ostringstream msg;
    msg << path.string() << ": bad IDX label magic 0x" << std::hex << magic;
    throw FormatError(msg.str());
  }
  std::vector<std::uint8_t> labels(read_be32(is, path));
  if (!is.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(labels.size()))) {
    throw FormatError(path.string() + ": truncated IDX label data");
  }
  return labels;
}

Dataset load_idx_images(const std::filesystem::path& images,
                        const std::optional<std::filesystem::path>& labels,
                        std::optional<std::size_t> limit) {
  const auto img = read_idx_images(images);
  std::vector<std::uint8_t> lab;
  if (labels) {
    lab = read_idx_labels(*labels);
    if (lab.size() != img.count) throw FormatError("image and label counts differ");
  }
  const std::size_t d = std::size_t{img.rows} * img.cols;
  const std::size_t n = limit ? std::min<std::size_t>(*limit, img.count) : img.count;
  std::vector<Sample> samples(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = samples[i];
    s.features.resize(d);
    for (std::size_t j = 0; j < d; ++j) s.features[j] = img.pixels[i * d + j] / 255.0;
    s.label = lab.empty() ? 0 : lab[i];
    max_label = std::max(max_label, s.label);
  }
  const std::size_t classes = lab.empty() ? 1 : std::max<std::size_t>(10, max_label + 1);
  auto schema = FeatureSchema::continuous(d, true);
  Dataset out(std::move(schema), classes, std::move(samples));
  MinMaxScaler identity;
  identity.min.assign(d, 0.0);
  identity.max.assign(d, 1.0);
  out.set_scaler(std::move(identity));
  return out;
}

}  // namespace ffa::data
