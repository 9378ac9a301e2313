#include "hsi/cube.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "hsi/error.hpp"

namespace hsi {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::string body = trim(value);
  if (!body.empty() && body.front() == '{' && body.back() == '}') body = body.substr(1, body.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& value, const fs::path& path) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size() || v < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw IoError(path.string() + ": header key '" + key + "' is not a non-negative integer: '" + value + "'");
  }
}

std::uintmax_t file_size_or_throw(const fs::path& raw) {
  std::error_code ec;
  const auto size = fs::file_size(raw, ec);
  if (ec) throw IoError("cannot stat raw file " + raw.string() + ": " + ec.message());
  return size;
}

std::vector<char> read_exact(const fs::path& raw, std::uintmax_t expected) {
  std::ifstream in(raw, std::ios::binary);
  if (!in) throw IoError("cannot open raw file " + raw.string());
  const auto actual = file_size_or_throw(raw);
  if (actual != expected) {
    throw IoError(raw.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                  std::to_string(actual));
  }
  std::vector<char> buf(static_cast<std::size_t>(expected));
  in.read(buf.data(), static_cast<std::streamsize>(expected));
  if (static_cast<std::uintmax_t>(in.gcount()) != expected) {
    throw IoError(raw.string() + ": short read, expected " + std::to_string(expected) + " bytes, got " +
                  std::to_string(in.gcount()));
  }
  return buf;
}

void write_exact(const fs::path& raw, const char* data, std::size_t bytes) {
  std::ofstream out(raw, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + raw.string() + " for writing");
  out.write(data, static_cast<std::streamsize>(bytes));
  out.flush();
  if (!out) throw IoError("write failed: " + raw.string());
}

template <typename T>
T byteswap_value(T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

// On-disk data is little-endian; swap in place on big-endian hosts.
template <typename T>
void to_from_little(T* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i) data[i] = byteswap_value(data[i]);
  } else {
    (void)data;
    (void)count;
  }
}

void require_tag(const fs::path& path, const char* key, const std::string& got, const char* want) {
  if (got != want) {
    throw IoError(path.string() + ": unsupported " + key + " '" + got + "' (expected '" + want + "')");
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

bool HyperspectralCube::operator==(const HyperspectralCube& other) const {
  if (width != other.width || height != other.height || data.rows() != other.data.rows() ||
      data.cols() != other.data.cols() || wavelengths != other.wavelengths) {
    return false;
  }
  return std::memcmp(data.data(), other.data.data(), sizeof(float) * static_cast<std::size_t>(data.size())) == 0;
}

fs::path raw_path_for(const fs::path& header_path) {
  fs::path raw = header_path;
  raw.replace_extension(".raw");
  return raw;
}

CubeHeader read_header(const fs::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw IoError("cannot open header " + header_path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || lower(t) == "envi") continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw IoError(header_path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    kv[lower(trim(t.substr(0, eq)))] = trim(t.substr(eq + 1));
  }

  auto required = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError(header_path.string() + ": missing required key '" + key + "'");
    return it->second;
  };

  CubeHeader h;
  h.width = parse_count("samples", required("samples"), header_path);
  h.height = parse_count("lines", required("lines"), header_path);
  h.bands = parse_count("bands", required("bands"), header_path);
  h.dtype = lower(required("data type"));
  h.interleave = lower(required("interleave"));
  h.byte_order = lower(required("byte order"));

  if (auto it = kv.find("wavelengths"); it != kv.end()) {
    for (const auto& item : split_list(it->second)) {
      try {
        h.wavelengths.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw IoError(header_path.string() + ": bad wavelength '" + item + "'");
      }
    }
  }
  if (auto it = kv.find("classes"); it != kv.end()) h.classes = parse_count("classes", it->second, header_path);
  if (auto it = kv.find("class names"); it != kv.end()) h.class_names = split_list(it->second);
  return h;
}

void write_header(const fs::path& header_path, const CubeHeader& h) {
  std::ofstream out(header_path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + header_path.string() + " for writing");
  out << "samples = " << h.width << '\n'
      << "lines = " << h.height << '\n'
      << "bands = " << h.bands << '\n'
      << "data type = " << h.dtype << '\n'
      << "interleave = " << h.interleave << '\n'
      << "byte order = " << h.byte_order << '\n';
  if (!h.wavelengths.empty()) {
    out << "wavelengths = ";
    for (std::size_t i = 0; i < h.wavelengths.size(); ++i) out << (i ? "," : "") << format_double(h.wavelengths[i]);
    out << '\n';
  }
  if (h.classes) out << "classes = " << *h.classes << '\n';
  if (!h.class_names.empty()) {
    out << "class names = ";
    for (std::size_t i = 0; i < h.class_names.size(); ++i) out << (i ? "," : "") << h.class_names[i];
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed: " + header_path.string());
}

void validate(const HyperspectralCube& cube) {
  if (cube.width < 1 || cube.height < 1) throw ValidationError("cube must be at least 1x1 pixels");
  if (cube.n_bands() < 2) throw ValidationError("cube needs at least 2 bands, has " + std::to_string(cube.n_bands()));
  if (static_cast<std::size_t>(cube.data.rows()) != cube.width * cube.height) {
    throw ValidationError("cube data has " + std::to_string(cube.data.rows()) + " pixel rows, expected " +
                          std::to_string(cube.width * cube.height));
  }
  if (!cube.wavelengths.empty() && cube.wavelengths.size() != cube.n_bands()) {
    throw ValidationError("cube has " + std::to_string(cube.wavelengths.size()) + " wavelengths for " +
                          std::to_string(cube.n_bands()) + " bands");
  }
  const float* p = cube.data.data();
  const std::size_t total = static_cast<std::size_t>(cube.data.size());
  for (std::size_t i = 0; i < total; ++i) {
    if (!std::isfinite(p[i])) {
      const std::size_t band = i / cube.n_pixels();
      const std::size_t pix = i % cube.n_pixels();
      throw ValidationError("non-finite value at (band " + std::to_string(band) + ", row " +
                            std::to_string(pix / cube.width) + ", col " + std::to_string(pix % cube.width) + ")");
    }
  }
}

std::size_t validate_labels(std::span<const std::uint16_t> labels) {
  std::vector<bool> present(65536, false);
  std::size_t max_label = 0;
  for (auto l : labels) {
    present[l] = true;
    max_label = std::max<std::size_t>(max_label, l);
  }
  if (max_label == 0) throw ValidationError("ground truth contains no labeled pixels");
  std::string missing;
  for (std::size_t l = 1; l <= max_label; ++l) {
    if (!present[l]) missing += (missing.empty() ? "" : ",") + std::to_string(l);
  }
  if (!missing.empty()) {
    throw ValidationError("class labels must be contiguous 1.." + std::to_string(max_label) + "; missing label(s) " +
                          missing);
  }
  return max_label;
}

HyperspectralCube load_cube(const fs::path& header_path) {
  const CubeHeader h = read_header(header_path);
  require_tag(header_path, "data type", h.dtype, "f32");
  require_tag(header_path, "interleave", h.interleave, "bsq");
  require_tag(header_path, "byte order", h.byte_order, "little");
  if (h.width == 0 || h.height == 0) throw ValidationError(header_path.string() + ": empty raster");
  if (h.bands < 2) throw ValidationError(header_path.string() + ": cube needs at least 2 bands");

  const fs::path raw = raw_path_for(header_path);
  const std::uintmax_t expected = std::uintmax_t{h.width} * h.height * h.bands * sizeof(float);
  const std::vector<char> bytes = read_exact(raw, expected);

  HyperspectralCube cube;
  cube.width = h.width;
  cube.height = h.height;
  cube.data.resize(static_cast<Eigen::Index>(h.width * h.height), static_cast<Eigen::Index>(h.bands));
  std::memcpy(cube.data.data(), bytes.data(), bytes.size());
  to_from_little(cube.data.data(), static_cast<std::size_t>(cube.data.size()));
  cube.wavelengths = h.wavelengths;
  validate(cube);
  return cube;
}

void save_cube(const HyperspectralCube& cube, const fs::path& header_path) {
  validate(cube);
  CubeHeader h;
  h.width = cube.width;
  h.height = cube.height;
  h.bands = cube.n_bands();
  h.wavelengths = cube.wavelengths;

  const std::size_t count = static_cast<std::size_t>(cube.data.size());
  if constexpr (std::endian::native == std::endian::big) {
    std::vector<float> swapped(cube.data.data(), cube.data.data() + count);
    to_from_little(swapped.data(), count);
    write_exact(raw_path_for(header_path), reinterpret_cast<const char*>(swapped.data()), count * sizeof(float));
  } else {
    write_exact(raw_path_for(header_path), reinterpret_cast<const char*>(cube.data.data()), count * sizeof(float));
  }
  write_header(header_path, h);
}

GroundTruthMap make_ground_truth(std::size_t width, std::size_t height, std::vector<std::uint16_t> labels,
                                 std::vector<std::string> class_names) {
  if (width == 0 || height == 0) throw ValidationError("ground truth must be at least 1x1 pixels");
  if (labels.size() != width * height) {
    throw ValidationError("ground truth has " + std::to_string(labels.size()) + " labels, expected " +
                          std::to_string(width * height));
  }
  GroundTruthMap gt;
  gt.width = width;
  gt.height = height;
  gt.n_classes = validate_labels(labels);
  gt.labels = std::move(labels);
  if (!class_names.empty() && class_names.size() != gt.n_classes) {
    throw ValidationError("ground truth names " + std::to_string(class_names.size()) + " classes but has " +
                          std::to_string(gt.n_classes));
  }
  gt.class_names = std::move(class_names);
  return gt;
}

GroundTruthMap load_ground_truth(const fs::path& header_path) {
  const CubeHeader h = read_header(header_path);
  require_tag(header_path, "data type", h.dtype, "u16");
  require_tag(header_path, "interleave", h.interleave, "bsq");
  require_tag(header_path, "byte order", h.byte_order, "little");
  if (h.bands != 1) throw IoError(header_path.string() + ": ground truth must have exactly 1 band");

  const fs::path raw = raw_path_for(header_path);
  const std::uintmax_t expected = std::uintmax_t{h.width} * h.height * sizeof(std::uint16_t);
  const std::vector<char> bytes = read_exact(raw, expected);
  std::vector<std::uint16_t> labels(h.width * h.height);
  std::memcpy(labels.data(), bytes.data(), bytes.size());
  to_from_little(labels.data(), labels.size());

  GroundTruthMap gt = make_ground_truth(h.width, h.height, std::move(labels), h.class_names);
  if (h.classes && *h.classes != gt.n_classes) {
    throw ValidationError(header_path.string() + ": header declares " + std::to_string(*h.classes) +
                          " classes but labels span 1.." + std::to_string(gt.n_classes));
  }
  return gt;
}

namespace {

void write_u16_raster(const fs::path& header_path, std::size_t width, std::size_t height,
                      const std::vector<std::uint16_t>& labels, std::optional<std::size_t> classes,
                      const std::vector<std::string>& names) {
  if (labels.size() != width * height) throw ValidationError("label raster size does not match dimensions");
  CubeHeader h;
  h.width = width;
  h.height = height;
  h.bands = 1;
  h.dtype = "u16";
  h.classes = classes;
  h.class_names = names;
  std::vector<std::uint16_t> out = labels;
  to_from_little(out.data(), out.size());
  write_exact(raw_path_for(header_path), reinterpret_cast<const char*>(out.data()), out.size() * sizeof(std::uint16_t));
  write_header(header_path, h);
}

}  // namespace

void save_ground_truth(const GroundTruthMap& gt, const fs::path& header_path) {
  write_u16_raster(header_path, gt.width, gt.height, gt.labels, gt.n_classes, gt.class_names);
}

void save_label_raster(const LabelRaster& raster, const fs::path& header_path, std::optional<std::size_t> classes) {
  write_u16_raster(header_path, raster.width, raster.height, raster.labels, classes, {});
}

LabelRaster load_label_raster(const fs::path& header_path) {
  const CubeHeader h = read_header(header_path);
  require_tag(header_path, "data type", h.dtype, "u16");
  require_tag(header_path, "interleave", h.interleave, "bsq");
  require_tag(header_path, "byte order", h.byte_order, "little");
  if (h.bands != 1) throw IoError(header_path.string() + ": label raster must have exactly 1 band");
  const std::vector<char> bytes =
      read_exact(raw_path_for(header_path), std::uintmax_t{h.width} * h.height * sizeof(std::uint16_t));
  LabelRaster raster;
  raster.width = h.width;
  raster.height = h.height;
  raster.labels.resize(h.width * h.height);
  std::memcpy(raster.labels.data(), bytes.data(), bytes.size());
  to_from_little(raster.labels.data(), raster.labels.size());
  return raster;
}

SampleType parse_sample_type(const std::string& name) {
  const std::string n = lower(name);
  if (n == "u8" || n == "uint8") return SampleType::u8;
  if (n == "u16" || n == "uint16") return SampleType::u16;
  if (n == "i16" || n == "int16") return SampleType::i16;
  if (n == "i32" || n == "int32") return SampleType::i32;
  if (n == "f32" || n == "float32") return SampleType::f32;
  if (n == "f64" || n == "float64") return SampleType::f64;
  throw ConfigError("unknown sample type '" + name + "'");
}

Interleave parse_interleave(const std::string& name) {
  const std::string n = lower(name);
  if (n == "bsq") return Interleave::bsq;
  if (n == "bil") return Interleave::bil;
  if (n == "bip") return Interleave::bip;
  throw ConfigError("unknown interleave '" + name + "'");
}

namespace {

std::size_t sample_size(SampleType t) {
  switch (t) {
    case SampleType::u8: return 1;
    case SampleType::u16:
    case SampleType::i16: return 2;
    case SampleType::i32:
    case SampleType::f32: return 4;
    case SampleType::f64: return 8;
  }
  return 0;
}

template <typename T>
double decode_as(const char* p, bool big_endian) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  const bool swap = big_endian != (std::endian::native == std::endian::big);
  if (swap) v = byteswap_value(v);
  return static_cast<double>(v);
}

double decode(const char* p, SampleType t, bool big_endian) {
  switch (t) {
    case SampleType::u8: return static_cast<double>(static_cast<unsigned char>(*p));
    case SampleType::u16: return decode_as<std::uint16_t>(p, big_endian);
    case SampleType::i16: return decode_as<std::int16_t>(p, big_endian);
    case SampleType::i32: return decode_as<std::int32_t>(p, big_endian);
    case SampleType::f32: return decode_as<float>(p, big_endian);
    case SampleType::f64: return decode_as<double>(p, big_endian);
  }
  return 0.0;
}

std::size_t source_index(const RawLayout& l, std::size_t band, std::size_t row, std::size_t col) {
  switch (l.interleave) {
    case Interleave::bsq: return (band * l.height + row) * l.width + col;
    case Interleave::bil: return (row * l.bands + band) * l.width + col;
    case Interleave::bip: return (row * l.width + col) * l.bands + band;
  }
  return 0;
}

std::vector<char> read_layout(const fs::path& raw_file, const RawLayout& l) {
  if (l.width == 0 || l.height == 0 || l.bands == 0) throw ConfigError("import layout has a zero dimension");
  const std::uintmax_t payload = std::uintmax_t{l.width} * l.height * l.bands * sample_size(l.type);
  const std::uintmax_t actual = file_size_or_throw(raw_file);
  if (actual < l.header_offset + payload) {
    throw IoError(raw_file.string() + ": expected at least " + std::to_string(l.header_offset + payload) +
                  " bytes, found " + std::to_string(actual));
  }
  std::ifstream in(raw_file, std::ios::binary);
  if (!in) throw IoError("cannot open " + raw_file.string());
  in.seekg(static_cast<std::streamoff>(l.header_offset));
  std::vector<char> buf(static_cast<std::size_t>(payload));
  in.read(buf.data(), static_cast<std::streamsize>(payload));
  if (!in) throw IoError(raw_file.string() + ": short read");
  return buf;
}

}  // namespace

HyperspectralCube import_cube(const fs::path& raw_file, const RawLayout& layout) {
  const std::vector<char> buf = read_layout(raw_file, layout);
  const std::size_t ss = sample_size(layout.type);
  HyperspectralCube cube;
  cube.width = layout.width;
  cube.height = layout.height;
  cube.data.resize(static_cast<Eigen::Index>(layout.width * layout.height), static_cast<Eigen::Index>(layout.bands));
  for (std::size_t b = 0; b < layout.bands; ++b) {
    for (std::size_t r = 0; r < layout.height; ++r) {
      for (std::size_t c = 0; c < layout.width; ++c) {
        const double v = decode(buf.data() + source_index(layout, b, r, c) * ss, layout.type, layout.big_endian);
        cube.data(static_cast<Eigen::Index>(r * layout.width + c), static_cast<Eigen::Index>(b)) =
            static_cast<float>(v);
      }
    }
  }
  validate(cube);
  return cube;
}

GroundTruthMap import_ground_truth(const fs::path& raw_file, const RawLayout& layout) {
  if (layout.bands != 1) throw ConfigError("ground-truth import expects a single band");
  const std::vector<char> buf = read_layout(raw_file, layout);
  const std::size_t ss = sample_size(layout.type);
  std::vector<std::uint16_t> labels(layout.width * layout.height);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = decode(buf.data() + i * ss, layout.type, layout.big_endian);
    if (!(v >= 0.0 && v <= 65535.0) || v != std::floor(v)) {
      throw ValidationError("label " + std::to_string(v) + " at pixel " + std::to_string(i) +
                            " is not a u16 integer");
    }
    labels[i] = static_cast<std::uint16_t>(v);
  }
  return make_ground_truth(layout.width, layout.height, std::move(labels));
}

}  // namespace hsi
