#include "rowpilot/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rowpilot::io {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::WrongMaxval: return "WrongMaxval";
    case ErrorKind::TruncatedData: return "TruncatedData";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::InvalidValue: return "InvalidValue";
  }
  return "?";
}

ParseError::ParseError(ErrorKind kind, std::size_t position, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at " + std::to_string(position) + ": " +
                         detail),
      kind_(kind),
      position_(position) {}

namespace {

// Netpbm header tokenizer: whitespace-separated decimal fields with
// '#' comments running to end of line.
class NetpbmHeader {
 public:
  explicit NetpbmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(char digit) {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != std::uint8_t(digit))
      throw ParseError(ErrorKind::MalformedHeader, 0, std::string("expected magic P") + digit);
    pos_ = 2;
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    last_start_ = start;
    std::uint64_t value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > std::numeric_limits<std::uint32_t>::max())
        throw ParseError(ErrorKind::MalformedHeader, start, std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size())
        throw ParseError(ErrorKind::MalformedHeader, pos_, std::string("header ends before ") + what);
      throw ParseError(ErrorKind::MalformedHeader, pos_, std::string("expected ") + what);
    }
    return value;
  }

  std::size_t last_start() const { return last_start_; }

  /// Consumes the single whitespace byte that ends the header.
  std::size_t data_offset() {
    if (pos_ >= bytes_.size())
      throw ParseError(ErrorKind::MalformedHeader, pos_, "header ends before raster");
    if (!is_space(bytes_[pos_]))
      throw ParseError(ErrorKind::MalformedHeader, pos_, "expected whitespace after maxval");
    return pos_ + 1;
  }

 private:
  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }
  void skip_space_and_comments() {
    const std::size_t start = pos_;
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
    if (pos_ == start && pos_ < bytes_.size())
      throw ParseError(ErrorKind::MalformedHeader, pos_, "expected whitespace");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t last_start_ = 0;
};

struct RasterHeader {
  std::uint64_t width, height, maxval;
  std::size_t offset;
};

RasterHeader read_header(std::span<const std::uint8_t> bytes, char magic, std::uint64_t maxval,
                         std::uint64_t bytes_per_pixel) {
  NetpbmHeader header(bytes);
  header.expect_magic(magic);
  RasterHeader h{};
  h.width = header.number("width");
  h.height = header.number("height");
  h.maxval = header.number("maxval");
  const std::size_t maxval_pos = header.last_start();
  h.offset = header.data_offset();
  if (h.width == 0 || h.height == 0)
    throw ParseError(ErrorKind::MalformedHeader, 2, "zero image dimension");
  if (h.maxval != maxval)
    throw ParseError(ErrorKind::WrongMaxval, maxval_pos,
                     "maxval " + std::to_string(h.maxval) + ", expected " + std::to_string(maxval));
  const std::uint64_t available = bytes.size() - h.offset;
  // Divide rather than multiply: width * height * bpp can overflow.
  if (h.height > available / bytes_per_pixel / h.width)
    throw ParseError(ErrorKind::TruncatedData, bytes.size(),
                     "raster needs " + std::to_string(h.width) + "x" + std::to_string(h.height) +
                         " pixels, found " + std::to_string(available) + " bytes");
  return h;
}

}  // namespace

DepthFrame read_depth_pgm(std::span<const std::uint8_t> bytes) {
  const RasterHeader h = read_header(bytes, '5', 65535, 2);
  DepthFrame frame(Eigen::Index(h.height), Eigen::Index(h.width));
  const std::uint8_t* p = bytes.data() + h.offset;
  for (Eigen::Index i = 0; i < frame.size(); ++i, p += 2)
    frame.data()[i] = std::uint16_t((std::uint16_t(p[0]) << 8) | p[1]);
  return frame;
}

Bytes write_depth_pgm(const DepthFrame& frame) {
  const std::string header =
      "P5\n" + std::to_string(frame.cols()) + " " + std::to_string(frame.rows()) + "\n65535\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + std::size_t(frame.size()) * 2);
  for (Eigen::Index i = 0; i < frame.size(); ++i) {
    out.push_back(std::uint8_t(frame.data()[i] >> 8));
    out.push_back(std::uint8_t(frame.data()[i] & 0xFF));
  }
  return out;
}

RgbFrame read_ppm(std::span<const std::uint8_t> bytes) {
  const RasterHeader h = read_header(bytes, '6', 255, 3);
  RgbFrame frame(int(h.height), int(h.width));
  std::copy_n(bytes.begin() + std::ptrdiff_t(h.offset), frame.data.size(), frame.data.begin());
  return frame;
}

Bytes write_ppm(const RgbFrame& frame) {
  const std::string header =
      "P6\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), frame.data.begin(), frame.data.end());
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Lines without their terminators; a trailing newline does not add a line.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

double parse_field(std::string_view field, std::size_t line, const char* name) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw ParseError(ErrorKind::TypeMismatch, line, std::string(name) + " is not a number");
  return value;
}

std::vector<std::string_view> records(std::string_view text, std::string_view header) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != header)
    throw ParseError(ErrorKind::MalformedHeader, 1, "expected header '" + std::string(header) + "'");
  return {lines.begin() + 1, lines.end()};
}

CommandSource parse_source(std::string_view s, std::size_t line) {
  if (s == "depth") return CommandSource::Depth;
  if (s == "fallback") return CommandSource::Fallback;
  if (s == "estop") return CommandSource::EmergencyStop;
  throw ParseError(ErrorKind::InvalidValue, line, "unknown source '" + std::string(s) + "'");
}

ViewClass parse_view(std::string_view s, std::size_t line) {
  if (s == "left") return ViewClass::Left;
  if (s == "center") return ViewClass::Center;
  if (s == "right") return ViewClass::Right;
  throw ParseError(ErrorKind::InvalidValue, line, "unknown label '" + std::string(s) + "'");
}

}  // namespace

std::vector<TrajectoryRow> trajectory_rows(const EpisodeLog& log) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(log.steps.size());
  for (const StepRecord& s : log.steps)
    rows.push_back({s.t, s.pose.x, s.pose.y, s.pose.theta, s.command.linear, s.command.angular,
                    s.command.source, s.d});
  return rows;
}

std::string write_trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const TrajectoryRow& r : rows) {
    for (const double v : {r.t, r.x, r.y, r.theta, r.v, r.omega}) {
      out += format_double(v);
      out += ',';
    }
    out += to_string(r.source);
    out += ',';
    out += format_double(r.d);
    out += '\n';
  }
  return out;
}

std::vector<TrajectoryRow> read_trajectory_csv(std::string_view text) {
  std::vector<TrajectoryRow> rows;
  std::size_t line_no = 1;
  for (const std::string_view line : records(text, kTrajectoryHeader)) {
    ++line_no;
    const auto f = split(line, ',');
    if (f.size() != 8) throw ParseError(ErrorKind::MalformedRecord, line_no, "expected 8 fields");
    TrajectoryRow r;
    r.t = parse_field(f[0], line_no, "t");
    r.x = parse_field(f[1], line_no, "x");
    r.y = parse_field(f[2], line_no, "y");
    r.theta = parse_field(f[3], line_no, "theta");
    r.v = parse_field(f[4], line_no, "v");
    r.omega = parse_field(f[5], line_no, "omega");
    r.source = parse_source(f[6], line_no);
    r.d = parse_field(f[7], line_no, "d");
    rows.push_back(r);
  }
  return rows;
}

std::string write_manifest_csv(const std::vector<LabeledSample>& samples) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const LabeledSample& s : samples) {
    if (s.path.find_first_of(",\r\n") != std::string::npos)
      throw std::invalid_argument("manifest path must not contain ',' or line breaks");
    out += s.path + ',' + std::string(to_string(s.label)) + ',' + format_double(s.offset_px) + ',' +
           format_double(s.sharpness) + ',' + format_double(s.timestamp) + '\n';
  }
  return out;
}

std::vector<LabeledSample> read_manifest_csv(std::string_view text) {
  std::vector<LabeledSample> samples;
  std::size_t line_no = 1;
  for (const std::string_view line : records(text, kManifestHeader)) {
    ++line_no;
    const auto f = split(line, ',');
    if (f.size() != 5) throw ParseError(ErrorKind::MalformedRecord, line_no, "expected 5 fields");
    LabeledSample s;
    s.path = std::string(f[0]);
    s.label = parse_view(f[1], line_no);
    s.offset_px = parse_field(f[2], line_no, "offset_px");
    s.sharpness = parse_field(f[3], line_no, "sharpness");
    if (!(s.sharpness >= 0.0))
      throw ParseError(ErrorKind::InvalidValue, line_no, "sharpness must be >= 0");
    s.timestamp = parse_field(f[4], line_no, "timestamp");
    samples.push_back(std::move(s));
  }
  return samples;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace rowpilot::io
