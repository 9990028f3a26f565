#include "projlens/npy.hpp"

#include "projlens/error.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

static_assert(std::endian::native == std::endian::little, "NPY codec assumes a little-endian host");

namespace projlens {
namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Returns the raw text of the value for `key` in a python dict literal. Values
// here are a quoted string, True/False, or a parenthesised tuple.
std::string_view dict_value(std::string_view header, std::string_view key) {
  std::string quoted = "'" + std::string(key) + "'";
  auto pos = header.find(quoted);
  if (pos == std::string_view::npos) {
    quoted = "\"" + std::string(key) + "\"";
    pos = header.find(quoted);
  }
  if (pos == std::string_view::npos) throw Error(Errc::ParseError, "NPY header lacks key " + std::string(key));
  pos = header.find(':', pos + quoted.size());
  if (pos == std::string_view::npos) throw Error(Errc::ParseError, "NPY header malformed near " + std::string(key));
  std::string_view rest = trim(header.substr(pos + 1));
  std::size_t end = 0;
  if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
    end = rest.find(rest.front(), 1);
    if (end == std::string_view::npos) throw Error(Errc::ParseError, "NPY header: unterminated string");
    return rest.substr(1, end - 1);
  }
  if (!rest.empty() && rest.front() == '(') {
    end = rest.find(')');
    if (end == std::string_view::npos) throw Error(Errc::ParseError, "NPY header: unterminated shape");
    return rest.substr(1, end - 1);
  }
  end = rest.find_first_of(",}");
  return trim(rest.substr(0, end));
}

std::vector<std::size_t> parse_shape(std::string_view text) {
  std::vector<std::size_t> dims;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == ',')) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
    if (j == i) throw Error(Errc::ParseError, "NPY header: bad shape entry");
    dims.push_back(std::stoull(std::string(text.substr(i, j - i))));
    i = j;
    while (i < text.size() && text[i] == 'L') ++i;
  }
  return dims;
}

template <typename Scalar>
void read_payload(std::string_view payload, std::size_t rows, std::size_t cols, bool fortran, RowMatrix& out) {
  out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const std::size_t n = rows * cols;
  for (std::size_t k = 0; k < n; ++k) {
    Scalar x;
    std::memcpy(&x, payload.data() + k * sizeof(Scalar), sizeof(Scalar));
    const double value = static_cast<double>(x);
    if (!std::isfinite(value)) throw Error(Errc::NonFinite, "NPY payload element " + std::to_string(k) + " is not finite");
    const std::size_t i = fortran ? k % rows : k / cols;
    const std::size_t j = fortran ? k / rows : k % cols;
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
  }
}

}  // namespace

DenseMatrix decode_npy(std::string_view bytes) {
  if (bytes.size() < kMagicLen + 4 || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw Error(Errc::BadMagic, "missing \\x93NUMPY magic");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw Error(Errc::ParseError, "truncated NPY preamble");
    for (int b = 0; b < 4; ++b) header_len |= static_cast<std::size_t>(static_cast<unsigned char>(bytes[8 + b])) << (8 * b);
    offset = 12;
  } else {
    throw Error(Errc::BadMagic, "unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) throw Error(Errc::ParseError, "truncated NPY header");
  const std::string_view header = bytes.substr(offset, header_len);

  const std::string_view descr = dict_value(header, "descr");
  std::size_t itemsize = 0;
  if (descr == "<f4") {
    itemsize = 4;
  } else if (descr == "<f8") {
    itemsize = 8;
  } else {
    throw Error(Errc::UnsupportedDtype, "dtype '" + std::string(descr) + "' (only <f4 and <f8 are accepted)");
  }
  const std::string_view fortran_text = dict_value(header, "fortran_order");
  if (fortran_text != "True" && fortran_text != "False") throw Error(Errc::ParseError, "NPY header: bad fortran_order");
  const bool fortran = fortran_text == "True";
  const auto shape = parse_shape(dict_value(header, "shape"));
  if (shape.size() != 2) throw Error(Errc::BadShape, "expected a 2-D array, got ndim=" + std::to_string(shape.size()));

  const std::size_t rows = shape[0];
  const std::size_t cols = shape[1];
  const std::string_view payload = bytes.substr(offset + header_len);
  if (payload.size() != rows * cols * itemsize) {
    throw Error(Errc::LengthMismatch, "NPY payload has " + std::to_string(payload.size()) + " bytes, header implies " +
                                          std::to_string(rows * cols * itemsize));
  }
  DenseMatrix m;
  if (itemsize == 4) {
    m.dtype = Dtype::f32;
    read_payload<float>(payload, rows, cols, fortran, m.values);
  } else {
    m.dtype = Dtype::f64;
    read_payload<double>(payload, rows, cols, fortran, m.values);
  }
  return m;
}

std::string encode_npy(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw Error(Errc::EmptyMatrix, "cannot write a matrix with a zero dimension");
  std::ostringstream dict;
  dict << "{'descr': '" << (m.dtype == Dtype::f32 ? "<f4" : "<f8") << "', 'fortran_order': False, 'shape': ("
       << m.rows() << ", " << m.cols() << "), }";
  std::string header = dict.str();
  const std::size_t unpadded = kMagicLen + 4 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  const std::size_t itemsize = m.dtype == Dtype::f32 ? 4 : 8;
  std::string out;
  out.reserve(kMagicLen + 4 + header.size() + m.rows() * m.cols() * itemsize);
  out.append(kMagic, kMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header.size() & 0xff));
  out.push_back(static_cast<char>((header.size() >> 8) & 0xff));
  out += header;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      const double v = m.values(i, j);
      if (m.dtype == Dtype::f32) {
        const float f = static_cast<float>(v);
        out.append(reinterpret_cast<const char*>(&f), sizeof f);
      } else {
        out.append(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::Io, "short write to " + path.string());
}

DenseMatrix load_matrix(const std::filesystem::path& path) { return decode_npy(read_file(path)); }

void save_matrix(const DenseMatrix& m, const std::filesystem::path& path) { write_file(path, encode_npy(m)); }

}  // namespace projlens
