#include "fodkq/io.hpp"

#include <json.hpp>

#include <bit>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace fodkq {

static_assert(std::endian::native == std::endian::little, "array files assume a little-endian host");

namespace {

constexpr char kMagic[] = "FODKQ1 ";
constexpr std::size_t kPrefix = 16;

std::pair<std::size_t, std::size_t> two_dims(const ArrayFile& a) {
  if (a.shape.size() == 1) return {a.shape[0], 1};
  if (a.shape.size() == 2) return {a.shape[0], a.shape[1]};
  throw DataError("expected a 1-D or 2-D array");
}

template <typename T>
ArrayFile pack(const T* data, std::size_t n, std::vector<std::size_t> shape, DType dt, std::string semantic) {
  ArrayFile a{std::move(shape), dt, std::move(semantic), std::vector<std::uint8_t>(n * sizeof(T))};
  if (n) std::memcpy(a.payload.data(), data, n * sizeof(T));
  return a;
}

}  // namespace

std::string to_string(DType t) {
  switch (t) {
    case DType::F64: return "f64";
    case DType::C128: return "c128";
    case DType::U8: return "u8";
  }
  return "f64";
}

DType parse_dtype(const std::string& s) {
  if (s == "f64") return DType::F64;
  if (s == "c128") return DType::C128;
  if (s == "u8") return DType::U8;
  throw DataError("unknown dtype '" + s + "'");
}

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::F64: return 8;
    case DType::C128: return 16;
    case DType::U8: return 1;
  }
  return 1;
}

std::size_t ArrayFile::element_count() const {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

void write_array(std::ostream& os, const ArrayFile& a) {
  if (a.payload.size() != a.element_count() * dtype_size(a.dtype)) {
    throw std::invalid_argument("array payload does not match its shape");
  }
  nlohmann::json h;
  h["shape"] = a.shape;
  h["dtype"] = to_string(a.dtype);
  h["layout"] = "row-major";
  h["byte_order"] = "little-endian";
  h["semantic"] = a.semantic;
  const std::string header = h.dump();
  if (header.size() > 99999999) throw std::invalid_argument("array header too long");
  char prefix[kPrefix + 1];
  std::snprintf(prefix, sizeof prefix, "%s%08zu\n", kMagic, header.size());
  os.write(prefix, kPrefix);
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  os.write(reinterpret_cast<const char*>(a.payload.data()), static_cast<std::streamsize>(a.payload.size()));
  if (!os) throw DataError("failed to write array");
}

ArrayFile read_array(std::istream& is) {
  char prefix[kPrefix];
  if (!is.read(prefix, kPrefix)) throw DataError("array file truncated before header");
  if (std::memcmp(prefix, kMagic, 7) != 0 || prefix[kPrefix - 1] != '\n') throw DataError("not an array file");
  std::size_t len = 0;
  for (std::size_t i = 7; i < 15; ++i) {
    if (prefix[i] < '0' || prefix[i] > '9') throw DataError("bad header length in array prefix");
    len = len * 10 + static_cast<std::size_t>(prefix[i] - '0');
  }
  std::string header(len, '\0');
  if (!is.read(header.data(), static_cast<std::streamsize>(len))) throw DataError("array header truncated");

  ArrayFile a;
  try {
    const auto h = nlohmann::json::parse(header);
    if (h.at("layout").get<std::string>() != "row-major") throw DataError("unsupported array layout");
    if (h.at("byte_order").get<std::string>() != "little-endian") throw DataError("unsupported byte order");
    a.shape = h.at("shape").get<std::vector<std::size_t>>();
    a.dtype = parse_dtype(h.at("dtype").get<std::string>());
    a.semantic = h.at("semantic").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed array header: ") + e.what());
  }
  const std::size_t bytes = a.element_count() * dtype_size(a.dtype);
  a.payload.resize(bytes);
  if (bytes && !is.read(reinterpret_cast<char*>(a.payload.data()), static_cast<std::streamsize>(bytes))) {
    throw DataError("array payload truncated");
  }
  if (is.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after array payload");
  return a;
}

void save_array(const std::filesystem::path& path, const ArrayFile& a) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  write_array(os, a);
}

ArrayFile load_array(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  try {
    return read_array(is);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

ArrayFile make_array(const Eigen::MatrixXd& m, std::string semantic) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor r = m;
  return pack(r.data(), static_cast<std::size_t>(r.size()),
              {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, DType::F64, std::move(semantic));
}

ArrayFile make_array(const Eigen::MatrixXcd& m, std::string semantic) {
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor r = m;
  return pack(r.data(), static_cast<std::size_t>(r.size()),
              {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, DType::C128,
              std::move(semantic));
}

ArrayFile make_array(const Eigen::VectorXd& v, std::string semantic) {
  return pack(v.data(), static_cast<std::size_t>(v.size()), {static_cast<std::size_t>(v.size())}, DType::F64,
              std::move(semantic));
}

ArrayFile make_array(const Eigen::VectorXcd& v, std::string semantic) {
  return pack(v.data(), static_cast<std::size_t>(v.size()), {static_cast<std::size_t>(v.size())}, DType::C128,
              std::move(semantic));
}

ArrayFile make_u8_array(const std::vector<std::uint8_t>& data, std::vector<std::size_t> shape, std::string semantic) {
  ArrayFile a{std::move(shape), DType::U8, std::move(semantic), data};
  if (a.payload.size() != a.element_count()) throw std::invalid_argument("u8 array does not match its shape");
  return a;
}

Eigen::MatrixXd to_real_matrix(const ArrayFile& a) {
  if (a.dtype != DType::F64) throw DataError("expected an f64 array (" + a.semantic + ")");
  const auto [r, c] = two_dims(a);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  if (m.size()) std::memcpy(m.data(), a.payload.data(), a.payload.size());
  return m;
}

Eigen::MatrixXcd to_complex_matrix(const ArrayFile& a) {
  if (a.dtype != DType::C128) throw DataError("expected a c128 array (" + a.semantic + ")");
  const auto [r, c] = two_dims(a);
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  if (m.size()) std::memcpy(static_cast<void*>(m.data()), a.payload.data(), a.payload.size());
  return m;
}

Eigen::VectorXd to_real_vector(const ArrayFile& a) {
  if (a.shape.size() != 1) throw DataError("expected a 1-D array (" + a.semantic + ")");
  return to_real_matrix(a).col(0);
}

Eigen::VectorXcd to_complex_vector(const ArrayFile& a) {
  if (a.shape.size() != 1) throw DataError("expected a 1-D array (" + a.semantic + ")");
  return to_complex_matrix(a).col(0);
}

Eigen::VectorXd to_real_flat(const ArrayFile& a) {
  if (a.dtype != DType::F64) throw DataError("expected an f64 array (" + a.semantic + ")");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.element_count()));
  if (v.size()) std::memcpy(v.data(), a.payload.data(), a.payload.size());
  return v;
}

Eigen::VectorXcd to_complex_flat(const ArrayFile& a) {
  if (a.dtype != DType::C128) throw DataError("expected a c128 array (" + a.semantic + ")");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(a.element_count()));
  if (v.size()) std::memcpy(static_cast<void*>(v.data()), a.payload.data(), a.payload.size());
  return v;
}

void write_array_text(std::ostream& os, const ArrayFile& a) {
  const std::size_t n = a.element_count();
  const std::size_t line = a.shape.empty() ? 1 : std::max<std::size_t>(a.shape.back(), 1);
  os << "# shape";
  for (auto s : a.shape) os << ' ' << s;
  os << '\n';
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = a.payload.data() + i * dtype_size(a.dtype);
    if (a.dtype == DType::F64) {
      double v;
      std::memcpy(&v, p, 8);
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
    } else if (a.dtype == DType::C128) {
      double v[2];
      std::memcpy(v, p, 16);
      std::snprintf(buf, sizeof buf, "%.17g %.17g", v[0], v[1]);
      os << buf;
    } else {
      os << static_cast<int>(*p);
    }
    os << ((i + 1) % line == 0 ? '\n' : ' ');
  }
}

ArrayFile read_array_text(std::istream& is, DType dtype, std::string semantic) {
  ArrayFile a;
  a.dtype = dtype;
  a.semantic = std::move(semantic);
  std::string first;
  if (!std::getline(is, first) || first.rfind("# shape", 0) != 0) throw DataError("text array lacks a shape line");
  std::istringstream hs(first.substr(7));
  for (std::size_t s; hs >> s;) a.shape.push_back(s);
  const std::size_t n = a.element_count();
  a.payload.resize(n * dtype_size(dtype));
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t* p = a.payload.data() + i * dtype_size(dtype);
    if (dtype == DType::F64) {
      double v;
      if (!(is >> v)) throw DataError("text array truncated");
      std::memcpy(p, &v, 8);
    } else if (dtype == DType::C128) {
      double v[2];
      if (!(is >> v[0] >> v[1])) throw DataError("text array truncated");
      std::memcpy(p, v, 16);
    } else {
      int v;
      if (!(is >> v) || v < 0 || v > 255) throw DataError("bad u8 value in text array");
      *p = static_cast<std::uint8_t>(v);
    }
  }
  return a;
}

}  // namespace fodkq
