#pragma once

#include "fodkq/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fodkq {

enum class DType { F64, C128, U8 };

[[nodiscard]] std::string to_string(DType t);
[[nodiscard]] DType parse_dtype(const std::string& s);
[[nodiscard]] std::size_t dtype_size(DType t);

/// Raw n-dimensional array: a 16-byte ASCII prefix "FODKQ1 <8-digit header
/// length>\n", a JSON header {shape, dtype, layout, byte_order, semantic}
/// and the little-endian row-major payload.
struct ArrayFile {
  std::vector<std::size_t> shape;
  DType dtype = DType::F64;
  std::string semantic;
  std::vector<std::uint8_t> payload;

  [[nodiscard]] std::size_t element_count() const;
};

void write_array(std::ostream& os, const ArrayFile& a);
/// Throws DataError on a bad prefix, malformed header or payload size.
[[nodiscard]] ArrayFile read_array(std::istream& is);

void save_array(const std::filesystem::path& path, const ArrayFile& a);
/// Errors name the offending file.
[[nodiscard]] ArrayFile load_array(const std::filesystem::path& path);

// Eigen matrices are stored with shape {rows, cols}; vectors with {size}.
[[nodiscard]] ArrayFile make_array(const Eigen::MatrixXd& m, std::string semantic);
[[nodiscard]] ArrayFile make_array(const Eigen::MatrixXcd& m, std::string semantic);
[[nodiscard]] ArrayFile make_array(const Eigen::VectorXd& v, std::string semantic);
[[nodiscard]] ArrayFile make_array(const Eigen::VectorXcd& v, std::string semantic);
[[nodiscard]] ArrayFile make_u8_array(const std::vector<std::uint8_t>& data, std::vector<std::size_t> shape,
                                      std::string semantic);

/// 1-D arrays become column vectors.
[[nodiscard]] Eigen::MatrixXd to_real_matrix(const ArrayFile& a);
[[nodiscard]] Eigen::MatrixXcd to_complex_matrix(const ArrayFile& a);
[[nodiscard]] Eigen::VectorXd to_real_vector(const ArrayFile& a);
[[nodiscard]] Eigen::VectorXcd to_complex_vector(const ArrayFile& a);
/// All elements in row-major order, whatever the rank.
[[nodiscard]] Eigen::VectorXd to_real_flat(const ArrayFile& a);
[[nodiscard]] Eigen::VectorXcd to_complex_flat(const ArrayFile& a);

/// Whitespace-separated text, one row per line, last axis along the line.
/// Complex values are written as "re im" pairs.
void write_array_text(std::ostream& os, const ArrayFile& a);
[[nodiscard]] ArrayFile read_array_text(std::istream& is, DType dtype, std::string semantic);

}  // namespace fodkq
