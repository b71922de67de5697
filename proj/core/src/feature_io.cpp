#include "mftb/feature_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mftb::io {

namespace {

constexpr double kLoadUnitTolerance = 1e-5;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

std::uint64_t f64_bits(double x) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &x, sizeof(bits));
  return bits;
}

double f64_from_bits(std::uint64_t bits) {
  double x = 0.0;
  std::memcpy(&x, &bits, sizeof(x));
  return x;
}

std::uint32_t f32_bits(float x) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &x, sizeof(bits));
  return bits;
}

float f32_from_bits(std::uint32_t bits) {
  float x = 0.0f;
  std::memcpy(&x, &bits, sizeof(x));
  return x;
}

}  // namespace

void save_feature_matrix(const drift::FeatureMatrix& matrix,
                         const std::filesystem::path& path, Dtype dtype) {
  if (dtype != Dtype::kFloat64 && dtype != Dtype::kFloat32) {
    throw InvalidArgument("save_feature_matrix: unsupported dtype code " +
                          std::to_string(static_cast<int>(dtype)));
  }
  std::string bytes;
  const std::uint64_t n_rows = static_cast<std::uint64_t>(matrix.count());
  const std::uint64_t dim = static_cast<std::uint64_t>(matrix.dim());
  const std::size_t value_size = dtype == Dtype::kFloat64 ? 8 : 4;
  bytes.reserve(kHeaderSize + n_rows * dim * value_size);

  bytes.append(kMagic, 4);
  put_u32(bytes, kFormatVersion);
  put_u64(bytes, n_rows);
  put_u64(bytes, dim);
  bytes.push_back(static_cast<char>(dtype));
  bytes.push_back(matrix.normalized ? 1 : 0);
  bytes.append(14, '\0');

  for (Eigen::Index i = 0; i < matrix.count(); ++i) {
    for (Eigen::Index j = 0; j < matrix.dim(); ++j) {
      if (dtype == Dtype::kFloat64) {
        put_u64(bytes, f64_bits(matrix.rows(i, j)));
      } else {
        put_u32(bytes, f32_bits(static_cast<float>(matrix.rows(i, j))));
      }
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoFailure("save_feature_matrix: cannot open " + path.string() +
                    " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoFailure("save_feature_matrix: write failed for " + path.string());
  }
}

drift::FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoFailure("load_feature_matrix: cannot open " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderSize) {
    throw TruncatedPayload("load_feature_matrix: file holds " +
                           std::to_string(bytes.size()) +
                           " bytes, header needs " +
                           std::to_string(kHeaderSize));
  }
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, kMagic, 4) != 0) {
    throw BadMagic("load_feature_matrix: magic is not MFTB");
  }
  std::uint32_t version = get_u32(p + 4);
  if (version != kFormatVersion) {
    throw BadVersion("load_feature_matrix: version " +
                     std::to_string(version) + ", expected " +
                     std::to_string(kFormatVersion));
  }
  std::uint64_t n_rows = get_u64(p + 8);
  std::uint64_t dim = get_u64(p + 16);
  std::uint8_t dtype_code = p[24];
  std::uint8_t normalized_flag = p[25];
  if (dtype_code != 1 && dtype_code != 2) {
    throw MalformedHeader("load_feature_matrix: dtype code " +
                          std::to_string(dtype_code) + " is not 1 or 2");
  }
  if (normalized_flag > 1) {
    throw MalformedHeader("load_feature_matrix: normalized flag " +
                          std::to_string(normalized_flag) + " is not 0 or 1");
  }
  for (int i = 26; i < 40; ++i) {
    if (p[i] != 0) {
      throw MalformedHeader("load_feature_matrix: reserved byte " +
                            std::to_string(i) + " is nonzero");
    }
  }
  const std::size_t value_size = dtype_code == 1 ? 8 : 4;
  const std::size_t expected = n_rows * dim * value_size;
  if (bytes.size() - kHeaderSize != expected) {
    throw TruncatedPayload("load_feature_matrix: payload holds " +
                           std::to_string(bytes.size() - kHeaderSize) +
                           " bytes, header claims " + std::to_string(expected));
  }

  drift::FeatureMatrix matrix;
  matrix.normalized = normalized_flag == 1;
  matrix.rows.resize(static_cast<Eigen::Index>(n_rows),
                     static_cast<Eigen::Index>(dim));
  const unsigned char* payload = p + kHeaderSize;
  for (std::uint64_t i = 0; i < n_rows; ++i) {
    for (std::uint64_t j = 0; j < dim; ++j) {
      if (dtype_code == 1) {
        matrix.rows(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(j)) =
            f64_from_bits(get_u64(payload));
        payload += 8;
      } else {
        matrix.rows(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(j)) =
            static_cast<double>(f32_from_bits(get_u32(payload)));
        payload += 4;
      }
    }
  }

  if (matrix.normalized) {
    for (Eigen::Index i = 0; i < matrix.count(); ++i) {
      double norm = matrix.rows.row(i).norm();
      if (std::abs(norm - 1.0) > kLoadUnitTolerance) {
        throw NotNormalized("load_feature_matrix: row " + std::to_string(i) +
                            " has norm " + std::to_string(norm) +
                            " but the normalized flag is set");
      }
    }
  }
  return matrix;
}

drift::FeatureMatrix load_feature_matrix_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoFailure("load_feature_matrix_csv: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw MalformedHeader("load_feature_matrix_csv: empty file");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line.rfind("dim=", 0) != 0) {
    throw MalformedHeader(
        "load_feature_matrix_csv: first line must be dim=<d>, got \"" + line +
        "\"");
  }
  Eigen::Index dim = 0;
  try {
    dim = static_cast<Eigen::Index>(std::stoll(line.substr(4)));
  } catch (const std::exception&) {
    throw MalformedHeader("load_feature_matrix_csv: cannot parse \"" + line +
                          "\"");
  }
  if (dim < 1) {
    throw MalformedHeader("load_feature_matrix_csv: dim must be >= 1");
  }

  std::vector<double> values;
  Eigen::Index n_rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::stringstream row(line);
    std::string cell;
    Eigen::Index count = 0;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw MalformedHeader("load_feature_matrix_csv: bad value \"" + cell +
                              "\" on data line " + std::to_string(n_rows + 1));
      }
      ++count;
    }
    if (count != dim) {
      throw MalformedHeader("load_feature_matrix_csv: data line " +
                            std::to_string(n_rows + 1) + " holds " +
                            std::to_string(count) + " values, expected " +
                            std::to_string(dim));
    }
    ++n_rows;
  }

  drift::FeatureMatrix matrix;
  matrix.rows.resize(n_rows, dim);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      matrix.rows(i, j) = values[static_cast<std::size_t>(i * dim + j)];
    }
  }
  return matrix;
}

}  // namespace mftb::io
