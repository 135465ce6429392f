#include "fad/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace fad {

namespace {

constexpr char kMagic[4] = {'F', 'A', 'D', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ofstream& out, T value) {
  // Little-endian on every supported target.
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

DataSet DataSet::from_values(RowMatrix values) {
  const Index n = values.rows();
  const Index p = values.cols();
  check(n >= 2, "DataSet requires at least 2 observations, got " + std::to_string(n));
  check(p >= 1, "DataSet requires at least 1 variable");
  if (!values.allFinite()) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j)
        if (!std::isfinite(values(i, j)))
          throw FadError("non-finite entry at row " + std::to_string(i + 1) + ", column " +
                         std::to_string(j + 1));
  }
  DataSet d;
  d.values_ = std::move(values);
  d.mean_ = d.values_.colwise().mean();
  d.sd_.resize(p);
  for (Index j = 0; j < p; ++j) {
    const double var = (d.values_.col(j).array() - d.mean_[j]).square().sum() / double(n);
    if (!(var > 0.0))
      throw FadError("column " + std::to_string(j + 1) + " is constant (zero variance)");
    d.sd_[j] = std::sqrt(var);
  }
  return d;
}

RowMatrix read_matrix_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw FadError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  Index lineno = 0;
  Index p = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (header && lineno == 1) continue;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* s = line.c_str();
    Index col = 0;
    for (;;) {
      ++col;
      char* end = nullptr;
      const double v = std::strtod(s, &end);
      if (end == s)
        throw FadError("parse failure in '" + path + "' at row " + std::to_string(lineno) +
                       ", column " + std::to_string(col));
      row.push_back(v);
      s = end;
      while (*s == ' ' || *s == '\t') ++s;
      if (*s == ',') {
        ++s;
        continue;
      }
      if (*s == '\0' || *s == '\r') break;
      throw FadError("parse failure in '" + path + "' at row " + std::to_string(lineno) +
                     ", column " + std::to_string(col) + ": unexpected '" + *s + "'");
    }
    if (p < 0) p = static_cast<Index>(row.size());
    if (static_cast<Index>(row.size()) != p)
      throw FadError("ragged CSV '" + path + "': row " + std::to_string(lineno) + " has " +
                     std::to_string(row.size()) + " fields, expected " + std::to_string(p));
    rows.push_back(std::move(row));
  }
  check(!rows.empty(), "empty CSV '" + path + "'");
  RowMatrix values(static_cast<Index>(rows.size()), p);
  for (Index i = 0; i < values.rows(); ++i)
    for (Index j = 0; j < p; ++j) values(i, j) = rows[i][j];
  return values;
}

RowMatrix read_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FadError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FadError("'" + path + "' is not a FADM matrix file");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kVersion)
    throw FadError("unsupported FADM version " + std::to_string(version));
  const auto n = read_le<std::uint64_t>(in);
  const auto p = read_le<std::uint64_t>(in);
  RowMatrix values(static_cast<Index>(n), static_cast<Index>(p));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(n * p * sizeof(double)));
  if (!in) throw FadError("truncated FADM file '" + path + "'");
  return values;
}

void write_matrix_binary(const std::string& path, const RowMatrix& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FadError("cannot write '" + path + "'");
  out.write(kMagic, 4);
  write_le(out, kVersion);
  write_le(out, static_cast<std::uint64_t>(values.rows()));
  write_le(out, static_cast<std::uint64_t>(values.cols()));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  check(bool(out), "write failure on '" + path + "'");
}

DataSet DataSet::read_csv(const std::string& path, bool header) {
  return from_values(read_matrix_csv(path, header));
}

DataSet DataSet::read_binary(const std::string& path) {
  return from_values(read_matrix_binary(path));
}

void DataSet::write_binary(const std::string& path) const {
  write_matrix_binary(path, values_);
}

void DataSet::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FadError("cannot write '" + path + "'");
  char buf[32];
  for (Index i = 0; i < n(); ++i) {
    for (Index j = 0; j < p(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", values_(i, j));
      out << buf << (j + 1 < p() ? "," : "\n");
    }
  }
}

Vector DataSet::diag_s(ScaleMode mode) const {
  if (mode == ScaleMode::correlation) return Vector::Ones(p());
  return sd_.array().square();
}

void DataSet::centered_mult(const Vector& scale, const Vector& x, Vector& out) const {
  check(x.size() == p() && scale.size() == p(), "centered_mult: dimension mismatch");
  Vector xs = scale.cwiseProduct(x);
  out.resize(n());
  out.noalias() = values_ * xs;
  out.array() -= mean_.dot(xs);
}

void DataSet::centered_tmult(const Vector& scale, const Vector& u, Vector& out) const {
  check(u.size() == n() && scale.size() == p(), "centered_tmult: dimension mismatch");
  out.resize(p());
  out.noalias() = values_.transpose() * u;
  out.noalias() -= mean_ * u.sum();
  out.array() *= scale.array();
}

void DataSet::centered_mult(const Vector& scale, const Matrix& x, Matrix& out) const {
  check(x.rows() == p() && scale.size() == p(), "centered_mult: dimension mismatch");
  Matrix xs = scale.asDiagonal() * x;
  out.resize(n(), x.cols());
  out.noalias() = values_ * xs;
  out.rowwise() -= (mean_.transpose() * xs).eval();
}

void DataSet::centered_tmult(const Vector& scale, const Matrix& u, Matrix& out) const {
  check(u.rows() == n() && scale.size() == p(), "centered_tmult: dimension mismatch");
  out.resize(p(), u.cols());
  out.noalias() = values_.transpose() * u;
  out.noalias() -= mean_ * u.colwise().sum();
  out.array().colwise() *= scale.array();
}

}  // namespace fad
