#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "edgeless/matrix.hpp"

namespace edgeless {

/// One sparse attribute row: (feature index, value) with indices sorted
/// ascending and no duplicates.
using SparseRow = std::vector<std::pair<std::uint32_t, double>>;

/// Sparse row-major node-attribute store with cached row norms.
class AttributeMatrix {
public:
  AttributeMatrix() = default;
  AttributeMatrix(std::size_t num_nodes, std::size_t num_features)
      : num_features_(num_features), rows_(num_nodes), norms_(num_nodes, 0.0) {}

  std::size_t num_nodes() const { return rows_.size(); }
  std::size_t num_features() const { return num_features_; }

  void set_row(std::size_t i, SparseRow row) {
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k + 1 < row.size(); ++k)
      if (row[k].first == row[k + 1].first)
        throw std::invalid_argument("AttributeMatrix: duplicate feature index in row");
    for (auto& [f, v] : row)
      if (f >= num_features_) throw std::invalid_argument("AttributeMatrix: feature index out of range");
    double s = 0.0;
    for (auto& [f, v] : row) s += v * v;
    norms_[i] = std::sqrt(s);
    rows_[i] = std::move(row);
  }

  const SparseRow& row(std::size_t i) const { return rows_[i]; }
  double row_norm(std::size_t i) const { return norms_[i]; }

  std::size_t num_nonzeros() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }

  Matrix to_dense() const {
    Matrix m(num_nodes(), num_features_);
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (auto [f, v] : rows_[i]) m(i, f) = v;
    return m;
  }

  /// Row-stack: `this` rows first, then `other` rows.
  AttributeMatrix concat_rows(const AttributeMatrix& other) const {
    if (num_features_ != other.num_features_)
      throw std::invalid_argument("concat_rows: feature dimension mismatch");
    AttributeMatrix out(num_nodes() + other.num_nodes(), num_features_);
    out.rows_ = rows_;
    out.norms_ = norms_;
    out.rows_.insert(out.rows_.end(), other.rows_.begin(), other.rows_.end());
    out.norms_.insert(out.norms_.end(), other.norms_.begin(), other.norms_.end());
    return out;
  }

  AttributeMatrix select_rows(const std::vector<std::uint32_t>& ids) const {
    AttributeMatrix out(ids.size(), num_features_);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out.rows_[i] = rows_[ids[i]];
      out.norms_[i] = norms_[ids[i]];
    }
    return out;
  }

private:
  std::size_t num_features_ = 0;
  std::vector<SparseRow> rows_;
  std::vector<double> norms_;
};

inline double sparse_dot(const SparseRow& a, const SparseRow& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      s += a[i].second * b[j].second;
      ++i;
      ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

/// Cosine similarity; 0 when either vector has zero norm.
inline double cosine_similarity(const SparseRow& a, const SparseRow& b) {
  double na = 0.0, nb = 0.0;
  for (auto [f, v] : a) na += v * v;
  for (auto [f, v] : b) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return sparse_dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
}

inline double cosine_similarity(const AttributeMatrix& x, std::size_t i, std::size_t j) {
  double na = x.row_norm(i), nb = x.row_norm(j);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return sparse_dot(x.row(i), x.row(j)) / (na * nb);
}

}  // namespace edgeless
