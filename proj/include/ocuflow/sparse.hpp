#pragma once

#include <algorithm>
#include <fstream>
#include <charconv>

#include "ocuflow/core.hpp"

namespace ocuflow {

/// CSR sparse matrix; column indices strictly increasing within each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Builds the pattern from (row, col) pairs; duplicates merged.
  SparseMatrix(int rows, int cols, std::vector<std::pair<int, int>> entries)
      : nrows_(rows), ncols_(cols) {
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    row_ptr_.assign(rows + 1, 0);
    for (const auto& [i, j] : entries) {
      require(i >= 0 && i < rows && j >= 0 && j < cols, "SparseMatrix: entry out of range");
      row_ptr_[i + 1]++;
    }
    for (int i = 0; i < rows; ++i) row_ptr_[i + 1] += row_ptr_[i];
    col_.resize(entries.size());
    val_.assign(entries.size(), 0.0);
    std::size_t k = 0;
    for (const auto& [i, j] : entries) col_[k++] = j;
  }

  int rows() const { return nrows_; }
  int cols() const { return ncols_; }
  std::size_t nnz() const { return col_.size(); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_; }
  const Vec& values() const { return val_; }
  Vec& values() { return val_; }

  /// Accumulate into an existing pattern slot.
  void add(int i, int j, double v) {
    const int k = find(i, j);
    require(k >= 0, "SparseMatrix::add: entry (" + std::to_string(i) + "," +
                        std::to_string(j) + ") not in pattern");
    val_[k] += v;
  }

  double get(int i, int j) const {
    const int k = find(i, j);
    return k < 0 ? 0.0 : val_[k];
  }

  void set_zero() { std::fill(val_.begin(), val_.end(), 0.0); }

  void multiply(const Vec& x, Vec& y) const {
    y.assign(nrows_, 0.0);
    for (int i = 0; i < nrows_; ++i) {
      double s = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
      y[i] = s;
    }
  }

  Vec multiply(const Vec& x) const {
    Vec y;
    multiply(x, y);
    return y;
  }

  /// y += alpha * A x
  void multiply_add(const Vec& x, Vec& y, double alpha = 1.0) const {
    for (int i = 0; i < nrows_; ++i) {
      double s = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
      y[i] += alpha * s;
    }
  }

  SparseMatrix transposed() const {
    SparseMatrix t;
    t.nrows_ = ncols_;
    t.ncols_ = nrows_;
    t.row_ptr_.assign(ncols_ + 1, 0);
    for (int j : col_) t.row_ptr_[j + 1]++;
    for (int i = 0; i < ncols_; ++i) t.row_ptr_[i + 1] += t.row_ptr_[i];
    t.col_.resize(nnz());
    t.val_.resize(nnz());
    std::vector<int> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (int i = 0; i < nrows_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const int slot = next[col_[k]]++;
        t.col_[slot] = i;
        t.val_[slot] = val_[k];
      }
    return t;
  }

  Vec diagonal() const {
    Vec d(std::min(nrows_, ncols_), 0.0);
    for (int i = 0; i < int(d.size()); ++i) d[i] = get(i, i);
    return d;
  }

  /// Symmetric Dirichlet elimination: moves column contributions of the
  /// constrained dofs to the rhs, then zeroes rows/columns and places a unit
  /// diagonal. `value[i]` is the prescribed value of constrained dof i.
  void eliminate_dirichlet(const std::vector<char>& constrained, Vec& rhs,
                           const Vec& value) {
    require(int(constrained.size()) == nrows_ && nrows_ == ncols_,
            "eliminate_dirichlet: square matrix required");
    for (int i = 0; i < nrows_; ++i) {
      if (constrained[i]) continue;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const int j = col_[k];
        if (constrained[j]) {
          rhs[i] -= val_[k] * value[j];
          val_[k] = 0.0;
        }
      }
    }
    for (int i = 0; i < nrows_; ++i) {
      if (!constrained[i]) continue;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        val_[k] = (col_[k] == i) ? 1.0 : 0.0;
      rhs[i] = value[i];
    }
  }

  /// Zero all rows (or columns) flagged in `mask`; for rectangular coupling
  /// blocks adjacent to eliminated dofs.
  void zero_rows(const std::vector<char>& mask) {
    for (int i = 0; i < nrows_; ++i)
      if (mask[i])
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) val_[k] = 0.0;
  }

  void zero_cols(const std::vector<char>& mask) {
    for (int i = 0; i < nrows_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        if (mask[col_[k]]) val_[k] = 0.0;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : val_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int find(int i, int j) const {
    const auto begin = col_.begin() + row_ptr_[i];
    const auto end = col_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return -1;
    return int(it - col_.begin());
  }

  int nrows_ = 0, ncols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  Vec val_;
};

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

/// ASCII Matrix Market export ("coordinate real general", 1-based).
inline void write_matrix_market(const SparseMatrix& A, const std::string& path) {
  std::ofstream os(path);
  require(bool(os), "write_matrix_market: cannot open " + path);
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << " " << A.cols() << " " << A.nnz() << "\n";
  const auto& rp = A.row_ptr();
  const auto& ci = A.col_idx();
  const auto& v = A.values();
  for (int i = 0; i < A.rows(); ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      os << (i + 1) << " " << (ci[k] + 1) << " " << format_double(v[k]) << "\n";
  require(bool(os), "write_matrix_market: write failed for " + path);
}

}  // namespace ocuflow
