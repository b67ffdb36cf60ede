#include "pyrafem/linalg.hpp"

#include <cassert>

namespace pyrafem {

void RatMatrix::append_row(const std::vector<Rational>& row) {
  assert(cols_ == 0 || row.size() == cols_);
  if (cols_ == 0) cols_ = row.size();
  data_.insert(data_.end(), row.begin(), row.end());
  ++rows_;
}

namespace {

// Gauss-Jordan; returns pivot columns.  a is modified in place.
std::vector<std::size_t> rref(std::vector<Rational>& a, std::size_t rows,
                              std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = rows;
    for (std::size_t i = r; i < rows; ++i) {
      if (a[i * cols + c] != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot == rows) continue;
    if (pivot != r)
      for (std::size_t j = 0; j < cols; ++j)
        std::swap(a[pivot * cols + j], a[r * cols + j]);
    Rational inv = 1 / a[r * cols + c];
    for (std::size_t j = c; j < cols; ++j) a[r * cols + j] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      Rational f = a[i * cols + c];
      if (f == 0) continue;
      for (std::size_t j = c; j < cols; ++j)
        a[i * cols + j] -= f * a[r * cols + j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

std::size_t RatMatrix::rank() const {
  auto a = data_;
  return rref(a, rows_, cols_).size();
}

std::vector<std::vector<Rational>> RatMatrix::nullspace() const {
  auto a = data_;
  auto pivots = rref(a, rows_, cols_);
  std::vector<bool> is_pivot(cols_, false);
  for (auto c : pivots) is_pivot[c] = true;

  std::vector<std::vector<Rational>> basis;
  for (std::size_t f = 0; f < cols_; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(cols_, Rational(0));
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r)
      v[pivots[r]] = -a[r * cols_ + f];
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<std::vector<Rational>> SpanBuilder::reduce(
    std::vector<Rational> v) const {
  for (std::size_t r = 0; r < reduced_.size(); ++r) {
    Rational f = v[pivot_cols_[r]];
    if (f == 0) continue;
    for (std::size_t j = 0; j < dim_; ++j) v[j] -= f * reduced_[r][j];
  }
  for (std::size_t j = 0; j < dim_; ++j)
    if (v[j] != 0) return v;
  return std::nullopt;
}

bool SpanBuilder::accept(const std::vector<Rational>& v) {
  auto residual = reduce(v);
  if (!residual) return false;
  std::size_t pc = 0;
  while ((*residual)[pc] == 0) ++pc;
  Rational inv = 1 / (*residual)[pc];
  for (auto& x : *residual) x *= inv;
  reduced_.push_back(std::move(*residual));
  pivot_cols_.push_back(pc);
  return true;
}

bool SpanBuilder::contains(const std::vector<Rational>& v) const {
  return !reduce(v).has_value();
}

}  // namespace pyrafem
