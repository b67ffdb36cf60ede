#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pyrafem/rational.hpp"

namespace pyrafem {

/// Dense matrix over exact rationals.  Sized for the rank/nullspace
/// problems that arise in basis construction (a few hundred rows).
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  const Rational& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  void append_row(const std::vector<Rational>& row);

  std::size_t rank() const;
  /// Basis of the right nullspace (vectors of length cols()).
  std::vector<std::vector<Rational>> nullspace() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

/// Incremental row-reduction with first-come pivoting.  Feed candidate
/// vectors in order; accept() reports whether the vector enlarged the span.
class SpanBuilder {
 public:
  explicit SpanBuilder(std::size_t dim) : dim_(dim) {}

  bool accept(const std::vector<Rational>& v);
  std::size_t rank() const { return reduced_.size(); }
  /// True iff v already lies in the current span.
  bool contains(const std::vector<Rational>& v) const;
  std::size_t dim() const { return dim_; }

 private:
  std::optional<std::vector<Rational>> reduce(std::vector<Rational> v) const;

  std::size_t dim_;
  std::vector<std::vector<Rational>> reduced_;  // rows with unit leading pivot
  std::vector<std::size_t> pivot_cols_;
};

}  // namespace pyrafem
