#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mjls/errors.hpp"

namespace mjls {

// Ordered collection of N same-shape real matrices indexed by Markov mode.
// Modes are 0-based throughout the in-process API; serialized files and CLI
// output use 1-based modes. A default-constructed set is empty ("unset");
// the validating constructor requires N >= 1 and identical shapes.
class NMatrixSet {
 public:
  NMatrixSet() = default;

  explicit NMatrixSet(std::vector<Eigen::MatrixXd> mats) : mats_(std::move(mats)) {
    if (mats_.empty()) {
      throw Error(ErrorCode::kDimensionMismatch, "NMatrixSet requires at least one matrix");
    }
    for (const auto& m : mats_) {
      if (m.rows() != mats_[0].rows() || m.cols() != mats_[0].cols()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "all matrices in an NMatrixSet must share one shape");
      }
    }
  }

  static NMatrixSet Zero(int count, int rows, int cols) {
    std::vector<Eigen::MatrixXd> mats(static_cast<std::size_t>(count),
                                      Eigen::MatrixXd::Zero(rows, cols));
    return NMatrixSet(std::move(mats));
  }

  int count() const { return static_cast<int>(mats_.size()); }
  int rows() const { return mats_.empty() ? 0 : static_cast<int>(mats_[0].rows()); }
  int cols() const { return mats_.empty() ? 0 : static_cast<int>(mats_[0].cols()); }
  bool empty() const { return mats_.empty(); }

  const Eigen::MatrixXd& operator[](int i) const { return mats_[static_cast<std::size_t>(i)]; }
  Eigen::MatrixXd& operator[](int i) { return mats_[static_cast<std::size_t>(i)]; }

  auto begin() const { return mats_.begin(); }
  auto end() const { return mats_.end(); }

  // Max over modes of the elementwise infinity norm of the difference.
  double max_abs_diff(const NMatrixSet& other) const {
    if (other.count() != count() || other.rows() != rows() || other.cols() != cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "NMatrixSet shapes differ in max_abs_diff");
    }
    double d = 0.0;
    for (int i = 0; i < count(); ++i) {
      d = std::max(d, ((*this)[i] - other[i]).cwiseAbs().maxCoeff());
    }
    return d;
  }

  double max_abs() const {
    double d = 0.0;
    for (const auto& m : mats_) d = std::max(d, m.cwiseAbs().maxCoeff());
    return d;
  }

 private:
  std::vector<Eigen::MatrixXd> mats_;
};

}  // namespace mjls
