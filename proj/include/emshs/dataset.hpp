#pragma once

#include <vector>

#include <Eigen/Dense>

namespace emshs {

/// Raw observations as read from disk: rows are samples.
struct Observations {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
  /// Rows selected by `rows`, in that order.
  Observations subset(const std::vector<Eigen::Index>& rows) const;
};

/// Column centering/scaling and response centering applied at fit time.
struct Standardization {
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_scales;
  double y_mean = 0.0;

  /// (x - means) / scales, row by row.
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

/**
 * Design matrix and response in the form the solvers work on.
 *
 * `standardize` centers every column, scales it to squared norm n and
 * centers y. `as_is` keeps the inputs untouched (identity standardization);
 * it exists for solver tests on hand-built problems.
 */
class Dataset {
 public:
  /// Throws DataError on zero-variance columns or shape mismatch.
  static Dataset standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
  static Dataset standardize(const Observations& obs) { return standardize(obs.x, obs.y); }
  static Dataset as_is(Eigen::MatrixXd x, Eigen::VectorXd y);

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index p() const { return x_.cols(); }
  /// x_j' x_j per column.
  const Eigen::VectorXd& column_sq_norms() const { return sq_norms_; }
  const Standardization& standardization() const { return standardization_; }

 private:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Standardization s);

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd sq_norms_;
  Standardization standardization_;
};

}  // namespace emshs
