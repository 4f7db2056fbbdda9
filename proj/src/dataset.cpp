#include "emshs/dataset.hpp"

#include <cmath>
#include <string>

#include "emshs/errors.hpp"

namespace emshs {

Observations Observations::subset(const std::vector<Eigen::Index>& rows) const {
  Observations out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    out.y[static_cast<Eigen::Index>(i)] = y[rows[i]];
  }
  return out;
}

Eigen::MatrixXd Standardization::transform(const Eigen::MatrixXd& x) const {
  if (x.cols() != column_means.size()) {
    throw DimensionError("matrix has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(column_means.size()));
  }
  return (x.rowwise() - column_means.transpose()).array().rowwise() /
         column_scales.transpose().array();
}

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Standardization s)
    : x_(std::move(x)), y_(std::move(y)), standardization_(std::move(s)) {
  sq_norms_ = x_.colwise().squaredNorm().transpose();
}

Dataset Dataset::standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) {
    throw DimensionError("X has " + std::to_string(x.rows()) + " rows but y has " +
                         std::to_string(y.size()) + " entries");
  }
  if (x.rows() < 2) throw DataError("need at least two observations");
  const auto n = static_cast<double>(x.rows());

  Standardization s;
  s.column_means = x.colwise().mean().transpose();
  s.column_scales.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - s.column_means[j]).square().sum();
    const double scale = std::sqrt(ss / n);
    if (!(scale > 1e-12 * (1.0 + std::abs(s.column_means[j])))) {
      throw DataError("column " + std::to_string(j + 1) + " has zero variance");
    }
    s.column_scales[j] = scale;
  }
  s.y_mean = y.mean();
  Eigen::MatrixXd xs = s.transform(x);
  Eigen::VectorXd yc = y.array() - s.y_mean;
  return Dataset(std::move(xs), std::move(yc), std::move(s));
}

Dataset Dataset::as_is(Eigen::MatrixXd x, Eigen::VectorXd y) {
  if (x.rows() != y.size()) throw DimensionError("X rows and y length differ");
  Standardization s;
  s.column_means = Eigen::VectorXd::Zero(x.cols());
  s.column_scales = Eigen::VectorXd::Ones(x.cols());
  s.y_mean = 0.0;
  return Dataset(std::move(x), std::move(y), std::move(s));
}

}  // namespace emshs
