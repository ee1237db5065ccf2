#include <cmath>

#include "ilgov/errors.hpp"
#include "ilgov/models.hpp"

namespace ilgov {

LinearModel::LinearModel(Eigen::Index dim, double forgetting_, double p0, double cap)
    : theta(Eigen::VectorXd::Zero(dim)),
      P(Eigen::MatrixXd::Identity(dim, dim) * p0),
      forgetting(forgetting_),
      trace_cap(cap) {
  if (!(forgetting > 0 && forgetting <= 1)) throw DomainError("forgetting factor must be in (0,1]");
  if (!(p0 > 0)) throw DomainError("initial covariance scale must be positive");
}

double LinearModel::predict(const Eigen::VectorXd& phi) const {
  if (phi.size() != theta.size()) throw DomainError("feature dimension mismatch");
  return theta.dot(phi);
}

void LinearModel::rls_update(const Eigen::VectorXd& phi, double y) {
  if (phi.size() != theta.size()) throw DomainError("feature dimension mismatch");
  if (!phi.allFinite() || !std::isfinite(y)) throw NumericError("non-finite RLS input");

  const Eigen::VectorXd Pphi = P * phi;
  const double denom = forgetting + phi.dot(Pphi);
  const Eigen::VectorXd k = Pphi / denom;
  const double innovation = y - theta.dot(phi);
  Eigen::VectorXd theta_new = theta + k * innovation;
  Eigen::MatrixXd P_new = (P - k * Pphi.transpose()) / forgetting;
  P_new = 0.5 * (P_new + P_new.transpose()).eval();
  if (trace_cap > 0) {
    const double tr = P_new.trace();
    if (tr > trace_cap) P_new *= trace_cap / tr;
  }
  if (!std::isfinite(denom) || !theta_new.allFinite() || !P_new.allFinite())
    throw NumericError("RLS update produced non-finite values; update skipped");
  theta = std::move(theta_new);
  P = std::move(P_new);
}

void LinearModel::reset_covariance(double p0) {
  P = Eigen::MatrixXd::Identity(theta.size(), theta.size()) * p0;
}

bool solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         Eigen::VectorXd& theta, double ridge) {
  if (X.rows() != y.size()) throw DomainError("design and target sizes differ");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (X.rows() >= X.cols() && qr.rank() == X.cols()) {
    theta = qr.solve(y);
    return false;
  }
  const Eigen::MatrixXd A =
      X.transpose() * X + ridge * Eigen::MatrixXd::Identity(X.cols(), X.cols());
  theta = A.ldlt().solve(X.transpose() * y);
  return true;
}

}  // namespace ilgov
