#include "ilgov/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "ilgov/errors.hpp"
#include "text_io.hpp"

namespace ilgov {

Mlp::Mlp(int inputs, const std::vector<int>& hidden, int outputs, Rng& rng) {
  if (inputs < 1 || outputs < 1) throw DomainError("network needs inputs and outputs");
  std::vector<int> sizes{inputs};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(outputs);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l + 1] < 1) throw DomainError("layer width must be positive");
    const double limit = std::sqrt(6.0 / sizes[l]);
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
    W.push_back(std::move(w));
    b.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd a = X;
  for (std::size_t l = 0; l < W.size(); ++l) {
    Eigen::MatrixXd z = W[l] * a;
    z.colwise() += b[l];
    a = l + 1 < W.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X, Cache& cache) const {
  if (X.rows() != inputs()) throw DomainError("network input dimension mismatch");
  cache.a.assign(1, X);
  for (std::size_t l = 0; l < W.size(); ++l) {
    Eigen::MatrixXd z = W[l] * cache.a.back();
    z.colwise() += b[l];
    if (l + 1 < W.size()) z = z.cwiseMax(0.0);
    cache.a.push_back(std::move(z));
  }
  return cache.a.back();
}

MlpGradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dout) const {
  MlpGradients g;
  g.dW.resize(W.size());
  g.db.resize(W.size());
  Eigen::MatrixXd delta = dout;
  for (std::size_t l = W.size(); l-- > 0;) {
    g.dW[l] = delta * cache.a[l].transpose();
    g.db[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = W[l].transpose() * delta;
      delta = delta.cwiseProduct((cache.a[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

Eigen::VectorXd Mlp::flat_parameters() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index i = 0;
  for (std::size_t l = 0; l < W.size(); ++l) {
    p.segment(i, W[l].size()) = Eigen::Map<const Eigen::VectorXd>(W[l].data(), W[l].size());
    i += W[l].size();
    p.segment(i, b[l].size()) = b[l];
    i += b[l].size();
  }
  return p;
}

void Mlp::set_flat_parameters(const Eigen::VectorXd& p) {
  if (p.size() != static_cast<Eigen::Index>(parameter_count()))
    throw DomainError("parameter vector size mismatch");
  Eigen::Index i = 0;
  for (std::size_t l = 0; l < W.size(); ++l) {
    Eigen::Map<Eigen::VectorXd>(W[l].data(), W[l].size()) = p.segment(i, W[l].size());
    i += W[l].size();
    b[l] = p.segment(i, b[l].size());
    i += b[l].size();
  }
}

Eigen::VectorXd Mlp::flatten(const MlpGradients& g) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < g.dW.size(); ++l) n += g.dW[l].size() + g.db[l].size();
  Eigen::VectorXd p(n);
  Eigen::Index i = 0;
  for (std::size_t l = 0; l < g.dW.size(); ++l) {
    p.segment(i, g.dW[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(g.dW[l].data(), g.dW[l].size());
    i += g.dW[l].size();
    p.segment(i, g.db[l].size()) = g.db[l];
    i += g.db[l].size();
  }
  return p;
}

void Mlp::write(std::ostream& os) const {
  os << "mlp " << W.size() << '\n';
  for (std::size_t l = 0; l < W.size(); ++l) {
    detail::put_matrix(os, "W", W[l]);
    detail::put_vector(os, "b", b[l]);
  }
}

Mlp Mlp::read(std::istream& is) {
  detail::expect(is, "mlp");
  const long layers = detail::get_long(is);
  Mlp m;
  for (long l = 0; l < layers; ++l) {
    m.W.push_back(detail::get_matrix(is, "W"));
    m.b.push_back(detail::get_vector(is, "b"));
    if (m.b.back().size() != m.W.back().rows() ||
        (l > 0 && m.W.back().cols() != m.W[static_cast<std::size_t>(l) - 1].rows()))
      throw FormatError("inconsistent layer shapes in network checkpoint");
  }
  if (m.W.empty()) throw FormatError("network checkpoint has no layers");
  return m;
}

Adam::Adam(const Mlp& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    mW_.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    vW_.push_back(mW_.back());
    mb_.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    vb_.push_back(mb_.back());
  }
}

void Adam::step(Mlp& net, const MlpGradients& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    mW_[l] = b1_ * mW_[l] + (1 - b1_) * g.dW[l];
    vW_[l] = b2_ * vW_[l] + (1 - b2_) * g.dW[l].cwiseAbs2();
    net.W[l].array() -= lr_ * (mW_[l].array() / c1) / ((vW_[l].array() / c2).sqrt() + eps_);
    mb_[l] = b1_ * mb_[l] + (1 - b1_) * g.db[l];
    vb_[l] = b2_ * vb_[l] + (1 - b2_) * g.db[l].cwiseAbs2();
    net.b[l].array() -= lr_ * (mb_[l].array() / c1) / ((vb_[l].array() / c2).sqrt() + eps_);
  }
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    p.col(c) = (logits.col(c).array() - m).exp().matrix();
    p.col(c) /= p.col(c).sum();
  }
  return p;
}

double softmax_cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                             Eigen::MatrixXd* dlogits) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.cols())
    throw DomainError("label count does not match batch size");
  const Eigen::MatrixXd p = softmax(logits);
  const double n = static_cast<double>(labels.size());
  double loss = 0;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    const int y = labels[static_cast<std::size_t>(c)];
    if (y < 0 || y >= p.rows()) throw DomainError("class label out of range");
    loss -= std::log(std::max(p(y, c), 1e-300));
  }
  if (dlogits) {
    *dlogits = p;
    for (Eigen::Index c = 0; c < p.cols(); ++c) (*dlogits)(labels[static_cast<std::size_t>(c)], c) -= 1.0;
    *dlogits /= n;
  }
  return loss / n;
}

}  // namespace ilgov
