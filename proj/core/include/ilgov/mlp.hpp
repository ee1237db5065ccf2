#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "ilgov/rng.hpp"

namespace ilgov {

struct MlpGradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

// Fully connected ReLU network with a linear output layer. Batches are
// column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  // He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
  Mlp(int inputs, const std::vector<int>& hidden, int outputs, Rng& rng);

  int inputs() const { return static_cast<int>(W.front().cols()); }
  int outputs() const { return static_cast<int>(W.back().rows()); }
  std::size_t parameter_count() const;

  struct Cache {
    std::vector<Eigen::MatrixXd> a;  // a[0] = input, a[l] = post-activation of layer l
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& X, Cache& cache) const;
  // Gradients of a loss given dL/d(outputs) for the cached batch.
  MlpGradients backward(const Cache& cache, const Eigen::MatrixXd& dout) const;

  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& p);
  static Eigen::VectorXd flatten(const MlpGradients& g);

  void write(std::ostream& os) const;
  static Mlp read(std::istream& is);

  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
};

class Adam {
 public:
  explicit Adam(const Mlp& net, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(Mlp& net, const MlpGradients& g);

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> mW_, vW_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

// Column-wise softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

// Mean categorical cross-entropy over the batch; fills dL/dlogits when requested.
double softmax_cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                             Eigen::MatrixXd* dlogits = nullptr);

}  // namespace ilgov
