#ifndef LADDER_GP_HPP
#define LADDER_GP_HPP

#include <Eigen/Dense>
#include <vector>

namespace ladder {

struct GpKernelParams {
  double signal_variance = 1.0;
  double length_scale = 1.0;  // isotropic, on standardized inputs
  double noise_variance = 1e-3;
};

// Log-spaced candidate axis of the hyperparameter grid.
struct GpGridAxis {
  double min = 0.0;
  double max = 0.0;
  int count = 0;

  std::vector<double> values() const;
};

struct GpHyper {
  GpGridAxis length_scale{0.1, 10.0, 8};
  GpGridAxis signal_variance{0.01, 10.0, 8};
  GpGridAxis noise_variance{1e-6, 1.0, 8};
  // Relative diagonal jitter added when the Cholesky factorization fails;
  // escalated twice before giving up. Zero disables the retry.
  double jitter = 1e-10;
};

// Zero-mean GP on centered targets with an RBF + white-noise kernel.
// Hyperparameters are chosen by exhaustive log marginal likelihood
// maximization over the grid.
class GpRegressor {
 public:
  static GpRegressor fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                         const GpHyper& hyper);

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  const GpKernelParams& params() const { return params_; }
  double target_mean() const { return target_mean_; }
  double log_marginal() const { return log_marginal_; }
  const Eigen::MatrixXd& training_inputs() const { return x_train_; }
  const Eigen::VectorXd& solve_vector() const { return alpha_; }

  // Likelihood of one candidate; exposed so the grid choice can be audited.
  static double log_marginal_likelihood(const Eigen::MatrixXd& inputs,
                                        const Eigen::VectorXd& centered_targets,
                                        const GpKernelParams& params, double jitter);

  static GpRegressor assemble(Eigen::MatrixXd inputs, Eigen::VectorXd alpha,
                              GpKernelParams params, double target_mean);

 private:
  GpRegressor() = default;

  Eigen::MatrixXd x_train_;
  Eigen::VectorXd alpha_;
  GpKernelParams params_;
  double target_mean_ = 0.0;
  double log_marginal_ = 0.0;
};

}  // namespace ladder

#endif  // LADDER_GP_HPP
