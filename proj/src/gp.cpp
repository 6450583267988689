#include "ladder/gp.hpp"

#include <cmath>
#include <numbers>

#include "ladder/error.hpp"

namespace ladder {

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const GpKernelParams& p) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  const double inv2l2 = 1.0 / (2.0 * p.length_scale * p.length_scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = p.signal_variance + p.noise_variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (X.row(i) - X.row(j)).squaredNorm();
      const double v = p.signal_variance * std::exp(-d2 * inv2l2);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

// Cholesky with escalating diagonal jitter on failure.
Eigen::LLT<Eigen::MatrixXd> factorize(Eigen::MatrixXd K, double jitter) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) return llt;
  if (jitter > 0.0) {
    const double scale = K.diagonal().mean();
    for (int attempt = 0; attempt < 3; ++attempt) {
      const double eps = jitter * scale * std::pow(100.0, attempt);
      llt.compute(K + eps * Eigen::MatrixXd::Identity(K.rows(), K.cols()));
      if (llt.info() == Eigen::Success) return llt;
    }
  }
  throw Error(Errc::singular_kernel,
              "kernel matrix is not positive definite after jitter");
}

}  // namespace

std::vector<double> GpGridAxis::values() const {
  if (count < 1 || !(min > 0.0) || !(max >= min)) {
    throw Error(Errc::bad_params, "grid axis needs 0 < min <= max and count >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = min;
    return out;
  }
  const double step = std::log(max / min) / (count - 1);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = min * std::exp(step * i);
  }
  return out;
}

double GpRegressor::log_marginal_likelihood(const Eigen::MatrixXd& inputs,
                                            const Eigen::VectorXd& centered_targets,
                                            const GpKernelParams& params,
                                            double jitter) {
  const Eigen::LLT<Eigen::MatrixXd> llt = factorize(kernel_matrix(inputs, params), jitter);
  const Eigen::VectorXd alpha = llt.solve(centered_targets);
  const double data_fit = -0.5 * centered_targets.dot(alpha);
  const double log_det =
      llt.matrixLLT().diagonal().array().log().sum();  // = 0.5 log|K|
  const double n = static_cast<double>(inputs.rows());
  return data_fit - log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

GpRegressor GpRegressor::fit(const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& targets, const GpHyper& hyper) {
  if (inputs.rows() != targets.size() || inputs.rows() < 1) {
    throw Error(Errc::bad_params, "gp training shape mismatch");
  }

  const double target_mean = targets.mean();
  const Eigen::VectorXd centered = targets.array() - target_mean;

  const std::vector<double> lengths = hyper.length_scale.values();
  const std::vector<double> signals = hyper.signal_variance.values();
  const std::vector<double> noises = hyper.noise_variance.values();

  struct Candidate {
    GpKernelParams params;
    double lml;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(lengths.size() * signals.size() * noises.size());
  for (double l : lengths) {
    for (double s : signals) {
      for (double nv : noises) {
        candidates.push_back({GpKernelParams{s, l, nv}, 0.0});
      }
    }
  }

  bool failed = false;
  std::string failure;
#pragma omp parallel for
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    Candidate& cand = candidates[static_cast<std::size_t>(i)];
    try {
      cand.lml = log_marginal_likelihood(inputs, centered, cand.params, hyper.jitter);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = true;
        failure = e.what();
      }
    }
  }
  if (failed) throw Error(Errc::singular_kernel, failure);

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].lml > candidates[best].lml) best = i;
  }

  GpRegressor model;
  model.x_train_ = inputs;
  model.params_ = candidates[best].params;
  model.target_mean_ = target_mean;
  model.log_marginal_ = candidates[best].lml;
  const Eigen::LLT<Eigen::MatrixXd> llt =
      factorize(kernel_matrix(inputs, model.params_), hyper.jitter);
  model.alpha_ = llt.solve(centered);
  return model;
}

double GpRegressor::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  const double inv2l2 =
      1.0 / (2.0 * params_.length_scale * params_.length_scale);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x_train_.rows(); ++i) {
    const double d2 = (x_train_.row(i) - x).squaredNorm();
    acc += alpha_(i) * params_.signal_variance * std::exp(-d2 * inv2l2);
  }
  return acc + target_mean_;
}

GpRegressor GpRegressor::assemble(Eigen::MatrixXd inputs, Eigen::VectorXd alpha,
                                  GpKernelParams params, double target_mean) {
  GpRegressor model;
  model.x_train_ = std::move(inputs);
  model.alpha_ = std::move(alpha);
  model.params_ = params;
  model.target_mean_ = target_mean;
  return model;
}

}  // namespace ladder
