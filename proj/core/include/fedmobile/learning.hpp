#pragma once

#include <cstdint>
#include <vector>

#include "fedmobile/types.hpp"

namespace fedmobile {

/// Synthetic least-squares regression task: labels are feature . w_true plus
/// Gaussian noise, features and w_true i.i.d. standard normal, equal-size
/// per-client datasets, plus a held-out test set drawn from the same process.
struct SyntheticTask {
  int n_clients = 0;
  int d = 0;
  int n_per_client = 0;
  double noise_std = 0.0;

  std::vector<double> w_true;                  // d
  std::vector<std::vector<double>> features;   // per client, row-major n_per_client x d
  std::vector<std::vector<double>> labels;     // per client, n_per_client
  std::vector<double> test_features;           // row-major n_test x d
  std::vector<double> test_labels;             // n_test
  int n_test = 0;
};

/// One stochastic gradient: mean-squared-error gradient of a uniformly drawn
/// (without replacement) mini-batch, fully determined by batch_seed.
struct GradientSample {
  std::vector<double> vector;
  Slot step_index = 0;
  ClientId client = 0;
  std::uint64_t batch_seed = 0;
};

/// feature_scale is the per-coordinate standard deviation of the feature
/// distribution (1.0 = standard normal).
SyntheticTask gen_synthetic(int n_clients, int d, int n_per_client, double noise_std,
                            std::uint64_t seed, int n_test = 500,
                            double feature_scale = 1.0);

/// Batch row indices used by minibatch_grad/minibatch_loss for a given seed.
std::vector<int> select_batch(int n, int batch_size, std::uint64_t batch_seed);

/// grad = (2/b) * sum_batch x (x.w - y); loss convention is mean squared error.
GradientSample minibatch_grad(const ModelVector& model, const SyntheticTask& task,
                              ClientId client, int batch_size, std::uint64_t batch_seed,
                              Slot step_index = 0);

/// MSE of the same batch minibatch_grad(batch_seed) uses; finite-difference
/// probes of this function are the gradient oracle.
double minibatch_loss(const ModelVector& model, const SyntheticTask& task, ClientId client,
                      int batch_size, std::uint64_t batch_seed);

/// model - eta * grad; throws numerical_divergence (with grad.step_index) if
/// the result is not finite. The input model is left unchanged.
ModelVector sgd_step(const ModelVector& model, const GradientSample& grad, double eta);

/// MSE on the held-out test set.
double global_loss(const ModelVector& model, const SyntheticTask& task);

/// Full-batch MSE of one client's local dataset.
double client_full_loss(const ModelVector& model, const SyntheticTask& task, ClientId client);

/// Average of per-client full-batch losses (the distributed objective).
double objective(const ModelVector& model, const SyntheticTask& task);

/// Pooled MSE over the whole training set; equals objective() when per-client
/// dataset sizes are equal.
double train_mse(const ModelVector& model, const SyntheticTask& task);

}  // namespace fedmobile
