#include "fedmobile/learning.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <span>
#include <string>

#include "fedmobile/errors.hpp"
#include "fedmobile/rng.hpp"
#include "fedmobile/vec.hpp"

namespace fedmobile {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

std::span<const double> feature_row(const std::vector<double>& flat, int d, int row) {
  return {flat.data() + static_cast<std::size_t>(row) * static_cast<std::size_t>(d),
          static_cast<std::size_t>(d)};
}

const std::vector<double>& client_features(const SyntheticTask& task, ClientId c) {
  if (c < 1 || c > task.n_clients)
    throw config_error("client id out of range: " + std::to_string(c));
  return task.features[static_cast<std::size_t>(c - 1)];
}

double mse(const ModelVector& model, const std::vector<double>& flat_features,
           const std::vector<double>& labels, int d) {
  double s = 0.0;
  const int n = static_cast<int>(labels.size());
  for (int r = 0; r < n; ++r) {
    const double e = dot(feature_row(flat_features, d, r), model) -
                     labels[static_cast<std::size_t>(r)];
    s += e * e;
  }
  return s / static_cast<double>(n);
}

}  // namespace

SyntheticTask gen_synthetic(int n_clients, int d, int n_per_client, double noise_std,
                            std::uint64_t seed, int n_test, double feature_scale) {
  require(n_clients >= 1 && d >= 1 && n_per_client >= 1 && n_test >= 1,
          "gen_synthetic: all counts must be >= 1");
  require(noise_std >= 0.0, "gen_synthetic: noise_std must be >= 0");
  require(feature_scale > 0.0, "gen_synthetic: feature_scale must be > 0");

  SyntheticTask task;
  task.n_clients = n_clients;
  task.d = d;
  task.n_per_client = n_per_client;
  task.noise_std = noise_std;
  task.n_test = n_test;

  std::normal_distribution<double> stdnorm(0.0, 1.0);

  {
    auto rng = make_rng(seed, Stream::TrueWeights);
    task.w_true.resize(static_cast<std::size_t>(d));
    for (auto& w : task.w_true) w = stdnorm(rng);
  }

  auto fill_samples = [&](std::mt19937_64& rng, std::vector<double>& flat,
                          std::vector<double>& labels, int n) {
    flat.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
    labels.resize(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < d; ++k)
        flat[static_cast<std::size_t>(r) * d + static_cast<std::size_t>(k)] =
            feature_scale * stdnorm(rng);
      double y = dot(feature_row(flat, d, r), task.w_true);
      if (noise_std > 0.0) y += noise_std * stdnorm(rng);
      labels[static_cast<std::size_t>(r)] = y;
    }
  };

  task.features.resize(static_cast<std::size_t>(n_clients));
  task.labels.resize(static_cast<std::size_t>(n_clients));
  for (int i = 1; i <= n_clients; ++i) {
    auto rng = make_rng(seed, Stream::ClientData, static_cast<std::uint64_t>(i));
    fill_samples(rng, task.features[static_cast<std::size_t>(i - 1)],
                 task.labels[static_cast<std::size_t>(i - 1)], n_per_client);
  }
  {
    auto rng = make_rng(seed, Stream::TestSet);
    fill_samples(rng, task.test_features, task.test_labels, n_test);
  }
  return task;
}

std::vector<int> select_batch(int n, int batch_size, std::uint64_t batch_seed) {
  require(batch_size >= 1 && batch_size <= n,
          "select_batch: need 1 <= batch_size <= dataset size");
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(batch_size));
  auto rng = make_rng(batch_seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), batch_size, rng);
  return picked;
}

GradientSample minibatch_grad(const ModelVector& model, const SyntheticTask& task,
                              ClientId client, int batch_size, std::uint64_t batch_seed,
                              Slot step_index) {
  const auto& flat = client_features(task, client);
  const auto& labels = task.labels[static_cast<std::size_t>(client - 1)];
  const auto batch = select_batch(task.n_per_client, batch_size, batch_seed);

  GradientSample g;
  g.vector.assign(static_cast<std::size_t>(task.d), 0.0);
  g.step_index = step_index;
  g.client = client;
  g.batch_seed = batch_seed;

  const double scale = 2.0 / static_cast<double>(batch_size);
  for (int r : batch) {
    auto x = feature_row(flat, task.d, r);
    const double e = dot(x, model) - labels[static_cast<std::size_t>(r)];
    axpy(scale * e, x, g.vector);
  }
  return g;
}

double minibatch_loss(const ModelVector& model, const SyntheticTask& task, ClientId client,
                      int batch_size, std::uint64_t batch_seed) {
  const auto& flat = client_features(task, client);
  const auto& labels = task.labels[static_cast<std::size_t>(client - 1)];
  const auto batch = select_batch(task.n_per_client, batch_size, batch_seed);
  double s = 0.0;
  for (int r : batch) {
    const double e = dot(feature_row(flat, task.d, r), model) -
                     labels[static_cast<std::size_t>(r)];
    s += e * e;
  }
  return s / static_cast<double>(batch_size);
}

ModelVector sgd_step(const ModelVector& model, const GradientSample& grad, double eta) {
  require(eta > 0.0, "sgd_step: eta must be > 0");
  ModelVector next = model;
  axpy(-eta, grad.vector, next);
  if (!all_finite(next)) throw numerical_divergence(grad.step_index);
  return next;
}

double global_loss(const ModelVector& model, const SyntheticTask& task) {
  return mse(model, task.test_features, task.test_labels, task.d);
}

double client_full_loss(const ModelVector& model, const SyntheticTask& task,
                        ClientId client) {
  return mse(model, client_features(task, client),
             task.labels[static_cast<std::size_t>(client - 1)], task.d);
}

double objective(const ModelVector& model, const SyntheticTask& task) {
  double s = 0.0;
  for (int i = 1; i <= task.n_clients; ++i) s += client_full_loss(model, task, i);
  return s / static_cast<double>(task.n_clients);
}

double train_mse(const ModelVector& model, const SyntheticTask& task) {
  double s = 0.0;
  long long n = 0;
  for (int i = 1; i <= task.n_clients; ++i) {
    const auto& labels = task.labels[static_cast<std::size_t>(i - 1)];
    const auto& flat = task.features[static_cast<std::size_t>(i - 1)];
    for (int r = 0; r < static_cast<int>(labels.size()); ++r) {
      const double e = dot(feature_row(flat, task.d, r), model) -
                       labels[static_cast<std::size_t>(r)];
      s += e * e;
      ++n;
    }
  }
  return s / static_cast<double>(n);
}

}  // namespace fedmobile
