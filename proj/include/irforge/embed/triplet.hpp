#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "irforge/embed/features.hpp"

namespace irforge::embed {

struct TripletModel {
  std::size_t dim = 2048;      // input d
  std::size_t out = 128;       // projection e
  double margin = 0.5;
  std::vector<double> weight;  // d x e, row-major

  /// Gaussian init scaled by 1/sqrt(d), deterministic in `seed`.
  static TripletModel init(std::size_t dim, std::size_t out, double margin, std::uint64_t seed);

  std::vector<double> project_raw(const SparseVec& x) const;
  /// L2-normalized projection.
  std::vector<double> embed(const SparseVec& x) const;
};

double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

/// max(0, m + d(a,p) - d(a,n)) on already-embedded vectors.
double triplet_loss(const std::vector<double>& anchor, const std::vector<double>& positive,
                    const std::vector<double>& negative, double margin);

// Indices into a feature table.
struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
};

struct LossAndGradient {
  double loss = 0;                // mean over the batch
  std::vector<double> gradient;   // same shape as weight
  std::size_t active = 0;
};

LossAndGradient loss_gradient(const TripletModel& model, const std::vector<SparseVec>& table,
                              const std::vector<Triplet>& batch);
double mean_loss(const TripletModel& model, const std::vector<SparseVec>& table, const std::vector<Triplet>& batch);

struct TrainConfig {
  std::size_t steps = 200;
  double lr = 0.5;
};

/// Full-batch gradient descent. Returns the loss before each step and after
/// the last one. Throws std::runtime_error if the loss becomes non-finite.
std::vector<double> train(TripletModel& model, const std::vector<SparseVec>& table, const std::vector<Triplet>& batch,
                          const TrainConfig& cfg);

}  // namespace irforge::embed
