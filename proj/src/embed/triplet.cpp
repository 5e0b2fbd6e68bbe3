#include "irforge/embed/triplet.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "irforge/rng.hpp"

namespace irforge::embed {

TripletModel TripletModel::init(std::size_t dim, std::size_t out, double margin, std::uint64_t seed) {
  TripletModel m;
  m.dim = dim;
  m.out = out;
  m.margin = margin;
  m.weight.resize(dim * out);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (auto& w : m.weight) w = rng.normal() * scale;
  return m;
}

std::vector<double> TripletModel::project_raw(const SparseVec& x) const {
  if (x.dim != dim) throw std::invalid_argument(fmt::format("feature dimension {} does not match model input {}", x.dim, dim));
  std::vector<double> z(out, 0.0);
  for (std::size_t k = 0; k < x.index.size(); ++k) {
    const double* row = &weight[static_cast<std::size_t>(x.index[k]) * out];
    const double v = x.value[k];
    for (std::size_t j = 0; j < out; ++j) z[j] += v * row[j];
  }
  return z;
}

std::vector<double> TripletModel::embed(const SparseVec& x) const {
  auto z = project_raw(x);
  double n = 0;
  for (double v : z) n += v * v;
  n = std::sqrt(n);
  if (n > 0)
    for (auto& v : z) v /= n;
  return z;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double triplet_loss(const std::vector<double>& anchor, const std::vector<double>& positive,
                    const std::vector<double>& negative, double margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size())
    throw std::invalid_argument("triplet_loss: dimension mismatch");
  const double v = margin + squared_distance(anchor, positive) - squared_distance(anchor, negative);
  return std::isnan(v) ? v : std::max(0.0, v);
}

namespace {

struct Projected {
  std::vector<double> u;  // normalized
  double norm = 0;
};

Projected project(const TripletModel& m, const SparseVec& x) {
  Projected p;
  p.u = m.project_raw(x);
  double n = 0;
  for (double v : p.u) n += v * v;
  p.norm = std::sqrt(n);
  if (p.norm > 0)
    for (auto& v : p.u) v /= p.norm;
  return p;
}

// Accumulates x * g_z^T into grad, where g_z = (I - u u^T) g_u / |z|.
void backprop(const TripletModel& m, const SparseVec& x, const Projected& p, const std::vector<double>& g_u,
              double scale, std::vector<double>& grad) {
  if (p.norm == 0) return;
  double dot = 0;
  for (std::size_t j = 0; j < m.out; ++j) dot += p.u[j] * g_u[j];
  std::vector<double> g_z(m.out);
  for (std::size_t j = 0; j < m.out; ++j) g_z[j] = (g_u[j] - p.u[j] * dot) / p.norm * scale;
  for (std::size_t k = 0; k < x.index.size(); ++k) {
    double* row = &grad[static_cast<std::size_t>(x.index[k]) * m.out];
    const double v = x.value[k];
    for (std::size_t j = 0; j < m.out; ++j) row[j] += v * g_z[j];
  }
}

}  // namespace

LossAndGradient loss_gradient(const TripletModel& model, const std::vector<SparseVec>& table,
                              const std::vector<Triplet>& batch) {
  LossAndGradient r;
  r.gradient.assign(model.weight.size(), 0.0);
  if (batch.empty()) return r;
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<double> g(model.out);
  for (const auto& t : batch) {
    const auto& xa = table.at(t.anchor);
    const auto& xp = table.at(t.positive);
    const auto& xn = table.at(t.negative);
    auto a = project(model, xa), p = project(model, xp), n = project(model, xn);
    double loss = triplet_loss(a.u, p.u, n.u, model.margin);
    r.loss += loss * scale;
    if (loss <= 0) continue;
    ++r.active;
    for (std::size_t j = 0; j < model.out; ++j) g[j] = 2.0 * (n.u[j] - p.u[j]);
    backprop(model, xa, a, g, scale, r.gradient);
    for (std::size_t j = 0; j < model.out; ++j) g[j] = -2.0 * (a.u[j] - p.u[j]);
    backprop(model, xp, p, g, scale, r.gradient);
    for (std::size_t j = 0; j < model.out; ++j) g[j] = 2.0 * (a.u[j] - n.u[j]);
    backprop(model, xn, n, g, scale, r.gradient);
  }
  return r;
}

double mean_loss(const TripletModel& model, const std::vector<SparseVec>& table, const std::vector<Triplet>& batch) {
  if (batch.empty()) return 0;
  double s = 0;
  for (const auto& t : batch)
    s += triplet_loss(model.embed(table.at(t.anchor)), model.embed(table.at(t.positive)),
                      model.embed(table.at(t.negative)), model.margin);
  return s / static_cast<double>(batch.size());
}

std::vector<double> train(TripletModel& model, const std::vector<SparseVec>& table, const std::vector<Triplet>& batch,
                          const TrainConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("train: no triplets");
  std::vector<double> history;
  history.reserve(cfg.steps + 1);
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    auto lg = loss_gradient(model, table, batch);
    if (!std::isfinite(lg.loss)) throw std::runtime_error(fmt::format("training diverged at step {} (loss {})", s, lg.loss));
    history.push_back(lg.loss);
    if (lg.active == 0) break;
    for (std::size_t i = 0; i < model.weight.size(); ++i) model.weight[i] -= cfg.lr * lg.gradient[i];
  }
  double final_loss = mean_loss(model, table, batch);
  if (!std::isfinite(final_loss)) throw std::runtime_error("training diverged (non-finite final loss)");
  history.push_back(final_loss);
  return history;
}

}  // namespace irforge::embed
