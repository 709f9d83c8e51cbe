#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>

#include "edgeless/graph.hpp"
#include "edgeless/matrix.hpp"
#include "edgeless/quadruplet.hpp"

namespace edgeless {

/// Energy-loss hyperparameters: alpha weights the second-order term, beta
/// controls the shortest-path amplification of negatives, gamma and b shape
/// the energy function phi.
struct LossParams {
  double alpha = 3.0;
  double beta = 1.0;
  double gamma = 1.0;
  double b = 0.0;

  void validate() const {
    if (gamma <= 0.0) throw std::invalid_argument("LossParams: gamma must be > 0");
    if (alpha < 0.0 || beta < 0.0 || b < 0.0)
      throw std::invalid_argument("LossParams: alpha, beta, b must be >= 0");
  }
};

namespace detail {

// softplus(u) = log(1 + exp(u)), overflow-safe
inline double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

inline double sigmoid(double u) {
  return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

}  // namespace detail

/// phi(x) = gamma^-1 * log(1 + exp(-gamma*x + b)), always positive.
inline double phi(double x, double gamma, double b) {
  if (gamma <= 0.0) throw std::invalid_argument("phi: gamma must be > 0");
  return detail::softplus(-gamma * x + b) / gamma;
}

/// d phi / d x
inline double phi_derivative(double x, double gamma, double b) {
  return -detail::sigmoid(-gamma * x + b);
}

/// Cosine similarity of two rows; 0 when either row has zero norm.
inline double row_cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    dot += a[t] * b[t];
    na += a[t] * a[t];
    nb += b[t] * b[t];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// (E+_ij, E-_in) for one quadruplet's embedding rows.
inline std::pair<double, double> pair_energies(std::span<const double> z_i,
                                               std::span<const double> z_j,
                                               std::span<const double> z_n,
                                               const LossParams& lp) {
  return {phi(row_cosine(z_i, z_j), lp.gamma, lp.b),
          phi(-row_cosine(z_i, z_n), lp.gamma, lp.b)};
}

/// Shortest-path weight exp(beta / dsp); the unreachable case takes the
/// dsp -> infinity limit of 1.
inline double d_in(std::uint32_t dsp, double beta) {
  if (dsp == 0) throw std::invalid_argument("d_in: negative pair cannot be the same node");
  if (dsp == kUnreachable) return 1.0;
  return std::exp(beta / static_cast<double>(dsp));
}

namespace detail {

/// Accumulates weight * d(cos(z_a, z_b))/d(z_a) into grad row ga (and the
/// symmetric term into gb). Zero-norm rows get a zero (sub)gradient.
inline void add_cosine_grad(const double* za, const double* zb, std::size_t d, double weight,
                            double* ga, double* gb) {
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (std::size_t t = 0; t < d; ++t) {
    dot += za[t] * zb[t];
    na2 += za[t] * za[t];
    nb2 += zb[t] * zb[t];
  }
  if (na2 == 0.0 || nb2 == 0.0) return;
  const double na = std::sqrt(na2), nb = std::sqrt(nb2);
  const double c = dot / (na * nb);
  for (std::size_t t = 0; t < d; ++t) {
    ga[t] += weight * (zb[t] / (na * nb) - c * za[t] / na2);
    gb[t] += weight * (za[t] / (na * nb) - c * zb[t] / nb2);
  }
}

}  // namespace detail

/// Mini-batch quadruplet loss and its exact gradient with respect to Z.
/// loss = mean(E+_ij + D_in * E-_in) + alpha * mean(J_it * E+_it); both means
/// divide by the full batch size, quadruplets without a two-hop node
/// contribute zero to the second term.
inline std::pair<double, Matrix> loss_and_embedding_grad(const Matrix& z,
                                                         const QuadrupletBatch& batch,
                                                         const LossParams& lp) {
  lp.validate();
  if (batch.empty()) throw std::invalid_argument("loss_and_embedding_grad: empty batch");
  const std::size_t d = z.cols();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  Matrix grad(z.rows(), d);

  for (const auto& q : batch) {
    const double* zi = z.row(q.anchor);
    const double* zj = z.row(q.positive);
    const double* zn = z.row(q.negative);

    const double c_ij = row_cosine({zi, d}, {zj, d});
    const double c_in = row_cosine({zi, d}, {zn, d});
    const double din = d_in(q.dsp_in, lp.beta);

    loss += inv_b * (phi(c_ij, lp.gamma, lp.b) + din * phi(-c_in, lp.gamma, lp.b));
    detail::add_cosine_grad(zi, zj, d, inv_b * phi_derivative(c_ij, lp.gamma, lp.b),
                            grad.row(q.anchor), grad.row(q.positive));
    detail::add_cosine_grad(zi, zn, d, -inv_b * din * phi_derivative(-c_in, lp.gamma, lp.b),
                            grad.row(q.anchor), grad.row(q.negative));

    if (lp.alpha > 0.0 && q.has_two_hop()) {
      const double* zt = z.row(q.two_hop);
      const double c_it = row_cosine({zi, d}, {zt, d});
      loss += inv_b * lp.alpha * q.j_it * phi(c_it, lp.gamma, lp.b);
      detail::add_cosine_grad(zi, zt, d,
                              inv_b * lp.alpha * q.j_it * phi_derivative(c_it, lp.gamma, lp.b),
                              grad.row(q.anchor), grad.row(q.two_hop));
    }
  }
  return {loss, std::move(grad)};
}

}  // namespace edgeless
