#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"
#include "edgeless/matrix.hpp"
#include "edgeless/rng.hpp"

namespace edgeless {

enum class GnnVariant : std::uint8_t { GCN = 0, SAGE_MEAN = 1, GIN = 2 };
enum class Activation : std::uint8_t { Identity = 0, Relu = 1 };

inline std::string variant_name(GnnVariant v) {
  switch (v) {
    case GnnVariant::GCN: return "gcn";
    case GnnVariant::SAGE_MEAN: return "sage";
    case GnnVariant::GIN: return "gin";
  }
  return "?";
}

inline GnnVariant variant_from_name(const std::string& s) {
  if (s == "gcn") return GnnVariant::GCN;
  if (s == "sage") return GnnVariant::SAGE_MEAN;
  if (s == "gin") return GnnVariant::GIN;
  throw std::invalid_argument("unknown variant: " + s);
}

/// Message-passing encoder parameters. Per-layer matrix layout:
///   GCN:       { W (in x out) }
///   SAGE_MEAN: { W (2*in x out) }   — update acts on concat(h, m)
///   GIN:       { W1 (in x h), b1 (1 x h), W2 (h x out), b2 (1 x out) }
struct ModelParams {
  GnnVariant variant = GnnVariant::SAGE_MEAN;
  std::size_t input_dim = 0;
  std::size_t embedding_dim = 0;
  std::size_t hidden_dim = 0;  // GIN MLP width
  std::vector<Activation> activations;  // one per layer
  std::vector<std::vector<Matrix>> layers;

  std::size_t num_layers() const { return layers.size(); }

  std::size_t layer_in_dim(std::size_t p) const { return p == 0 ? input_dim : embedding_dim; }
  std::size_t layer_out_dim(std::size_t) const { return embedding_dim; }

  template <typename F>
  void for_each(F&& f) {
    for (auto& layer : layers)
      for (auto& m : layer) f(m);
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& layer : layers)
      for (const auto& m : layer) f(m);
  }
};

/// Gradient container with the same nesting as ModelParams::layers.
using ParamGrads = std::vector<std::vector<Matrix>>;

inline ParamGrads zero_grads_like(const ModelParams& p) {
  ParamGrads g(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l)
    for (const auto& m : p.layers[l]) g[l].emplace_back(m.rows(), m.cols());
  return g;
}

namespace detail {

inline Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Matrix w(fan_in, fan_out);
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  return w;
}

}  // namespace detail

/// Glorot-uniform initialization, deterministic under seed. Hidden layers get
/// relu, the final layer identity; biases start at zero.
inline ModelParams init_params(GnnVariant variant, std::size_t f, std::size_t d,
                               std::uint64_t seed, std::size_t num_layers = 1,
                               std::size_t gin_hidden = 0) {
  if (f < 1 || d < 1) throw std::invalid_argument("init_params: dims must be >= 1");
  if (num_layers < 1) throw std::invalid_argument("init_params: num_layers must be >= 1");
  ModelParams p;
  p.variant = variant;
  p.input_dim = f;
  p.embedding_dim = d;
  p.hidden_dim = gin_hidden == 0 ? d : gin_hidden;
  Rng rng(seed);
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = p.layer_in_dim(l);
    const std::size_t out = p.layer_out_dim(l);
    std::vector<Matrix> layer;
    switch (variant) {
      case GnnVariant::GCN:
        layer.push_back(detail::glorot(in, out, rng));
        break;
      case GnnVariant::SAGE_MEAN:
        layer.push_back(detail::glorot(2 * in, out, rng));
        break;
      case GnnVariant::GIN:
        layer.push_back(detail::glorot(in, p.hidden_dim, rng));
        layer.emplace_back(1, p.hidden_dim);
        layer.push_back(detail::glorot(p.hidden_dim, out, rng));
        layer.emplace_back(1, out);
        break;
    }
    p.layers.push_back(std::move(layer));
    p.activations.push_back(l + 1 < num_layers ? Activation::Relu : Activation::Identity);
  }
  return p;
}

namespace detail {

/// Neighborhood aggregation including the self node. The GCN and GIN
/// operators are symmetric as matrices; the SAGE row-mean is not.
inline Matrix aggregate(GnnVariant v, const Graph& g, const Matrix& h) {
  Matrix m(h.rows(), h.cols());
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    double* mi = m.row(i);
    const double di = static_cast<double>(g.degree(i)) + 1.0;
    switch (v) {
      case GnnVariant::GCN: {
        const double* hi = h.row(i);
        double c = 1.0 / di;  // self term: 1/sqrt(di)/sqrt(di)
        for (std::size_t t = 0; t < h.cols(); ++t) mi[t] += c * hi[t];
        for (NodeId j : g.neighbors(i)) {
          const double cj = 1.0 / (std::sqrt(di) * std::sqrt(static_cast<double>(g.degree(j)) + 1.0));
          const double* hj = h.row(j);
          for (std::size_t t = 0; t < h.cols(); ++t) mi[t] += cj * hj[t];
        }
        break;
      }
      case GnnVariant::SAGE_MEAN: {
        const double* hi = h.row(i);
        for (std::size_t t = 0; t < h.cols(); ++t) mi[t] = hi[t];
        for (NodeId j : g.neighbors(i)) {
          const double* hj = h.row(j);
          for (std::size_t t = 0; t < h.cols(); ++t) mi[t] += hj[t];
        }
        for (std::size_t t = 0; t < h.cols(); ++t) mi[t] /= di;
        break;
      }
      case GnnVariant::GIN: {
        const double* hi = h.row(i);
        for (std::size_t t = 0; t < h.cols(); ++t) mi[t] = hi[t];
        for (NodeId j : g.neighbors(i)) {
          const double* hj = h.row(j);
          for (std::size_t t = 0; t < h.cols(); ++t) mi[t] += hj[t];
        }
        break;
      }
    }
  }
  return m;
}

/// Transpose of the aggregation operator, for backprop.
inline Matrix aggregate_transpose(GnnVariant v, const Graph& g, const Matrix& dm) {
  if (v != GnnVariant::SAGE_MEAN) return aggregate(v, g, dm);
  Matrix dh(dm.rows(), dm.cols());
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const double inv = 1.0 / (static_cast<double>(g.degree(i)) + 1.0);
    const double* dmi = dm.row(i);
    double* dhi = dh.row(i);
    for (std::size_t t = 0; t < dm.cols(); ++t) dhi[t] += inv * dmi[t];
    for (NodeId j : g.neighbors(i)) {
      double* dhj = dh.row(j);
      for (std::size_t t = 0; t < dm.cols(); ++t) dhj[t] += inv * dmi[t];
    }
  }
  return dh;
}

inline void apply_activation(Activation a, Matrix& m) {
  if (a == Activation::Relu)
    for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
}

/// d(act)/d(pre-activation) folded into the upstream gradient in place.
inline void activation_backward(Activation a, const Matrix& pre, Matrix& grad) {
  if (a == Activation::Relu) {
    for (std::size_t t = 0; t < grad.size(); ++t)
      if (pre.data()[t] <= 0.0) grad.data()[t] = 0.0;
  }
}

inline Matrix concat_cols(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    double* ci = c.row(i);
    for (std::size_t t = 0; t < a.cols(); ++t) ci[t] = ai[t];
    for (std::size_t t = 0; t < b.cols(); ++t) ci[a.cols() + t] = bi[t];
  }
  return c;
}

struct LayerCache {
  Matrix m;        // aggregated messages
  Matrix pre;      // pre-activation of the layer output
  Matrix gin_pre;  // GIN inner pre-activation
  Matrix gin_act;  // GIN inner post-relu
};

struct ForwardCache {
  std::vector<Matrix> h;  // h[0] = X dense, h[p] = layer p output
  std::vector<LayerCache> layer;
};

inline ForwardCache forward_cached(const ModelParams& p, const Graph& g, const AttributeMatrix& x) {
  if (x.num_features() != p.input_dim) throw std::invalid_argument("forward: feature dim mismatch");
  if (g.num_nodes() != x.num_nodes()) throw std::invalid_argument("forward: graph/attribute size mismatch");
  ForwardCache c;
  c.h.push_back(x.to_dense());
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    LayerCache lc;
    lc.m = aggregate(p.variant, g, c.h.back());
    switch (p.variant) {
      case GnnVariant::GCN:
        lc.pre = matmul(lc.m, p.layers[l][0]);
        break;
      case GnnVariant::SAGE_MEAN:
        lc.pre = matmul(concat_cols(c.h.back(), lc.m), p.layers[l][0]);
        break;
      case GnnVariant::GIN: {
        const auto& w1 = p.layers[l][0];
        const auto& b1 = p.layers[l][1];
        const auto& w2 = p.layers[l][2];
        const auto& b2 = p.layers[l][3];
        lc.gin_pre = matmul(lc.m, w1);
        for (std::size_t i = 0; i < lc.gin_pre.rows(); ++i)
          for (std::size_t t = 0; t < lc.gin_pre.cols(); ++t) lc.gin_pre(i, t) += b1(0, t);
        lc.gin_act = lc.gin_pre;
        apply_activation(Activation::Relu, lc.gin_act);
        lc.pre = matmul(lc.gin_act, w2);
        for (std::size_t i = 0; i < lc.pre.rows(); ++i)
          for (std::size_t t = 0; t < lc.pre.cols(); ++t) lc.pre(i, t) += b2(0, t);
        break;
      }
    }
    Matrix out = lc.pre;
    apply_activation(p.activations[l], out);
    c.layer.push_back(std::move(lc));
    c.h.push_back(std::move(out));
  }
  return c;
}

inline Matrix col_sums(const Matrix& m) {
  Matrix s(1, m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t t = 0; t < m.cols(); ++t) s(0, t) += m(i, t);
  return s;
}

}  // namespace detail

/// Embedding matrix Z: one forward pass over the computation graph.
inline Matrix forward(const ModelParams& p, const Graph& g, const AttributeMatrix& x) {
  auto cache = detail::forward_cached(p, g, x);
  return std::move(cache.h.back());
}

/// Exact reverse-mode gradient of sum_i <grad_wrt_z[i], z_i> with respect to
/// every parameter matrix.
inline ParamGrads backward(const ModelParams& p, const Graph& g, const AttributeMatrix& x,
                           const Matrix& grad_wrt_z) {
  auto cache = detail::forward_cached(p, g, x);
  if (!grad_wrt_z.same_shape(cache.h.back()))
    throw std::invalid_argument("backward: gradient shape mismatch");

  ParamGrads grads = zero_grads_like(p);
  Matrix dh = grad_wrt_z;
  for (std::size_t l = p.num_layers(); l-- > 0;) {
    const auto& lc = cache.layer[l];
    const Matrix& h_in = cache.h[l];
    Matrix dpre = std::move(dh);
    detail::activation_backward(p.activations[l], lc.pre, dpre);

    Matrix dm;
    switch (p.variant) {
      case GnnVariant::GCN: {
        grads[l][0] = matmul_at(lc.m, dpre);
        dm = matmul_bt(dpre, p.layers[l][0]);
        dh = detail::aggregate_transpose(p.variant, g, dm);
        break;
      }
      case GnnVariant::SAGE_MEAN: {
        Matrix c = detail::concat_cols(h_in, lc.m);
        grads[l][0] = matmul_at(c, dpre);
        Matrix dc = matmul_bt(dpre, p.layers[l][0]);
        const std::size_t in = h_in.cols();
        Matrix dh_direct(h_in.rows(), in);
        dm = Matrix(h_in.rows(), in);
        for (std::size_t i = 0; i < dc.rows(); ++i)
          for (std::size_t t = 0; t < in; ++t) {
            dh_direct(i, t) = dc(i, t);
            dm(i, t) = dc(i, in + t);
          }
        dh = detail::aggregate_transpose(p.variant, g, dm);
        for (std::size_t t = 0; t < dh.size(); ++t) dh.data()[t] += dh_direct.data()[t];
        break;
      }
      case GnnVariant::GIN: {
        grads[l][2] = matmul_at(lc.gin_act, dpre);
        grads[l][3] = detail::col_sums(dpre);
        Matrix da1 = matmul_bt(dpre, p.layers[l][2]);
        detail::activation_backward(Activation::Relu, lc.gin_pre, da1);
        grads[l][0] = matmul_at(lc.m, da1);
        grads[l][1] = detail::col_sums(da1);
        dm = matmul_bt(da1, p.layers[l][0]);
        dh = detail::aggregate_transpose(p.variant, g, dm);
        break;
      }
    }
  }
  return grads;
}

}  // namespace edgeless
