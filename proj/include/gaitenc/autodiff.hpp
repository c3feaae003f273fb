#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaitenc/tensor.hpp"

namespace gaitenc {

// Handle into a Tape. Only valid for the tape that produced it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. The graph is append-only, so reverse creation order is
// a topological order for backpropagation. A tape is built per sample and
// discarded; parameters enter as leaves and their gradients are read back
// after backward(). Nodes live in a deque, so references returned by value()
// and grad() stay valid while the tape grows.
class Tape {
public:
  Var leaf(Tensor value) { return push(std::move(value), {}); }

  Var scalar(double v) { return leaf(Tensor::scalar(v)); }

  Var zeros(std::vector<int> shape) { return leaf(Tensor::zeros(std::move(shape))); }

  // Leaf copy of an existing node's value; no gradient flows back through it.
  Var detach(Var x) { return leaf(value(x)); }

  const Tensor& value(Var x) const { return nodes_[check(x)].value; }
  const Tensor& grad(Var x) const { return nodes_[check(x)].grad; }

  int node_count() const { return static_cast<int>(nodes_.size()); }

  // ---- elementwise ----

  Var add(Var a, Var b) {
    const Tensor &va = value(a), &vb = value(b);
    require_same_shape(va, vb, "add");
    Tensor out = va;
    for (int i = 0; i < out.size(); ++i) out[i] += vb[i];
    return push(std::move(out), [a, b](Tape& t, const Node& n) {
      t.axpy(a, 1.0, n.grad);
      t.axpy(b, 1.0, n.grad);
    });
  }

  Var sub(Var a, Var b) {
    const Tensor &va = value(a), &vb = value(b);
    require_same_shape(va, vb, "sub");
    Tensor out = va;
    for (int i = 0; i < out.size(); ++i) out[i] -= vb[i];
    return push(std::move(out), [a, b](Tape& t, const Node& n) {
      t.axpy(a, 1.0, n.grad);
      t.axpy(b, -1.0, n.grad);
    });
  }

  Var mul(Var a, Var b) {
    const Tensor &va = value(a), &vb = value(b);
    require_same_shape(va, vb, "mul");
    Tensor out = va;
    for (int i = 0; i < out.size(); ++i) out[i] *= vb[i];
    return push(std::move(out), [a, b](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      Tensor& gb = t.nodes_[b.id].grad;
      const Tensor &va = t.value(a), &vb = t.value(b);
      for (int i = 0; i < n.grad.size(); ++i) {
        ga[i] += n.grad[i] * vb[i];
        gb[i] += n.grad[i] * va[i];
      }
    });
  }

  Var div(Var a, Var b) {
    const Tensor &va = value(a), &vb = value(b);
    require_same_shape(va, vb, "div");
    Tensor out = va;
    for (int i = 0; i < out.size(); ++i) out[i] /= vb[i];
    return push(std::move(out), [a, b](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      Tensor& gb = t.nodes_[b.id].grad;
      const Tensor &va = t.value(a), &vb = t.value(b);
      for (int i = 0; i < n.grad.size(); ++i) {
        ga[i] += n.grad[i] / vb[i];
        gb[i] -= n.grad[i] * va[i] / (vb[i] * vb[i]);
      }
    });
  }

  Var scale(Var a, double c) {
    Tensor out = value(a);
    for (int i = 0; i < out.size(); ++i) out[i] *= c;
    return push(std::move(out), [a, c](Tape& t, const Node& n) { t.axpy(a, c, n.grad); });
  }

  Var tanh(Var a) {
    Tensor out = value(a);
    for (int i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return push(std::move(out), [a](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * (1.0 - n.value[i] * n.value[i]);
    });
  }

  Var sigmoid(Var a) {
    Tensor out = value(a);
    for (int i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    return push(std::move(out), [a](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * n.value[i] * (1.0 - n.value[i]);
    });
  }

  Var relu(Var a) {
    Tensor out = value(a);
    for (int i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    return push(std::move(out), [a](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      const Tensor& va = t.value(a);
      for (int i = 0; i < n.grad.size(); ++i) ga[i] += va[i] > 0.0 ? n.grad[i] : 0.0;
    });
  }

  Var exp(Var a) {
    Tensor out = value(a);
    for (int i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    return push(std::move(out), [a](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * n.value[i];
    });
  }

  Var log(Var a) {
    Tensor out = value(a);
    for (int i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
    return push(std::move(out), [a](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      const Tensor& va = t.value(a);
      for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] / va[i];
    });
  }

  Var sqrt(Var a) {
    Tensor out = value(a);
    for (int i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
    return push(std::move(out), [a](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * 0.5 / n.value[i];
    });
  }

  // ---- reductions / contractions ----

  Var sum(Var a) {
    double s = 0.0;
    for (double v : value(a).data()) s += v;
    return push(Tensor::scalar(s), [a](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      for (int i = 0; i < ga.size(); ++i) ga[i] += n.grad[0];
    });
  }

  Var sum_sq(Var a) {
    double s = 0.0;
    for (double v : value(a).data()) s += v * v;
    return push(Tensor::scalar(s), [a](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      const Tensor& va = t.value(a);
      for (int i = 0; i < ga.size(); ++i) ga[i] += 2.0 * va[i] * n.grad[0];
    });
  }

  Var dot(Var a, Var b) {
    const Tensor &va = value(a), &vb = value(b);
    require_same_shape(va, vb, "dot");
    double s = 0.0;
    for (int i = 0; i < va.size(); ++i) s += va[i] * vb[i];
    return push(Tensor::scalar(s), [a, b](Tape& t, const Node& n) {
      Tensor& ga = t.nodes_[a.id].grad;
      Tensor& gb = t.nodes_[b.id].grad;
      const Tensor &va = t.value(a), &vb = t.value(b);
      for (int i = 0; i < va.size(); ++i) {
        ga[i] += n.grad[0] * vb[i];
        gb[i] += n.grad[0] * va[i];
      }
    });
  }

  // W (m x n) times x (n) -> (m)
  Var matvec(Var w, Var x) {
    const Tensor &vw = value(w), &vx = value(x);
    if (vw.shape().size() != 2 || vw.cols() != vx.size()) {
      throw std::invalid_argument("matvec: shape mismatch " + vw.shape_str() + " * " + vx.shape_str());
    }
    const int m = vw.rows(), n = vw.cols();
    Tensor out({m});
    for (int r = 0; r < m; ++r) {
      double s = 0.0;
      const double* row = vw.data().data() + static_cast<std::size_t>(r) * n;
      for (int c = 0; c < n; ++c) s += row[c] * vx[c];
      out[r] = s;
    }
    return push(std::move(out), [w, x, m, n](Tape& t, const Node& nd) {
      Tensor& gw = t.nodes_[w.id].grad;
      Tensor& gx = t.nodes_[x.id].grad;
      const Tensor &vw = t.value(w), &vx = t.value(x);
      for (int r = 0; r < m; ++r) {
        const double g = nd.grad[r];
        if (g == 0.0) continue;
        double* gwrow = gw.data().data() + static_cast<std::size_t>(r) * n;
        const double* wrow = vw.data().data() + static_cast<std::size_t>(r) * n;
        for (int c = 0; c < n; ++c) {
          gwrow[c] += g * vx[c];
          gx[c] += g * wrow[c];
        }
      }
    });
  }

  // scalar s times vector v
  Var scale_by(Var s, Var v) {
    const Tensor &vs = value(s), &vv = value(v);
    if (vs.size() != 1) throw std::invalid_argument("scale_by: scale must be scalar");
    Tensor out = vv;
    for (int i = 0; i < out.size(); ++i) out[i] *= vs[0];
    return push(std::move(out), [s, v](Tape& t, const Node& n) {
      Tensor& gs = t.nodes_[s.id].grad;
      Tensor& gv = t.nodes_[v.id].grad;
      const Tensor &vs = t.value(s), &vv = t.value(v);
      for (int i = 0; i < n.grad.size(); ++i) {
        gs[0] += n.grad[i] * vv[i];
        gv[i] += n.grad[i] * vs[0];
      }
    });
  }

  // element i of a vector as a scalar node
  Var index(Var a, int i) {
    const Tensor& va = value(a);
    if (i < 0 || i >= va.size()) throw std::invalid_argument("index: out of range");
    return push(Tensor::scalar(va[i]), [a, i](Tape& t, const Node& n) {
      t.nodes_[a.id].grad[i] += n.grad[0];
    });
  }

  // sum_j weights[j] * vectors[j]; weights is a vector of length size(vectors)
  Var weighted_sum(Var weights, const std::vector<Var>& vectors) {
    const Tensor& vw = value(weights);
    if (vw.size() != static_cast<int>(vectors.size())) {
      throw std::invalid_argument("weighted_sum: weight/vector count mismatch");
    }
    const int dim = value(vectors[0]).size();
    Tensor out({dim});
    for (int j = 0; j < vw.size(); ++j) {
      const Tensor& vj = value(vectors[j]);
      if (vj.size() != dim) throw std::invalid_argument("weighted_sum: ragged vectors");
      for (int i = 0; i < dim; ++i) out[i] += vw[j] * vj[i];
    }
    return push(std::move(out), [weights, vectors](Tape& t, const Node& n) {
      Tensor& gw = t.nodes_[weights.id].grad;
      const Tensor& vw = t.value(weights);
      for (std::size_t j = 0; j < vectors.size(); ++j) {
        Tensor& gv = t.nodes_[vectors[j].id].grad;
        const Tensor& vj = t.value(vectors[j]);
        double acc = 0.0;
        for (int i = 0; i < n.grad.size(); ++i) {
          acc += n.grad[i] * vj[i];
          gv[i] += vw[static_cast<int>(j)] * n.grad[i];
        }
        gw[static_cast<int>(j)] += acc;
      }
    });
  }

  Var concat(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: empty input");
    int total = 0;
    for (Var p : parts) total += value(p).size();
    Tensor out({total});
    int off = 0;
    for (Var p : parts) {
      const Tensor& vp = value(p);
      std::copy(vp.data().begin(), vp.data().end(), out.data().begin() + off);
      off += vp.size();
    }
    return push(std::move(out), [parts](Tape& t, const Node& n) {
      int off = 0;
      for (Var p : parts) {
        Tensor& gp = t.nodes_[p.id].grad;
        for (int i = 0; i < gp.size(); ++i) gp[i] += n.grad[off + i];
        off += gp.size();
      }
    });
  }

  // Numerically stable softmax over a vector (max subtraction).
  Var softmax(Var a) {
    const Tensor& va = value(a);
    if (va.size() == 0) throw std::invalid_argument("softmax: empty vector");
    double mx = va[0];
    for (int i = 1; i < va.size(); ++i) mx = std::max(mx, va[i]);
    Tensor out = va;
    double z = 0.0;
    for (int i = 0; i < out.size(); ++i) {
      out[i] = std::exp(out[i] - mx);
      z += out[i];
    }
    for (int i = 0; i < out.size(); ++i) out[i] /= z;
    return push(std::move(out), [a](Tape& t, const Node& n) {
      // dx = y * (dy - <y, dy>)
      Tensor& ga = t.nodes_[a.id].grad;
      double inner = 0.0;
      for (int i = 0; i < n.value.size(); ++i) inner += n.value[i] * n.grad[i];
      for (int i = 0; i < n.value.size(); ++i) ga[i] += n.value[i] * (n.grad[i] - inner);
    });
  }

  // ---- composites ----

  Var mse_sum(Var a, Var b) { return sum_sq(sub(a, b)); }

  // log(sum(exp(a))) with a detached max shift; gradient stays exact
  Var logsumexp(Var a) {
    const Tensor& va = value(a);
    if (va.size() == 0) throw std::invalid_argument("logsumexp: empty vector");
    double mx = va[0];
    for (int i = 1; i < va.size(); ++i) mx = std::max(mx, va[i]);
    Var shift = leaf(Tensor(va.shape(), std::vector<double>(va.size(), mx)));
    return add(scalar(mx), log(sum(exp(sub(a, shift)))));
  }

  Var l2_norm(Var a) { return sqrt(sum_sq(a)); }

  // cosine similarity of two nonzero vectors; errors on zero input
  Var cosine(Var a, Var b) {
    if (squared_l2(value(a)) == 0.0 || squared_l2(value(b)) == 0.0) {
      throw std::invalid_argument("cosine: zero vector");
    }
    return div(dot(a, b), mul(l2_norm(a), l2_norm(b)));
  }

  // ---- backprop ----

  void backward(Var loss) {
    const Tensor& v = value(loss);
    if (v.size() != 1) {
      throw std::invalid_argument("backward: loss must be scalar, got " + v.shape_str());
    }
    nodes_[loss.id].grad[0] = 1.0;
    for (int i = loss.id; i >= 0; --i) {
      if (nodes_[i].back) nodes_[i].back(*this, nodes_[i]);
    }
  }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&, const Node&)> back;
  };

  Var push(Tensor value, std::function<void(Tape&, const Node&)> back) {
    if (!value.all_finite()) {
      throw std::runtime_error("non-finite value produced on tape (node " +
                               std::to_string(nodes_.size()) + ")");
    }
    Node n;
    n.grad = Tensor::zeros(value.shape());
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  int check(Var x) const {
    if (x.id < 0 || x.id >= static_cast<int>(nodes_.size())) {
      throw std::out_of_range("Var does not belong to this tape");
    }
    return x.id;
  }

  static void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
      throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                  " vs " + b.shape_str());
    }
  }

  void axpy(Var dst, double c, const Tensor& g) {
    Tensor& gd = nodes_[dst.id].grad;
    for (int i = 0; i < gd.size(); ++i) gd[i] += c * g[i];
  }

  std::deque<Node> nodes_;
};

}  // namespace gaitenc
