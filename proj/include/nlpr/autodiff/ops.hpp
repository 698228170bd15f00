#ifndef NLPR_AUTODIFF_OPS_HPP
#define NLPR_AUTODIFF_OPS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"

namespace nlpr::ad {

namespace detail {

template <typename Scalar>
void require_same_shape(const char* op, const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

template <typename Scalar>
Scalar stable_sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
void accumulate(Node<Scalar>& parent, const Matrix<Scalar>& g) {
  if (!parent.requires_grad) return;
  parent.ensure_grad();
  parent.grad += g;
}

}  // namespace detail

template <typename Scalar>
BasicTensor<Scalar> matmul(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + a.shape_string() + " * " +
                     b.shape_string());
  }
  return make_result<Scalar>(a.value() * b.value(), {a, b}, [](Node<Scalar>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) detail::accumulate(pa, Matrix<Scalar>(self.grad * pb.value.transpose()));
    if (pb.requires_grad) detail::accumulate(pb, Matrix<Scalar>(pa.value.transpose() * self.grad));
  });
}

template <typename Scalar>
BasicTensor<Scalar> transpose(const BasicTensor<Scalar>& a) {
  return make_result<Scalar>(a.value().transpose(), {a}, [](Node<Scalar>& self) {
    detail::accumulate(*self.parents[0], Matrix<Scalar>(self.grad.transpose()));
  });
}

template <typename Scalar>
BasicTensor<Scalar> add(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  detail::require_same_shape("add", a, b);
  return make_result<Scalar>(a.value() + b.value(), {a, b}, [](Node<Scalar>& self) {
    detail::accumulate(*self.parents[0], self.grad);
    detail::accumulate(*self.parents[1], self.grad);
  });
}

template <typename Scalar>
BasicTensor<Scalar> sub(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  detail::require_same_shape("sub", a, b);
  return make_result<Scalar>(a.value() - b.value(), {a, b}, [](Node<Scalar>& self) {
    detail::accumulate(*self.parents[0], self.grad);
    detail::accumulate(*self.parents[1], Matrix<Scalar>(-self.grad));
  });
}

template <typename Scalar>
BasicTensor<Scalar> operator+(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  return add(a, b);
}

template <typename Scalar>
BasicTensor<Scalar> operator-(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  return sub(a, b);
}

/// Element-wise (Hadamard) product.
template <typename Scalar>
BasicTensor<Scalar> mul(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  detail::require_same_shape("mul", a, b);
  return make_result<Scalar>(a.value().cwiseProduct(b.value()), {a, b}, [](Node<Scalar>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) detail::accumulate(pa, Matrix<Scalar>(self.grad.cwiseProduct(pb.value)));
    if (pb.requires_grad) detail::accumulate(pb, Matrix<Scalar>(self.grad.cwiseProduct(pa.value)));
  });
}

template <typename Scalar>
BasicTensor<Scalar> scale(const BasicTensor<Scalar>& a, Scalar factor) {
  return make_result<Scalar>(a.value() * factor, {a}, [factor](Node<Scalar>& self) {
    detail::accumulate(*self.parents[0], Matrix<Scalar>(self.grad * factor));
  });
}

/// x (r x c) plus a 1 x c row broadcast over every row.
template <typename Scalar>
BasicTensor<Scalar> add_rowwise(const BasicTensor<Scalar>& x, const BasicTensor<Scalar>& row) {
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw ShapeError("add_rowwise: expected row [1x" + std::to_string(x.cols()) + "], got " +
                     row.shape_string());
  }
  Matrix<Scalar> out = x.value();
  out.rowwise() += row.value().row(0);
  return make_result<Scalar>(std::move(out), {x, row}, [](Node<Scalar>& self) {
    detail::accumulate(*self.parents[0], self.grad);
    if (self.parents[1]->requires_grad) {
      detail::accumulate(*self.parents[1], Matrix<Scalar>(self.grad.colwise().sum()));
    }
  });
}

/// x (r x c) scaled column-by-column by a 1 x c row; a diagonal matrix applied to each row.
template <typename Scalar>
BasicTensor<Scalar> mul_rowwise(const BasicTensor<Scalar>& x, const BasicTensor<Scalar>& row) {
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw ShapeError("mul_rowwise: expected row [1x" + std::to_string(x.cols()) + "], got " +
                     row.shape_string());
  }
  Matrix<Scalar> out = x.value().array().rowwise() * row.value().row(0).array();
  return make_result<Scalar>(std::move(out), {x, row}, [](Node<Scalar>& self) {
    auto& px = *self.parents[0];
    auto& pr = *self.parents[1];
    if (px.requires_grad) {
      Matrix<Scalar> g = self.grad.array().rowwise() * pr.value.row(0).array();
      detail::accumulate(px, g);
    }
    if (pr.requires_grad) {
      detail::accumulate(pr, Matrix<Scalar>(self.grad.cwiseProduct(px.value).colwise().sum()));
    }
  });
}

/// x (r x c) scaled row-by-row by an r x 1 column.
template <typename Scalar>
BasicTensor<Scalar> mul_colwise(const BasicTensor<Scalar>& x, const BasicTensor<Scalar>& col) {
  if (col.cols() != 1 || col.rows() != x.rows()) {
    throw ShapeError("mul_colwise: expected column [" + std::to_string(x.rows()) + "x1], got " +
                     col.shape_string());
  }
  Matrix<Scalar> out = x.value().array().colwise() * col.value().col(0).array();
  return make_result<Scalar>(std::move(out), {x, col}, [](Node<Scalar>& self) {
    auto& px = *self.parents[0];
    auto& pc = *self.parents[1];
    if (px.requires_grad) {
      Matrix<Scalar> g = self.grad.array().colwise() * pc.value.col(0).array();
      detail::accumulate(px, g);
    }
    if (pc.requires_grad) {
      detail::accumulate(pc, Matrix<Scalar>(self.grad.cwiseProduct(px.value).rowwise().sum()));
    }
  });
}

template <typename Scalar>
BasicTensor<Scalar> tanh(const BasicTensor<Scalar>& x) {
  Matrix<Scalar> out = x.value().array().tanh();
  return make_result<Scalar>(std::move(out), {x}, [](Node<Scalar>& self) {
    Matrix<Scalar> g = self.grad.array() * (Scalar(1) - self.value.array().square());
    detail::accumulate(*self.parents[0], g);
  });
}

template <typename Scalar>
BasicTensor<Scalar> sigmoid(const BasicTensor<Scalar>& x) {
  Matrix<Scalar> out = x.value().unaryExpr([](Scalar v) { return detail::stable_sigmoid(v); });
  return make_result<Scalar>(std::move(out), {x}, [](Node<Scalar>& self) {
    Matrix<Scalar> g = self.grad.array() * self.value.array() * (Scalar(1) - self.value.array());
    detail::accumulate(*self.parents[0], g);
  });
}

/// Concatenation along axis 0 (stack rows) or axis 1 (append columns).
template <typename Scalar>
BasicTensor<Scalar> concat(const std::vector<BasicTensor<Scalar>>& parts, int axis) {
  if (parts.empty()) throw DomainError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ContractError("concat: axis must be 0 or 1");
  Index rows = 0, cols = 0;
  for (const auto& p : parts) {
    if (axis == 0) {
      if (p.cols() != parts[0].cols()) {
        throw ShapeError("concat(axis=0): column counts differ, " + parts[0].shape_string() +
                         " vs " + p.shape_string());
      }
      rows += p.rows();
    } else {
      if (p.rows() != parts[0].rows()) {
        throw ShapeError("concat(axis=1): row counts differ, " + parts[0].shape_string() +
                         " vs " + p.shape_string());
      }
      cols += p.cols();
    }
  }
  if (axis == 0) cols = parts[0].cols();
  else rows = parts[0].rows();

  Matrix<Scalar> out(rows, cols);
  Index offset = 0;
  for (const auto& p : parts) {
    if (axis == 0) {
      out.middleRows(offset, p.rows()) = p.value();
      offset += p.rows();
    } else {
      out.middleCols(offset, p.cols()) = p.value();
      offset += p.cols();
    }
  }
  return make_result<Scalar>(std::move(out), parts, [axis](Node<Scalar>& self) {
    Index off = 0;
    for (auto& parent : self.parents) {
      const Index extent = axis == 0 ? parent->value.rows() : parent->value.cols();
      if (parent->requires_grad) {
        if (axis == 0) detail::accumulate(*parent, Matrix<Scalar>(self.grad.middleRows(off, extent)));
        else detail::accumulate(*parent, Matrix<Scalar>(self.grad.middleCols(off, extent)));
      }
      off += extent;
    }
  });
}

template <typename Scalar>
BasicTensor<Scalar> slice_rows(const BasicTensor<Scalar>& x, Index begin, Index count) {
  if (begin < 0 || count < 1 || begin + count > x.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                     ") out of range for " + x.shape_string());
  }
  return make_result<Scalar>(Matrix<Scalar>(x.value().middleRows(begin, count)), {x},
                             [begin, count](Node<Scalar>& self) {
                               auto& p = *self.parents[0];
                               p.ensure_grad();
                               p.grad.middleRows(begin, count) += self.grad;
                             });
}

template <typename Scalar>
BasicTensor<Scalar> slice_cols(const BasicTensor<Scalar>& x, Index begin, Index count) {
  if (begin < 0 || count < 1 || begin + count > x.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                     ") out of range for " + x.shape_string());
  }
  return make_result<Scalar>(Matrix<Scalar>(x.value().middleCols(begin, count)), {x},
                             [begin, count](Node<Scalar>& self) {
                               auto& p = *self.parents[0];
                               p.ensure_grad();
                               p.grad.middleCols(begin, count) += self.grad;
                             });
}

template <typename Scalar>
BasicTensor<Scalar> sum(const BasicTensor<Scalar>& x) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = x.value().sum();
  return make_result<Scalar>(std::move(out), {x}, [](Node<Scalar>& self) {
    auto& p = *self.parents[0];
    detail::accumulate(p, Matrix<Scalar>(Matrix<Scalar>::Constant(p.value.rows(), p.value.cols(), self.grad(0, 0))));
  });
}

template <typename Scalar>
BasicTensor<Scalar> mean(const BasicTensor<Scalar>& x) {
  return scale(sum(x), Scalar(1) / static_cast<Scalar>(x.size()));
}

/// Mean over rows: r x c -> 1 x c.
template <typename Scalar>
BasicTensor<Scalar> mean_pool(const BasicTensor<Scalar>& x) {
  const Scalar inv = Scalar(1) / static_cast<Scalar>(x.rows());
  Matrix<Scalar> out = x.value().colwise().sum() * inv;
  return make_result<Scalar>(std::move(out), {x}, [inv](Node<Scalar>& self) {
    auto& p = *self.parents[0];
    Matrix<Scalar> g = self.grad.replicate(p.value.rows(), 1) * inv;
    detail::accumulate(p, g);
  });
}

template <typename Scalar>
struct Normalized {
  BasicTensor<Scalar> value;
  bool degenerate = false;  // input was all zeros; value is zeros
};

/// Scales the whole tensor to unit Euclidean norm. An all-zero input yields zeros and
/// sets the degenerate flag instead of producing NaN.
template <typename Scalar>
Normalized<Scalar> l2_normalize(const BasicTensor<Scalar>& x) {
  const Scalar norm = x.value().norm();
  if (norm == Scalar(0)) {
    return {BasicTensor<Scalar>::constant(Matrix<Scalar>::Zero(x.rows(), x.cols())), true};
  }
  Matrix<Scalar> out = x.value() / norm;
  auto t = make_result<Scalar>(std::move(out), {x}, [norm](Node<Scalar>& self) {
    // d(x/|x|) = (g - y <y, g>) / |x|
    const Scalar proj = self.value.cwiseProduct(self.grad).sum();
    Matrix<Scalar> g = (self.grad - self.value * proj) / norm;
    detail::accumulate(*self.parents[0], g);
  });
  return {t, false};
}

namespace detail {

template <typename Scalar>
void softmax_backward(const Matrix<Scalar>& y, const Matrix<Scalar>& g, Matrix<Scalar>& dx) {
  // Row-wise: dx = y * (g - <y, g>)
  for (Index r = 0; r < y.rows(); ++r) {
    const Scalar dot = y.row(r).dot(g.row(r));
    dx.row(r) = y.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
  }
}

}  // namespace detail

/// Softmax over every entry of the tensor, evaluated with max subtraction.
template <typename Scalar>
BasicTensor<Scalar> softmax(const BasicTensor<Scalar>& v) {
  if (v.size() == 0) throw DomainError("softmax: empty input");
  const Scalar peak = v.value().maxCoeff();
  Matrix<Scalar> e = (v.value().array() - peak).exp();
  e /= e.sum();
  return make_result<Scalar>(std::move(e), {v}, [](Node<Scalar>& self) {
    const Scalar dot = self.value.cwiseProduct(self.grad).sum();
    Matrix<Scalar> g = self.value.cwiseProduct((self.grad.array() - dot).matrix());
    detail::accumulate(*self.parents[0], g);
  });
}

/// Row-wise softmax of a B x T logit matrix where only the first lengths[b] entries of row b
/// take part; the remaining entries get weight exactly zero.
template <typename Scalar>
BasicTensor<Scalar> masked_softmax_rows(const BasicTensor<Scalar>& logits,
                                        std::span<const int> lengths) {
  if (static_cast<Index>(lengths.size()) != logits.rows()) {
    throw ShapeError("masked_softmax_rows: " + std::to_string(lengths.size()) +
                     " lengths for logits " + logits.shape_string());
  }
  Matrix<Scalar> out = Matrix<Scalar>::Zero(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const Index n = lengths[r];
    if (n < 1 || n > logits.cols()) {
      throw DomainError("masked_softmax_rows: row " + std::to_string(r) + " has length " +
                        std::to_string(n));
    }
    const auto head = logits.value().row(r).head(n);
    const Scalar peak = head.maxCoeff();
    auto e = (head.array() - peak).exp();
    out.row(r).head(n) = e / e.sum();
  }
  return make_result<Scalar>(std::move(out), {logits}, [](Node<Scalar>& self) {
    Matrix<Scalar> dx(self.value.rows(), self.value.cols());
    detail::softmax_backward(self.value, self.grad, dx);
    detail::accumulate(*self.parents[0], dx);
  });
}

/// Row lookup: out.row(i) = table.row(indices[i]). Backward scatter-adds into the table.
template <typename Scalar>
BasicTensor<Scalar> gather_rows(const BasicTensor<Scalar>& table, std::span<const int> indices) {
  if (indices.empty()) throw DomainError("gather_rows: no indices");
  Matrix<Scalar> out(static_cast<Index>(indices.size()), table.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= table.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(indices[i]) +
                       " out of range for " + table.shape_string());
    }
    out.row(static_cast<Index>(i)) = table.value().row(indices[i]);
  }
  std::vector<int> idx(indices.begin(), indices.end());
  return make_result<Scalar>(std::move(out), {table}, [idx = std::move(idx)](Node<Scalar>& self) {
    auto& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i) p.grad.row(idx[i]) += self.grad.row(static_cast<Index>(i));
  });
}

/// Per-entry binary cross-entropy on logits, max(s,0) - s*L + log(1 + exp(-|s|)).
/// Labels must be 0 or 1 and match the logits in count.
template <typename Scalar>
BasicTensor<Scalar> sigmoid_cross_entropy(const BasicTensor<Scalar>& logits,
                                          std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != logits.size()) {
    throw ShapeError("sigmoid_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for logits " + logits.shape_string());
  }
  Matrix<Scalar> out(logits.rows(), logits.cols());
  Matrix<Scalar> target(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.size(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label != 0 && label != 1) throw ContractError("sigmoid_cross_entropy: label must be 0 or 1");
    const Scalar s = logits.value().data()[i];
    target.data()[i] = static_cast<Scalar>(label);
    out.data()[i] = std::max(s, Scalar(0)) - s * target.data()[i] + std::log1p(std::exp(-std::abs(s)));
  }
  return make_result<Scalar>(std::move(out), {logits},
                             [target = std::move(target)](Node<Scalar>& self) {
                               auto& p = *self.parents[0];
                               Matrix<Scalar> g(p.value.rows(), p.value.cols());
                               for (Index i = 0; i < g.size(); ++i) {
                                 g.data()[i] = (detail::stable_sigmoid(p.value.data()[i]) -
                                                target.data()[i]) *
                                               self.grad.data()[i];
                               }
                               detail::accumulate(p, g);
                             });
}

template <typename Scalar>
BasicTensor<Scalar> sigmoid_cross_entropy(const BasicTensor<Scalar>& logit, int label) {
  const int labels[1] = {label};
  return sigmoid_cross_entropy(logit, std::span<const int>(labels, 1));
}

}  // namespace nlpr::ad

#endif  // NLPR_AUTODIFF_OPS_HPP
