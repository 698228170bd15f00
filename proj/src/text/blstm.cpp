#include "nlpr/text/blstm.hpp"

#include <cmath>

#include "nlpr/autodiff/ops.hpp"
#include "nlpr/error.hpp"

namespace nlpr::text {

using ad::Matrix;
using ad::Tensor;

namespace {

Tensor uniform_param(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng, std::string name) {
  Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return Tensor::parameter(std::move(m), std::move(name));
}

LstmGate init_gate(int in, int hidden, bool peephole, Rng& rng, const std::string& prefix) {
  LstmGate g;
  g.input_weight = uniform_param(hidden, in, 1.0 / std::sqrt(double(in)), rng, prefix + ".input_weight");
  g.recurrent_weight =
      uniform_param(hidden, hidden, 1.0 / std::sqrt(double(hidden)), rng, prefix + ".recurrent_weight");
  if (peephole) {
    g.peephole = uniform_param(1, hidden, 1.0 / std::sqrt(double(hidden)), rng, prefix + ".peephole");
  }
  g.bias = Tensor::parameter(Matrix<double>::Zero(1, hidden), prefix + ".bias");
  return g;
}

LstmCell init_cell(int in, int hidden, Rng& rng, const std::string& prefix) {
  LstmCell c;
  c.input_gate = init_gate(in, hidden, true, rng, prefix + ".input_gate");
  c.forget_gate = init_gate(in, hidden, true, rng, prefix + ".forget_gate");
  c.candidate = init_gate(in, hidden, false, rng, prefix + ".candidate");
  c.output_gate = init_gate(in, hidden, true, rng, prefix + ".output_gate");
  return c;
}

void append_gate(std::vector<Tensor>& out, const LstmGate& g) {
  out.push_back(g.input_weight);
  out.push_back(g.recurrent_weight);
  if (g.peephole.defined()) out.push_back(g.peephole);
  out.push_back(g.bias);
}

// Transposed weights, built once per pass so each step is a plain right-multiplication.
struct GateView {
  Tensor input_t, recurrent_t, peephole, bias;
};

GateView view(const LstmGate& g) {
  return {ad::transpose(g.input_weight), ad::transpose(g.recurrent_weight), g.peephole, g.bias};
}

Tensor pre_activation(const GateView& g, const Tensor& x, const Tensor& h) {
  return ad::add_rowwise(ad::matmul(x, g.input_t) + ad::matmul(h, g.recurrent_t), g.bias);
}

std::vector<Tensor> run_direction(std::span<const Tensor> steps, const LstmCell& cell, int hidden,
                                  bool reverse) {
  const GateView in = view(cell.input_gate), forget = view(cell.forget_gate),
                 cand = view(cell.candidate), out = view(cell.output_gate);
  const Eigen::Index batch = steps[0].rows();
  Tensor h = Tensor::constant(Matrix<double>::Zero(batch, hidden));
  Tensor c = Tensor::constant(Matrix<double>::Zero(batch, hidden));
  std::vector<Tensor> states(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const std::size_t t = reverse ? steps.size() - 1 - k : k;
    const Tensor& x = steps[t];
    const Tensor i_gate = ad::sigmoid(pre_activation(in, x, h) + ad::mul_rowwise(c, in.peephole));
    const Tensor f_gate = ad::sigmoid(pre_activation(forget, x, h) + ad::mul_rowwise(c, forget.peephole));
    c = ad::mul(f_gate, c) + ad::mul(i_gate, ad::tanh(pre_activation(cand, x, h)));
    // The output gate peeks at the updated cell.
    const Tensor o_gate = ad::sigmoid(pre_activation(out, x, h) + ad::mul_rowwise(c, out.peephole));
    h = ad::mul(o_gate, ad::tanh(c));
    states[t] = h;
  }
  return states;
}

}  // namespace

BlstmParams BlstmParams::init(int input_dim, int hidden, Rng& rng, const std::string& prefix) {
  if (input_dim < 1 || hidden < 1) throw ContractError("BLSTM dimensions must be positive");
  BlstmParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.forward = init_cell(input_dim, hidden, rng, prefix + ".fw");
  p.backward = init_cell(input_dim, hidden, rng, prefix + ".bw");
  return p;
}

std::vector<Tensor> BlstmParams::parameters() const {
  std::vector<Tensor> out;
  for (const LstmCell* cell : {&forward, &backward}) {
    append_gate(out, cell->input_gate);
    append_gate(out, cell->forget_gate);
    append_gate(out, cell->candidate);
    append_gate(out, cell->output_gate);
  }
  return out;
}

std::vector<Tensor> blstm_forward_steps(std::span<const Tensor> steps, const BlstmParams& params) {
  if (steps.empty()) throw ContractError("blstm_forward: sequence must have at least one step");
  for (const auto& x : steps) {
    if (x.cols() != params.input_dim || x.rows() != steps[0].rows()) {
      throw ShapeError("blstm_forward: step " + x.shape_string() + " does not match input dim " +
                       std::to_string(params.input_dim) + " / batch " +
                       std::to_string(steps[0].rows()));
    }
  }
  const auto fw = run_direction(steps, params.forward, params.hidden, false);
  const auto bw = run_direction(steps, params.backward, params.hidden, true);
  std::vector<Tensor> out;
  out.reserve(steps.size());
  for (std::size_t t = 0; t < steps.size(); ++t) out.push_back(ad::concat<double>({fw[t], bw[t]}, 1));
  return out;
}

Tensor blstm_forward(const Tensor& inputs, const BlstmParams& params) {
  if (inputs.cols() != params.input_dim) {
    throw ShapeError("blstm_forward: input " + inputs.shape_string() + " has " +
                     std::to_string(inputs.cols()) + " columns, expected " +
                     std::to_string(params.input_dim));
  }
  std::vector<Tensor> steps;
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) steps.push_back(ad::slice_rows(inputs, t, 1));
  return ad::concat(blstm_forward_steps(steps, params), 0);
}

}  // namespace nlpr::text
