#ifndef NLPR_TEXT_BLSTM_HPP
#define NLPR_TEXT_BLSTM_HPP

#include <span>
#include <string>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"
#include "nlpr/random.hpp"

namespace nlpr::text {

/// One gate of a peephole LSTM: pre-activation x W_x^T + h W_h^T + c (.) w_c + b.
/// The peephole is diagonal and stored as a 1 x H row; the cell candidate has none.
struct LstmGate {
  ad::Tensor input_weight;      // H x input_dim
  ad::Tensor recurrent_weight;  // H x H
  ad::Tensor peephole;          // 1 x H, undefined for the candidate
  ad::Tensor bias;              // 1 x H
};

struct LstmCell {
  LstmGate input_gate;
  LstmGate forget_gate;
  LstmGate candidate;
  LstmGate output_gate;
};

struct BlstmParams {
  LstmCell forward;
  LstmCell backward;
  int input_dim = 0;
  int hidden = 0;

  /// Weights uniform in +-1/sqrt(fan_in), peepholes in +-1/sqrt(H), biases zero.
  /// Parameter names are "<prefix>.fw.input_gate.input_weight" and so on.
  static BlstmParams init(int input_dim, int hidden, Rng& rng, const std::string& prefix);

  std::vector<ad::Tensor> parameters() const;
};

/// Batched bidirectional pass over T steps of B x input_dim inputs. Row b of output step t is
/// [h_t^fw | h_t^bw] for sequence b; both directions start from h = c = 0.
std::vector<ad::Tensor> blstm_forward_steps(std::span<const ad::Tensor> steps, const BlstmParams& params);

/// Single sequence: T x input_dim -> T x 2H.
ad::Tensor blstm_forward(const ad::Tensor& inputs, const BlstmParams& params);

}  // namespace nlpr::text

#endif  // NLPR_TEXT_BLSTM_HPP
