#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snf/ad.hpp"

namespace snf::nets {

// Fully-connected parameterization of a drift/diffusion coefficient. A
// "layer" is one weight matrix; hidden activations sit between layers and
// the final layer is linear.
struct MlpSpec {
  enum class Activation { Tanh, Softplus };

  std::vector<std::size_t> widths;  // input, hidden..., output
  Activation activation = Activation::Tanh;
  bool time_input = false;  // concatenate t to the input

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t layer_count() const { return widths.size() - 1; }
};

// Offsets of one layer inside the flat parameter vector. Weights are stored
// row-major as (fan_out x fan_in), followed by the fan_out biases.
struct LayerSlice {
  std::size_t w_off = 0;
  std::size_t b_off = 0;
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
};

std::vector<LayerSlice> layer_slices(const MlpSpec& spec);
std::size_t param_count(const MlpSpec& spec);

// Glorot-uniform hidden layers, zero biases, final-layer weights scaled by
// 1e-2 so the initial coefficient is near zero.
std::vector<double> init_params(const MlpSpec& spec, std::uint64_t seed);

// Forward pass on the tape. x is a (batch x input) matrix value; theta the
// flat parameter vector value. t must be supplied iff spec.time_input.
ad::Value forward(const MlpSpec& spec, const ad::Value& theta, const ad::Value& x, double t = 0.0);

// Tape-free forward for hot sampling loops; x and out are (batch x width).
void forward_numeric(const MlpSpec& spec, const std::vector<double>& params,
                     const Tensor& x, double t, Tensor& out);

// Architectures used by the experiments:
//   drift-4x64        d -> 64 -> 64 -> 64 -> d
//   offdiag-2x64      d -> 64 -> 2
//   cauchy-sigma-4x32 1 -> 32 -> 32 -> 32 -> 1
MlpSpec preset(const std::string& name, std::size_t d);

}  // namespace snf::nets
