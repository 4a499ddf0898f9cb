#include "snf/nets.hpp"

#include <cmath>
#include <stdexcept>

#include "snf/rng.hpp"

namespace snf::nets {

namespace {

void check_spec(const MlpSpec& spec) {
  if (spec.widths.size() < 3) throw std::invalid_argument("nets: spec needs >= 1 hidden layer");
  for (std::size_t w : spec.widths)
    if (w == 0) throw std::invalid_argument("nets: widths must be positive");
}

}  // namespace

std::vector<LayerSlice> layer_slices(const MlpSpec& spec) {
  check_spec(spec);
  std::vector<LayerSlice> out;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    LayerSlice s;
    s.fan_in = spec.widths[l] + (l == 0 && spec.time_input ? 1 : 0);
    s.fan_out = spec.widths[l + 1];
    s.w_off = off;
    s.b_off = off + s.fan_in * s.fan_out;
    off = s.b_off + s.fan_out;
    out.push_back(s);
  }
  return out;
}

std::size_t param_count(const MlpSpec& spec) {
  const auto slices = layer_slices(spec);
  const auto& last = slices.back();
  return last.b_off + last.fan_out;
}

std::vector<double> init_params(const MlpSpec& spec, std::uint64_t seed) {
  const auto slices = layer_slices(spec);
  std::vector<double> params(param_count(spec), 0.0);
  Rng rng(seed);
  for (std::size_t l = 0; l < slices.size(); ++l) {
    const auto& s = slices[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(s.fan_in + s.fan_out));
    const double gain = (l + 1 == slices.size()) ? 1e-2 : 1.0;
    for (std::size_t i = 0; i < s.fan_in * s.fan_out; ++i)
      params[s.w_off + i] = gain * rng.uniform(-bound, bound);
    // biases stay zero
  }
  return params;
}

ad::Value forward(const MlpSpec& spec, const ad::Value& theta, const ad::Value& x, double t) {
  const auto slices = layer_slices(spec);
  if (theta.val().rank != 1 || theta.val().d0 != param_count(spec))
    throw std::invalid_argument("nets: parameter vector has wrong length");
  if (x.val().rank != 2 || x.val().d0 < 1 || x.val().d1 != spec.input_width())
    throw std::invalid_argument("nets: input width mismatch");

  const std::size_t batch = x.val().d0;
  ad::Value h = x;
  if (spec.time_input)
    h = ad::concat_cols(h, ad::Value::constant(Tensor::matrix(batch, 1, std::vector<double>(batch, t))));

  for (std::size_t l = 0; l < slices.size(); ++l) {
    const auto& s = slices[l];
    ad::Value w = ad::reshape(ad::slice(theta, s.w_off, s.w_off + s.fan_in * s.fan_out), 2,
                              s.fan_out, s.fan_in);
    ad::Value b = ad::slice(theta, s.b_off, s.b_off + s.fan_out);
    h = ad::add(ad::matmul_nt(h, w), ad::broadcast_row(b, batch));
    if (l + 1 < slices.size())
      h = spec.activation == MlpSpec::Activation::Tanh ? ad::tanh(h) : ad::softplus(h);
  }
  return h;
}

void forward_numeric(const MlpSpec& spec, const std::vector<double>& params, const Tensor& x,
                     double t, Tensor& out) {
  const auto slices = layer_slices(spec);
  if (params.size() != param_count(spec))
    throw std::invalid_argument("nets: parameter vector has wrong length");
  if (x.rank != 2 || x.d1 != spec.input_width())
    throw std::invalid_argument("nets: input width mismatch");

  const std::size_t batch = x.d0;
  Tensor h = x;
  if (spec.time_input) {
    Tensor aug = Tensor::matrix(batch, h.d1 + 1);
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t j = 0; j < h.d1; ++j) aug(i, j) = h(i, j);
      aug(i, h.d1) = t;
    }
    h = std::move(aug);
  }

  Tensor next;
  for (std::size_t l = 0; l < slices.size(); ++l) {
    const auto& s = slices[l];
    next = Tensor::matrix(batch, s.fan_out);
    kernels::mm_nt(h.v.data(), params.data() + s.w_off, next.v.data(), batch, s.fan_in, s.fan_out);
    const double* b = params.data() + s.b_off;
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < s.fan_out; ++j) next(i, j) += b[j];
    if (l + 1 < slices.size()) {
      if (spec.activation == MlpSpec::Activation::Tanh) {
        for (auto& v : next.v) v = std::tanh(v);
      } else {
        for (auto& v : next.v)
          v = v > 35.0 ? v : (v < -35.0 ? std::exp(v) : std::log1p(std::exp(v)));
      }
    }
    h = std::move(next);
  }
  out = std::move(h);
}

MlpSpec preset(const std::string& name, std::size_t d) {
  MlpSpec spec;
  if (name == "drift-4x64") {
    spec.widths = {d, 64, 64, 64, d};
  } else if (name == "offdiag-2x64") {
    spec.widths = {d, 64, 2};
  } else if (name == "cauchy-sigma-4x32") {
    spec.widths = {1, 32, 32, 32, 1};
  } else {
    throw std::invalid_argument("nets: unknown preset '" + name + "'");
  }
  return spec;
}

}  // namespace snf::nets
