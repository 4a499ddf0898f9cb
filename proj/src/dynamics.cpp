#include "snf/dynamics.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "snf/errors.hpp"

#include <json.hpp>

namespace snf::dynamics {

using ad::Value;

TraceProbe TraceProbe::sample(Dist dist, std::size_t d, std::size_t count, Rng& rng) {
  if (d < 1 || count < 1) throw std::invalid_argument("dynamics: probe needs d, count >= 1");
  TraceProbe p;
  p.dist = dist;
  p.count = count;
  p.eps = Tensor::matrix(d, count);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < count; ++k)
      p.eps(i, k) = dist == Dist::Rademacher ? rng.rademacher() : rng.normal();
  return p;
}

namespace {

std::size_t expected_drift_params(const SdeModel& m) {
  return m.drift_kind == DriftKind::Mlp ? nets::param_count(m.drift_spec) : 0;
}

std::size_t expected_diffusion_params(const SdeModel& m) {
  return m.diffusion_uses_net() ? nets::param_count(m.diffusion_spec) : 0;
}

bool exact_divergence(DivergenceMode mode, std::size_t d, const TraceProbe* probe) {
  if (mode == DivergenceMode::Exact) return true;
  if (mode == DivergenceMode::Probe) {
    if (!probe) throw ConfigError("dynamics: probe mode requires a TraceProbe");
    return false;
  }
  return d <= 8 || !probe;
}

Value theta_drift(const SdeModel& m, const Value& theta) {
  return ad::slice(theta, 0, m.drift_param_count);
}
Value theta_diffusion(const SdeModel& m, const Value& theta) {
  return ad::slice(theta, m.drift_param_count, theta.val().d0);
}

std::vector<double> diffusion_net_params(const SdeModel& m) {
  return std::vector<double>(m.params.begin() + static_cast<std::ptrdiff_t>(m.drift_param_count),
                             m.params.end());
}

Value zeros_like_rows(std::size_t batch, std::size_t cols) {
  return Value::constant(Tensor::matrix(batch, cols));
}

// Diagonal of sigma as a (batch x d) value; valid for the diagonal-structured
// kinds and for a constant matrix read along its diagonal.
Value diagonal_sigma_value(const SdeModel& m, const Value& z, double t, const Value& theta) {
  const std::size_t batch = z.val().d0;
  switch (m.diffusion_kind) {
    case DiffusionKind::Constant: {
      std::vector<double> diag(m.d);
      for (std::size_t i = 0; i < m.d; ++i) diag[i] = m.diffusion_constant[i * m.m + i];
      return ad::broadcast_row(Value::constant(Tensor::vector(diag)), batch);
    }
    case DiffusionKind::DiagonalLinear:
      return ad::mul(z, ad::broadcast_row(Value::constant(Tensor::vector(m.diagonal_coeff)), batch));
    case DiffusionKind::DiagonalMlp:
      return nets::forward(m.diffusion_spec, theta_diffusion(m, theta), z, t);
    default:
      throw UnsupportedStructureError("dynamics: diffusion has no diagonal representation");
  }
}

Value cauchy_logp_prime(const Value& z) {
  // (log p)'(x) = -2x / (1 + x^2)
  return ad::div(ad::scale(z, -2.0), ad::shift(ad::square(z), 1.0));
}

}  // namespace

void validate(const SdeModel& m) {
  if (m.d < 1 || m.m < 1) throw ConfigError("dynamics: dimensions must be positive");
  switch (m.drift_kind) {
    case DriftKind::Zero:
      break;
    case DriftKind::Constant:
      if (m.drift_constant.size() != m.d) throw ConfigError("dynamics: drift constant size != d");
      break;
    case DriftKind::Linear:
      if (m.drift_matrix.size() != m.d * m.d) throw ConfigError("dynamics: drift matrix size != d*d");
      break;
    case DriftKind::Mlp:
      if (m.drift_spec.input_width() != m.d || m.drift_spec.output_width() != m.d)
        throw ConfigError("dynamics: drift net must map d -> d");
      break;
    case DriftKind::Ergodic1d:
      if (m.d != 1 || m.m != 1) throw ConfigError("dynamics: ergodic drift is 1-D only");
      break;
  }
  switch (m.diffusion_kind) {
    case DiffusionKind::Constant:
      if (m.diffusion_constant.size() != m.d * m.m)
        throw ConfigError("dynamics: diffusion constant size != d*m");
      break;
    case DiffusionKind::DiagonalLinear:
      if (m.m != m.d || m.diagonal_coeff.size() != m.d)
        throw ConfigError("dynamics: diagonal-linear diffusion needs m = d coefficients");
      break;
    case DiffusionKind::DiagonalMlp:
      if (m.m != m.d || m.diffusion_spec.input_width() != m.d ||
          m.diffusion_spec.output_width() != m.d)
        throw ConfigError("dynamics: diagonal net must map d -> d with m = d");
      break;
    case DiffusionKind::FullMlp:
      if (m.diffusion_spec.input_width() != m.d ||
          m.diffusion_spec.output_width() != m.d * m.m)
        throw ConfigError("dynamics: full diffusion net must map d -> d*m");
      break;
    case DiffusionKind::OffdiagLambda:
      if (m.d != 2 || m.m != 2 || m.diffusion_spec.input_width() != 2 ||
          m.diffusion_spec.output_width() != 2)
        throw ConfigError("dynamics: offdiag-lambda needs d = m = 2 and a 2-output net");
      if (m.lambda < 0.0) throw ConfigError("dynamics: lambda must be >= 0");
      break;
  }
  if (m.drift_param_count != expected_drift_params(m))
    throw ConfigError("dynamics: drift_param_count does not match drift spec");
  if (m.params.size() != expected_drift_params(m) + expected_diffusion_params(m))
    throw ConfigError("dynamics: parameter vector length mismatch");
}

void init_model_params(SdeModel& model, std::uint64_t seed) {
  model.drift_param_count = expected_drift_params(model);
  model.params.assign(model.drift_param_count + expected_diffusion_params(model), 0.0);
  if (model.drift_kind == DriftKind::Mlp) {
    const auto p = nets::init_params(model.drift_spec, seed);
    std::copy(p.begin(), p.end(), model.params.begin());
  }
  if (model.diffusion_uses_net()) {
    const auto p = nets::init_params(model.diffusion_spec, seed + 1);
    std::copy(p.begin(), p.end(), model.params.begin() + static_cast<std::ptrdiff_t>(model.drift_param_count));
  }
  validate(model);
}

Value drift_value(const SdeModel& m, const Value& z, double t, const Value& theta) {
  const std::size_t batch = z.val().d0;
  switch (m.drift_kind) {
    case DriftKind::Zero:
      return zeros_like_rows(batch, m.d);
    case DriftKind::Constant:
      return ad::broadcast_row(Value::constant(Tensor::vector(m.drift_constant)), batch);
    case DriftKind::Linear:
      return ad::matmul_nt(z, Value::constant(Tensor::matrix(m.d, m.d, m.drift_matrix)));
    case DriftKind::Mlp:
      return nets::forward(m.drift_spec, theta_drift(m, theta), z, t);
    case DriftKind::Ergodic1d: {
      Value s = diagonal_sigma_value(m, z, t, theta);
      Value sprime = ad::backward(ad::sum(s), Value::scalar(1.0)).of(z);
      Value lp = m.ergodic_target == Target1d::Cauchy ? cauchy_logp_prime(z) : ad::neg(z);
      if (m.ergodic_convention == ErgodicConvention::ZeroFlux) {
        // mu = sigma^2 (log p)'/2 + sigma sigma'
        return ad::add(ad::scale(ad::mul(ad::square(s), lp), 0.5), ad::mul(s, sprime));
      }
      // paper-literal family: mu = sigma^2 (log p)' + sigma'/2
      return ad::add(ad::mul(ad::square(s), lp), ad::scale(sprime, 0.5));
    }
  }
  throw ConfigError("dynamics: unknown drift kind");
}

Value apply_diffusion(const SdeModel& m, const Value& z, double t, const Value& theta,
                      const std::vector<double>& pdot) {
  if (pdot.size() != m.m) throw ConfigError("dynamics: noise derivative has wrong dimension");
  const std::size_t batch = z.val().d0;
  switch (m.diffusion_kind) {
    case DiffusionKind::Constant: {
      std::vector<double> y(m.d, 0.0);
      for (std::size_t i = 0; i < m.d; ++i)
        for (std::size_t j = 0; j < m.m; ++j) y[i] += m.diffusion_constant[i * m.m + j] * pdot[j];
      return ad::broadcast_row(Value::constant(Tensor::vector(y)), batch);
    }
    case DiffusionKind::DiagonalLinear: {
      std::vector<double> cw(m.d);
      for (std::size_t i = 0; i < m.d; ++i) cw[i] = m.diagonal_coeff[i] * pdot[i];
      return ad::mul(z, ad::broadcast_row(Value::constant(Tensor::vector(cw)), batch));
    }
    case DiffusionKind::DiagonalMlp: {
      Value s = nets::forward(m.diffusion_spec, theta_diffusion(m, theta), z, t);
      return ad::mul(s, ad::broadcast_row(Value::constant(Tensor::vector(pdot)), batch));
    }
    case DiffusionKind::FullMlp: {
      Value s = nets::forward(m.diffusion_spec, theta_diffusion(m, theta), z, t);
      Value pv = ad::broadcast_row(Value::constant(Tensor::vector(pdot)), batch);
      Value out;
      for (std::size_t i = 0; i < m.d; ++i) {
        Value block = ad::slice_cols(s, i * m.m, (i + 1) * m.m);
        Value col = ad::reshape(ad::row_sum(ad::mul(block, pv)), 2, batch, 1);
        out = i == 0 ? col : ad::concat_cols(out, col);
      }
      return out;
    }
    case DiffusionKind::OffdiagLambda: {
      Value s = nets::forward(m.diffusion_spec, theta_diffusion(m, theta), z, t);
      Value base = ad::broadcast_row(Value::constant(Tensor::vector(pdot)), batch);
      Value swapped =
          ad::broadcast_row(Value::constant(Tensor::vector({pdot[1], pdot[0]})), batch);
      return ad::scale(ad::add(base, ad::mul(s, swapped)), m.lambda);
    }
  }
  throw ConfigError("dynamics: unknown diffusion kind");
}

namespace {

// Correction for diagonal structures: corr_i = -1/2 sigma_i(x*) d sigma_i/d x_i.
Value diagonal_correction(const SdeModel& m, const Value& z, double t, const Value& theta,
                          bool exact, const TraceProbe* probe) {
  const std::size_t batch = z.val().d0;
  Value s = diagonal_sigma_value(m, z, t, theta);
  if (!s.requires_grad()) return zeros_like_rows(batch, m.d);
  Value v = ad::mul(s, ad::detach(s));
  Value out;
  if (exact) {
    for (std::size_t i = 0; i < m.d; ++i) {
      Value g = ad::backward(ad::sum(ad::slice_cols(v, i, i + 1)), Value::scalar(1.0)).of(z);
      Value col = ad::scale(ad::slice_cols(g, i, i + 1), -0.5);
      out = i == 0 ? col : ad::concat_cols(out, col);
    }
    return out;
  }
  // probe estimate of the Jacobian diagonal, averaged over probe columns
  for (std::size_t i = 0; i < m.d; ++i) {
    Value acc;
    for (std::size_t p = 0; p < probe->count; ++p) {
      std::vector<double> eps(m.d);
      for (std::size_t r = 0; r < m.d; ++r) eps[r] = probe->eps(r, p);
      Value epsv = Value::constant(Tensor::vector(eps));
      Value phi = ad::sum(ad::scale(ad::slice_cols(v, i, i + 1), eps[i]));
      Value g = ad::backward(phi, Value::scalar(1.0)).of(z);
      Value contrib = ad::reshape(ad::row_sum(ad::mul(g, ad::broadcast_row(epsv, batch))), 2, batch, 1);
      acc = p == 0 ? contrib : ad::add(acc, contrib);
    }
    Value col = ad::scale(acc, -0.5 / static_cast<double>(probe->count));
    out = i == 0 ? col : ad::concat_cols(out, col);
  }
  return out;
}

Value offdiag_correction(const SdeModel& m, const Value& z, double t, const Value& theta) {
  const std::size_t batch = z.val().d0;
  Value s = nets::forward(m.diffusion_spec, theta_diffusion(m, theta), z, t);
  // rows of sigma(x) sigma(x*)^T depend on x through s1, s2 only:
  //   corr_1 = -lambda^2/2 (s1* ds1/dx1 + ds1/dx2)
  //   corr_2 = -lambda^2/2 (ds2/dx1 + s2* ds2/dx2)
  Value g1 = ad::backward(ad::sum(ad::slice_cols(s, 0, 1)), Value::scalar(1.0)).of(z);
  Value g2 = ad::backward(ad::sum(ad::slice_cols(s, 1, 2)), Value::scalar(1.0)).of(z);
  const double c = -0.5 * m.lambda * m.lambda;
  Value corr1 = ad::scale(ad::add(ad::mul(ad::detach(ad::slice_cols(s, 0, 1)), ad::slice_cols(g1, 0, 1)),
                                  ad::slice_cols(g1, 1, 2)),
                          c);
  Value corr2 = ad::scale(ad::add(ad::slice_cols(g2, 0, 1),
                                  ad::mul(ad::detach(ad::slice_cols(s, 1, 2)), ad::slice_cols(g2, 1, 2))),
                          c);
  return ad::concat_cols(corr1, corr2);
}

Value full_correction(const SdeModel& m, const Value& z, double t, const Value& theta, bool exact,
                      const TraceProbe* probe) {
  const std::size_t batch = z.val().d0;
  Value s = nets::forward(m.diffusion_spec, theta_diffusion(m, theta), z, t);
  Value sstar = ad::detach(s);
  auto h_entry = [&](std::size_t i, std::size_t j) {
    // h_ij = sum_k sigma_ik(x) sigma_jk(x*)
    return ad::row_sum(ad::mul(ad::slice_cols(s, i * m.m, (i + 1) * m.m),
                               ad::slice_cols(sstar, j * m.m, (j + 1) * m.m)));
  };
  Value out;
  for (std::size_t i = 0; i < m.d; ++i) {
    Value acc;
    if (exact) {
      for (std::size_t j = 0; j < m.d; ++j) {
        Value g = ad::backward(ad::sum(h_entry(i, j)), Value::scalar(1.0)).of(z);
        Value term = ad::slice_cols(g, j, j + 1);
        acc = j == 0 ? term : ad::add(acc, term);
      }
    } else {
      for (std::size_t p = 0; p < probe->count; ++p) {
        std::vector<double> eps(m.d);
        for (std::size_t r = 0; r < m.d; ++r) eps[r] = probe->eps(r, p);
        Value hrow;
        for (std::size_t j = 0; j < m.d; ++j) {
          Value col = ad::reshape(h_entry(i, j), 2, batch, 1);
          hrow = j == 0 ? col : ad::concat_cols(hrow, col);
        }
        Value epsv = Value::constant(Tensor::vector(eps));
        Value phi = ad::sum(ad::mul(hrow, ad::broadcast_row(epsv, batch)));
        Value g = ad::backward(phi, Value::scalar(1.0)).of(z);
        Value term = ad::reshape(ad::row_sum(ad::mul(g, ad::broadcast_row(epsv, batch))), 2, batch, 1);
        acc = p == 0 ? term : ad::add(acc, term);
      }
      acc = ad::scale(acc, 1.0 / static_cast<double>(probe->count));
    }
    Value col = ad::scale(ad::reshape(acc, 2, batch, 1), -0.5);
    out = i == 0 ? col : ad::concat_cols(out, col);
  }
  return out;
}

}  // namespace

Value ito_correction_value(const SdeModel& m, const Value& z, double t, const Value& theta,
                           DivergenceMode mode, const TraceProbe* probe) {
  const std::size_t batch = z.val().d0;
  const bool exact = exact_divergence(mode, m.d, probe);
  switch (m.diffusion_kind) {
    case DiffusionKind::Constant:
      return zeros_like_rows(batch, m.d);
    case DiffusionKind::DiagonalLinear:
    case DiffusionKind::DiagonalMlp:
      return diagonal_correction(m, z, t, theta, exact, probe);
    case DiffusionKind::OffdiagLambda:
      return offdiag_correction(m, z, t, theta);
    case DiffusionKind::FullMlp:
      return full_correction(m, z, t, theta, exact, probe);
  }
  throw ConfigError("dynamics: unknown diffusion kind");
}

Value wz_field_value(const SdeModel& m, const paths::BrownianApprox& path, double t, const Value& z,
                     const Value& theta, DivergenceMode mode, const TraceProbe* probe) {
  if (t < 0.0 || t > path.horizon) throw std::domain_error("dynamics: t outside path horizon");
  if (path.m != m.m) throw ConfigError("dynamics: path dimension != noise dimension");
  Value f = ad::add(drift_value(m, z, t, theta), ito_correction_value(m, z, t, theta, mode, probe));
  return ad::add(f, apply_diffusion(m, z, t, theta, path.deriv(t)));
}

Value divergence_value(const Value& f, const Value& z, DivergenceMode mode, const TraceProbe* probe) {
  const std::size_t batch = z.val().d0;
  const std::size_t d = z.val().d1;
  if (!f.requires_grad()) return Value::constant(Tensor::vector(batch));
  if (exact_divergence(mode, d, probe)) {
    Value acc;
    for (std::size_t j = 0; j < d; ++j) {
      Value g = ad::backward(ad::sum(ad::slice_cols(f, j, j + 1)), Value::scalar(1.0)).of(z);
      Value term = ad::reshape(ad::slice_cols(g, j, j + 1), 1, batch, 1);
      acc = j == 0 ? term : ad::add(acc, term);
    }
    return acc;
  }
  Value acc;
  for (std::size_t p = 0; p < probe->count; ++p) {
    std::vector<double> eps(d);
    for (std::size_t r = 0; r < d; ++r) eps[r] = probe->eps(r, p);
    Value epsv = Value::constant(Tensor::vector(eps));
    // eps^T (df/dz) eps realized as grad_z(eps . f) . eps, per batch row
    Value phi = ad::sum(ad::mul(f, ad::broadcast_row(epsv, batch)));
    Value g = ad::backward(phi, Value::scalar(1.0)).of(z);
    Value term = ad::row_sum(ad::mul(g, ad::broadcast_row(epsv, batch)));
    acc = p == 0 ? term : ad::add(acc, term);
  }
  return ad::scale(acc, 1.0 / static_cast<double>(probe->count));
}

std::pair<Value, Value> augmented_field_value(const SdeModel& m, const paths::BrownianApprox& path,
                                              double t, const Value& z, const Value& theta,
                                              DivergenceMode mode, const TraceProbe* probe) {
  Value f = wz_field_value(m, path, t, z, theta, mode, probe);
  Value j = ad::neg(divergence_value(f, z, mode, probe));
  return {f, j};
}

void diagonal_sigma_and_deriv(const SdeModel& m, const Tensor& z, double t, Tensor& sigma,
                              Tensor& dsigma) {
  const std::size_t batch = z.d0;
  Value zl = Value::leaf(z);
  Value theta = Value::constant(Tensor::vector(m.params));
  Value s = diagonal_sigma_value(m, zl, t, theta);
  sigma = s.val();
  dsigma = Tensor::matrix(batch, m.d);
  if (!s.requires_grad()) {
    return;  // constant sigma: zero derivative
  }
  for (std::size_t i = 0; i < m.d; ++i) {
    Value g = ad::backward(ad::sum(ad::slice_cols(s, i, i + 1)), Value::scalar(1.0)).of(zl);
    for (std::size_t b = 0; b < batch; ++b) dsigma(b, i) = g.val()(b, i);
  }
}

Tensor diffusion_matrix(const SdeModel& m, const std::vector<double>& z) {
  if (z.size() != m.d) throw ConfigError("dynamics: state dimension mismatch");
  Tensor out = Tensor::matrix(m.d, m.m);
  switch (m.diffusion_kind) {
    case DiffusionKind::Constant:
      out.v = m.diffusion_constant;
      return out;
    case DiffusionKind::DiagonalLinear:
      for (std::size_t i = 0; i < m.d; ++i) out(i, i) = m.diagonal_coeff[i] * z[i];
      return out;
    case DiffusionKind::DiagonalMlp: {
      Tensor s;
      nets::forward_numeric(m.diffusion_spec, diffusion_net_params(m), Tensor::matrix(1, m.d, z), 0.0, s);
      for (std::size_t i = 0; i < m.d; ++i) out(i, i) = s(0, i);
      return out;
    }
    case DiffusionKind::FullMlp: {
      Tensor s;
      nets::forward_numeric(m.diffusion_spec, diffusion_net_params(m), Tensor::matrix(1, m.d, z), 0.0, s);
      out.v.assign(s.v.begin(), s.v.end());
      return out;
    }
    case DiffusionKind::OffdiagLambda: {
      Tensor s;
      nets::forward_numeric(m.diffusion_spec, diffusion_net_params(m), Tensor::matrix(1, m.d, z), 0.0, s);
      out(0, 0) = m.lambda;
      out(0, 1) = m.lambda * s(0, 0);
      out(1, 0) = m.lambda * s(0, 1);
      out(1, 1) = m.lambda;
      return out;
    }
  }
  throw ConfigError("dynamics: unknown diffusion kind");
}

std::vector<double> ito_correction(const SdeModel& m, const std::vector<double>& z,
                                   DivergenceMode mode, const TraceProbe* probe) {
  Value zl = Value::leaf(Tensor::matrix(1, m.d, z));
  Value theta = Value::constant(Tensor::vector(m.params));
  Value c = ito_correction_value(m, zl, 0.0, theta, mode, probe);
  return c.val().v;
}

std::vector<double> wz_field(const SdeModel& m, const paths::BrownianApprox& path, double t,
                             const std::vector<double>& z, DivergenceMode mode,
                             const TraceProbe* probe) {
  Value zl = Value::leaf(Tensor::matrix(1, m.d, z));
  Value theta = Value::constant(Tensor::vector(m.params));
  return wz_field_value(m, path, t, zl, theta, mode, probe).val().v;
}

double divergence(const std::function<Value(const Value&)>& field, const std::vector<double>& z,
                  DivergenceMode mode, const TraceProbe* probe) {
  Value zl = Value::leaf(Tensor::matrix(1, z.size(), z));
  Value f = field(zl);
  return divergence_value(f, zl, mode, probe).val().v[0];
}

std::pair<std::vector<double>, double> augmented_field(const SdeModel& m,
                                                       const paths::BrownianApprox& path,
                                                       const TraceProbe* probe, double t,
                                                       const AugmentedState& state,
                                                       DivergenceMode mode) {
  Value zl = Value::leaf(Tensor::matrix(1, m.d, state.z));
  Value theta = Value::constant(Tensor::vector(m.params));
  auto [f, j] = augmented_field_value(m, path, t, zl, theta, mode, probe);
  return {f.val().v, j.val().v[0]};
}

namespace {

using nlohmann::json;

json spec_to_json(const nets::MlpSpec& s) {
  return json{{"widths", s.widths},
              {"activation", s.activation == nets::MlpSpec::Activation::Tanh ? "tanh" : "softplus"},
              {"time_input", s.time_input}};
}

nets::MlpSpec spec_from_json(const json& j) {
  nets::MlpSpec s;
  s.widths = j.at("widths").get<std::vector<std::size_t>>();
  const std::string act = j.at("activation").get<std::string>();
  if (act == "tanh")
    s.activation = nets::MlpSpec::Activation::Tanh;
  else if (act == "softplus")
    s.activation = nets::MlpSpec::Activation::Softplus;
  else
    throw ConfigError("dynamics: unknown activation '" + act + "'");
  s.time_input = j.at("time_input").get<bool>();
  return s;
}

const char* drift_kind_name(DriftKind k) {
  switch (k) {
    case DriftKind::Zero: return "zero";
    case DriftKind::Constant: return "constant";
    case DriftKind::Linear: return "linear";
    case DriftKind::Mlp: return "mlp";
    case DriftKind::Ergodic1d: return "ergodic-1d";
  }
  return "?";
}

const char* diffusion_kind_name(DiffusionKind k) {
  switch (k) {
    case DiffusionKind::Constant: return "constant";
    case DiffusionKind::DiagonalLinear: return "diagonal-linear";
    case DiffusionKind::DiagonalMlp: return "diagonal-mlp";
    case DiffusionKind::FullMlp: return "full-mlp";
    case DiffusionKind::OffdiagLambda: return "offdiag-lambda";
  }
  return "?";
}

template <typename Enum>
Enum parse_enum(const std::string& name, std::initializer_list<std::pair<const char*, Enum>> table,
                const char* what) {
  for (const auto& [key, value] : table)
    if (name == key) return value;
  throw ConfigError(std::string("dynamics: unknown ") + what + " '" + name + "'");
}

}  // namespace

void save_model(const SdeModel& m, const std::string& file) {
  validate(m);
  json header{{"format", "snf-model"},
              {"version", 1},
              {"d", m.d},
              {"m", m.m},
              {"drift", {{"kind", drift_kind_name(m.drift_kind)}}},
              {"diffusion", {{"kind", diffusion_kind_name(m.diffusion_kind)}}},
              {"drift_param_count", m.drift_param_count},
              {"param_count", m.params.size()}};
  if (m.drift_kind == DriftKind::Mlp) header["drift"]["spec"] = spec_to_json(m.drift_spec);
  if (m.drift_kind == DriftKind::Constant) header["drift"]["values"] = m.drift_constant;
  if (m.drift_kind == DriftKind::Linear) header["drift"]["matrix"] = m.drift_matrix;
  if (m.drift_kind == DriftKind::Ergodic1d) {
    header["drift"]["target"] = m.ergodic_target == Target1d::Cauchy ? "cauchy" : "std-normal";
    header["drift"]["convention"] =
        m.ergodic_convention == ErgodicConvention::ZeroFlux ? "zero-flux" : "paper-literal";
  }
  if (m.diffusion_uses_net()) header["diffusion"]["spec"] = spec_to_json(m.diffusion_spec);
  if (m.diffusion_kind == DiffusionKind::Constant) header["diffusion"]["values"] = m.diffusion_constant;
  if (m.diffusion_kind == DiffusionKind::DiagonalLinear) header["diffusion"]["coeff"] = m.diagonal_coeff;
  if (m.diffusion_kind == DiffusionKind::OffdiagLambda) header["diffusion"]["lambda"] = m.lambda;

  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("dynamics: cannot open '" + file + "' for writing");
  out << header.dump() << "\n";
  for (double value : m.params) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    out.write(bytes, 8);
  }
  if (!out) throw std::runtime_error("dynamics: write failed for '" + file + "'");
}

SdeModel load_model(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("dynamics: cannot open '" + file + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dynamics: missing checkpoint header");
  json header = json::parse(line);
  if (header.value("format", "") != "snf-model")
    throw ConfigError("dynamics: not a model checkpoint");

  SdeModel m;
  m.d = header.at("d").get<std::size_t>();
  m.m = header.at("m").get<std::size_t>();
  m.drift_param_count = header.at("drift_param_count").get<std::size_t>();

  const json& dj = header.at("drift");
  m.drift_kind = parse_enum<DriftKind>(dj.at("kind").get<std::string>(),
                                       {{"zero", DriftKind::Zero},
                                        {"constant", DriftKind::Constant},
                                        {"linear", DriftKind::Linear},
                                        {"mlp", DriftKind::Mlp},
                                        {"ergodic-1d", DriftKind::Ergodic1d}},
                                       "drift kind");
  if (m.drift_kind == DriftKind::Mlp) m.drift_spec = spec_from_json(dj.at("spec"));
  if (m.drift_kind == DriftKind::Constant)
    m.drift_constant = dj.at("values").get<std::vector<double>>();
  if (m.drift_kind == DriftKind::Linear)
    m.drift_matrix = dj.at("matrix").get<std::vector<double>>();
  if (m.drift_kind == DriftKind::Ergodic1d) {
    m.ergodic_target = parse_enum<Target1d>(dj.at("target").get<std::string>(),
                                            {{"cauchy", Target1d::Cauchy},
                                             {"std-normal", Target1d::StdNormal}},
                                            "ergodic target");
    m.ergodic_convention = parse_enum<ErgodicConvention>(
        dj.at("convention").get<std::string>(),
        {{"zero-flux", ErgodicConvention::ZeroFlux},
         {"paper-literal", ErgodicConvention::PaperLiteral}},
        "ergodic convention");
  }

  const json& sj = header.at("diffusion");
  m.diffusion_kind = parse_enum<DiffusionKind>(sj.at("kind").get<std::string>(),
                                               {{"constant", DiffusionKind::Constant},
                                                {"diagonal-linear", DiffusionKind::DiagonalLinear},
                                                {"diagonal-mlp", DiffusionKind::DiagonalMlp},
                                                {"full-mlp", DiffusionKind::FullMlp},
                                                {"offdiag-lambda", DiffusionKind::OffdiagLambda}},
                                               "diffusion kind");
  if (m.diffusion_uses_net()) m.diffusion_spec = spec_from_json(sj.at("spec"));
  if (m.diffusion_kind == DiffusionKind::Constant)
    m.diffusion_constant = sj.at("values").get<std::vector<double>>();
  if (m.diffusion_kind == DiffusionKind::DiagonalLinear)
    m.diagonal_coeff = sj.at("coeff").get<std::vector<double>>();
  if (m.diffusion_kind == DiffusionKind::OffdiagLambda) m.lambda = sj.at("lambda").get<double>();

  const std::size_t count = header.at("param_count").get<std::size_t>();
  m.params.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    char bytes[8];
    in.read(bytes, 8);
    if (!in) throw std::runtime_error("dynamics: truncated checkpoint '" + file + "'");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[b])) << (8 * b);
    std::memcpy(&m.params[i], &bits, sizeof(double));
  }
  validate(m);
  return m;
}

}  // namespace snf::dynamics
