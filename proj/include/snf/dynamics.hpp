#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "snf/ad.hpp"
#include "snf/nets.hpp"
#include "snf/paths.hpp"
#include "snf/rng.hpp"

namespace snf::dynamics {

// Probe vectors for Hutchinson-style divergence estimation. E[eps] = 0 and
// E[eps eps^T] = I by construction of the sampler. Probes are drawn once per
// trajectory by default so the augmented system stays a genuine ODE.
struct TraceProbe {
  enum class Dist { Rademacher, Gaussian };

  Dist dist = Dist::Rademacher;
  std::size_t count = 1;
  Tensor eps;  // d x count

  static TraceProbe sample(Dist dist, std::size_t d, std::size_t count, Rng& rng);
};

enum class DivergenceMode { Auto, Exact, Probe };  // Auto: exact for d <= 8

// State paired with its accumulated log-density change.
struct AugmentedState {
  std::vector<double> z;
  double delta_logp = 0.0;
};

enum class DriftKind { Zero, Constant, Linear, Mlp, Ergodic1d };
enum class DiffusionKind { Constant, DiagonalLinear, DiagonalMlp, FullMlp, OffdiagLambda };
enum class ErgodicConvention { ZeroFlux, PaperLiteral };
enum class Target1d { StdNormal, Cauchy };

// Drift/diffusion parameterization of the Ito SDE
//   dZ = mu(Z) dt + sigma(Z) dB,  Z_0 ~ N(0, I_d),
// with a flat trainable parameter vector shared by both coefficient nets.
// Diffusion structure tags:
//   Constant        fixed d x m matrix
//   DiagonalLinear  sigma_ii(z) = c_i z_i (no trainable parameters)
//   DiagonalMlp     net: d -> d, sigma = diag(net(z))
//   FullMlp         net: d -> d*m, reshaped row-major
//   OffdiagLambda   d = m = 2, sigma = lambda [[1, s1(z)], [s2(z), 1]]
// Ergodic1d drift (d = m = 1) is derived from the diffusion so that the SDE
// is stationary for the analytic target (see targets::ergodic_drift_1d).
struct SdeModel {
  std::size_t d = 1;
  std::size_t m = 1;
  DriftKind drift_kind = DriftKind::Zero;
  DiffusionKind diffusion_kind = DiffusionKind::Constant;

  nets::MlpSpec drift_spec;
  nets::MlpSpec diffusion_spec;
  std::vector<double> drift_constant;      // d
  std::vector<double> drift_matrix;        // d*d row-major, mu = A z
  std::vector<double> diffusion_constant;  // d*m row-major
  std::vector<double> diagonal_coeff;      // d
  double lambda = 1.0;
  Target1d ergodic_target = Target1d::Cauchy;
  ErgodicConvention ergodic_convention = ErgodicConvention::ZeroFlux;

  std::vector<double> params;      // [drift net | diffusion net]
  std::size_t drift_param_count = 0;

  bool drift_uses_net() const { return drift_kind == DriftKind::Mlp; }
  bool diffusion_uses_net() const {
    return diffusion_kind == DiffusionKind::DiagonalMlp ||
           diffusion_kind == DiffusionKind::FullMlp ||
           diffusion_kind == DiffusionKind::OffdiagLambda;
  }
};

void validate(const SdeModel& model);

// Allocates and initializes the flat parameter vector for any nets present.
void init_model_params(SdeModel& model, std::uint64_t seed);

// ---- graph-level evaluation (z is a batch x d leaf, theta the flat params)

ad::Value drift_value(const SdeModel& model, const ad::Value& z, double t, const ad::Value& theta);

// Diffusion applied to a fixed noise-derivative vector: sigma(z) * pdot.
ad::Value apply_diffusion(const SdeModel& model, const ad::Value& z, double t,
                          const ad::Value& theta, const std::vector<double>& pdot);

// Ito-to-Stratonovich drift adjustment, row i of
//   -1/2 div_x (sigma(x) sigma(x*)^T)_i
// with x* held fixed (stop-gradient) and set to x after differentiation.
ad::Value ito_correction_value(const SdeModel& model, const ad::Value& z, double t,
                               const ad::Value& theta, DivergenceMode mode,
                               const TraceProbe* probe);

// Wong-Zakai random-ODE field: mu + ito_correction + sigma * dB/dt.
ad::Value wz_field_value(const SdeModel& model, const paths::BrownianApprox& path, double t,
                         const ad::Value& z, const ad::Value& theta, DivergenceMode mode,
                         const TraceProbe* probe);

// Divergence (per batch row) of a field value f w.r.t. the leaf z.
ad::Value divergence_value(const ad::Value& f, const ad::Value& z, DivergenceMode mode,
                           const TraceProbe* probe);

// (dz/dt, d delta_logp/dt): the field plus the negative divergence.
std::pair<ad::Value, ad::Value> augmented_field_value(const SdeModel& model,
                                                      const paths::BrownianApprox& path, double t,
                                                      const ad::Value& z, const ad::Value& theta,
                                                      DivergenceMode mode, const TraceProbe* probe);

// Diagonal sigma and its per-channel spatial derivative d sigma_ii / d z_i,
// for schemes that need them numerically (Milstein). z is batch x d.
void diagonal_sigma_and_deriv(const SdeModel& model, const Tensor& z, double t, Tensor& sigma,
                              Tensor& dsigma);

// ---- numeric convenience wrappers (single state vector)

Tensor diffusion_matrix(const SdeModel& model, const std::vector<double>& z);
std::vector<double> ito_correction(const SdeModel& model, const std::vector<double>& z,
                                   DivergenceMode mode = DivergenceMode::Auto,
                                   const TraceProbe* probe = nullptr);
std::vector<double> wz_field(const SdeModel& model, const paths::BrownianApprox& path, double t,
                             const std::vector<double>& z,
                             DivergenceMode mode = DivergenceMode::Auto,
                             const TraceProbe* probe = nullptr);
double divergence(const std::function<ad::Value(const ad::Value&)>& field,
                  const std::vector<double>& z, DivergenceMode mode,
                  const TraceProbe* probe = nullptr);
std::pair<std::vector<double>, double> augmented_field(const SdeModel& model,
                                                       const paths::BrownianApprox& path,
                                                       const TraceProbe* probe, double t,
                                                       const AugmentedState& state,
                                                       DivergenceMode mode = DivergenceMode::Auto);

// Checkpoint: one JSON header line (model spec and offsets) followed by the
// flat parameters as little-endian 64-bit floats.
void save_model(const SdeModel& model, const std::string& file);
SdeModel load_model(const std::string& file);

}  // namespace snf::dynamics
