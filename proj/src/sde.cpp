#include "qsd/sde.hpp"

#include <cmath>

namespace qsd {

NoiseIncrement sample_increment(RngStream& rng, double dt, int dim) {
  const double scale = std::sqrt(dt);
  NoiseIncrement w{State(dim)};
  for (int i = 0; i < dim; ++i) w.values(i) = scale * rng.normal();
  return w;
}

namespace {

void check_finite(const State& f, const SmallMatrix& s, const State& x) {
  if (!f.allFinite() || !s.allFinite())
    throw IntegrationFault("non-finite drift or diffusion", x);
}

}  // namespace

State em_step(const SdeModel& model, const State& x, double dt, const NoiseIncrement& w) {
  const State f = model.drift(x);
  const SmallMatrix s = model.diffusion(x);
  check_finite(f, s, x);
  return x + f * dt + s * w.values;
}

State milstein_step(const SdeModel& model, const State& x, double dt, const NoiseIncrement& w) {
  if (!model.has_gradient())
    throw UnsupportedScheme("Milstein step needs a diffusion gradient for model '" +
                            model.label + "'");
  const State f = model.drift(x);
  const SmallMatrix s = model.diffusion(x);
  check_finite(f, s, x);
  const DiffusionGradient grad = model.diffusion_gradient(x);
  const int d = model.dim;

  State out = x + f * dt + s * w.values;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j && s(i, j) != 0.0)
        throw UnsupportedScheme("Milstein step supports diagonal noise only");
      for (int k = 0; k < d; ++k) {
        const double g = grad[static_cast<std::size_t>(k)](i, j);
        if (g != 0.0 && !(i == j && j == k))
          throw UnsupportedScheme("Milstein step supports diagonal noise only");
      }
    }
    const double sii = s(i, i);
    if (sii == 0.0) continue;
    const double dsii = grad[static_cast<std::size_t>(i)](i, i);
    const double corr = 0.5 * sii * dsii * (w.values(i) * w.values(i) - dt);
    if (!std::isfinite(corr)) throw IntegrationFault("non-finite Milstein correction", x);
    out(i) += corr;
  }
  return out;
}

State step(Scheme scheme, const SdeModel& model, const State& x, double dt,
           const NoiseIncrement& w) {
  return scheme == Scheme::Milstein ? milstein_step(model, x, dt, w) : em_step(model, x, dt, w);
}

}  // namespace qsd
