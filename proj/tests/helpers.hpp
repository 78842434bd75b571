#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "podgeq/grid.hpp"
#include "podgeq/pod.hpp"

namespace testutil {

inline constexpr double kTau = 2.0 * 3.14159265358979323846;

// Samples f(x, y) at the grid nodes.
inline podgeq::ScalarField field_of(const podgeq::GridSpec& g,
                                    const std::function<double(double, double)>& f) {
  podgeq::ScalarField out = podgeq::make_field(g);
  for (int j = 0; j < g.n_cells; ++j)
    for (int i = 0; i < g.n_cells; ++i)
      out.values(i, j) = f(i * g.spacing, j * g.spacing);
  return out;
}

// Random band-limited trig polynomial; smooth, periodic, reproducible.
inline podgeq::ScalarField random_smooth(const podgeq::GridSpec& g, std::mt19937& rng,
                                         int kmax = 3) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  struct Term {
    int kx, ky;
    double a, b;
  };
  std::vector<Term> terms;
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      const double damp = 1.0 / (1.0 + kx * kx + ky * ky);
      terms.push_back({kx, ky, damp * coef(rng), damp * coef(rng)});
    }
  return field_of(g, [&](double x, double y) {
    double v = 0.0;
    for (const Term& t : terms) {
      const double phase = kTau * (t.kx * x + t.ky * y);
      v += t.a * std::cos(phase) + t.b * std::sin(phase);
    }
    return v;
  });
}

inline double max_abs(const podgeq::ScalarField& f) { return f.values.abs().maxCoeff(); }

inline double max_diff(const podgeq::ScalarField& a, const podgeq::ScalarField& b) {
  return (a.values - b.values).abs().maxCoeff();
}

// Mean-free random smooth fields, e.g. as synthetic snapshots.
inline std::vector<podgeq::ScalarField> random_snapshots(const podgeq::GridSpec& g,
                                                         int count, unsigned seed,
                                                         int kmax = 3) {
  std::mt19937 rng(seed);
  std::vector<podgeq::ScalarField> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(podgeq::subtract_mean(random_smooth(g, rng, kmax)));
  return out;
}

inline podgeq::FieldRefs refs_of(const std::vector<podgeq::ScalarField>& fields) {
  podgeq::FieldRefs refs;
  for (const auto& f : fields) refs.push_back(&f);
  return refs;
}

// Orthonormalizes mean-free smooth fields into a synthetic basis.
inline podgeq::PodBasis synthetic_basis(const podgeq::GridSpec& g,
                                        podgeq::InnerProductKind kind, int r,
                                        unsigned seed) {
  std::mt19937 rng(seed);
  podgeq::PodBasis b;
  b.grid = g;
  b.kind = kind;
  while (static_cast<int>(b.modes.size()) < r) {
    podgeq::ScalarField f = podgeq::subtract_mean(random_smooth(g, rng));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& m : b.modes) f.values -= podgeq::inner(f, m, kind) * m.values;
    const double nrm = std::sqrt(podgeq::inner(f, f, kind));
    if (nrm < 1e-8) continue;
    f.values /= nrm;
    b.modes.push_back(f);
  }
  b.eigs = Eigen::VectorXd::Ones(r);
  return b;
}

}  // namespace testutil
