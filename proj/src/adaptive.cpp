#include "podgeq/adaptive.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "podgeq/errors.hpp"
#include "podgeq/pod.hpp"

namespace podgeq {

namespace {

constexpr double kDropNorm = 1e-8;
constexpr double kOrthoTol = 1e-8;
constexpr double kDropRel = 1e-12;

void check_adaptive_config(const AdaptiveConfig& cfg, const PodBasis& basis) {
  if (cfg.burst_len < 1) throw ConfigError("adaptive: burst_len must be at least 1");
  if (!(cfg.check_period > 0.0))
    throw ConfigError("adaptive: check_period must be positive");
  if (!(cfg.eps > 0.0)) throw ConfigError("adaptive: eps must be positive");
  if (cfg.burst_len * cfg.fd.dt > cfg.check_period / 5.0 + 1e-12)
    throw ConfigError("adaptive: burst span N*dt must be at most check_period/5");
  if (!(cfg.fd.grid == basis.grid))
    throw ConfigError("adaptive: burst grid must match the basis grid");
  if (cfg.max_rank < basis.rank())
    throw ConfigError("adaptive: basis already exceeds max_rank");
}

std::vector<ScalarField> run_burst(const ScalarField& u0, double t0,
                                   const FDConfig& fd, int n) {
  std::vector<ScalarField> hats;
  hats.reserve(static_cast<std::size_t>(n));
  ScalarField u = u0;
  detail::SemiImplicitSolver engine(fd);
  for (int j = 1; j <= n; ++j) {
    const double t_prev = t0 + (j - 1) * fd.dt;
    u = fd.scheme == Scheme::SemiImplicit ? engine.step(u, t_prev)
                                          : step_rk3(u, t_prev, fd);
    if (!u.values.isFinite().all())
      throw NumericalError("adaptive burst: non-finite field at step " +
                           std::to_string(j));
    hats.push_back(subtract_mean(u));
  }
  return hats;
}

}  // namespace

PodBasis burst_and_enrich(const RomState& state, const PodBasis& basis,
                          const AdaptiveConfig& cfg, CheckReport* report) {
  check_adaptive_config(cfg, basis);
  if (state.a.size() != basis.rank())
    throw ConfigError("burst_and_enrich: state size mismatch");

  const ScalarField u0 = reconstruct_full(basis, state.a, state.u_bar);
  const std::vector<ScalarField> burst = run_burst(u0, state.t, cfg.fd, cfg.burst_len);
  FieldRefs refs;
  refs.reserve(burst.size());
  for (const ScalarField& f : burst) refs.push_back(&f);

  PodBasis out = basis;
  const double e = projection_residual(refs, basis);
  int added = 0;
  if (e > cfg.eps) {
    const std::vector<ScalarField> residuals = residual_fields(refs, basis);
    FieldRefs rrefs;
    rrefs.reserve(residuals.size());
    for (const ScalarField& f : residuals) rrefs.push_back(&f);

    const Eigen::MatrixXd k = correlation(rrefs, basis.kind);
    Eigen::VectorXd eigs;
    Eigen::MatrixXd vecs;
    sym_eig(k, eigs, vecs);

    // New modes are taken until the absolute eigenvalue tail drops to eps,
    // never past the numerical rank of the residual set.
    const Eigen::VectorXd pos = eigs.cwiseMax(0.0);
    Eigen::Index num_rank = 0;
    while (num_rank < pos.size() && pos(num_rank) >= kDropRel * pos(0) &&
           pos(num_rank) > 0.0)
      ++num_rank;
    double tail = pos.sum();
    Eigen::Index want = 0;
    while (want < num_rank && tail > cfg.eps) tail -= pos(want++);
    if (want < 1) want = 1;

    const PodBasis res_basis =
        build_basis(rrefs, basis.kind, eigs, vecs, static_cast<int>(want));
    for (const ScalarField& mode : res_basis.modes) {
      ScalarField v = mode;
      for (int pass = 0; pass < 2; ++pass)
        for (const ScalarField& psi : out.modes)
          v.values -= inner(v, psi, out.kind) * psi.values;
      const double norm = std::sqrt(inner(v, v, out.kind));
      if (norm < kDropNorm) continue;
      if (out.rank() + 1 > cfg.max_rank)
        throw NumericalError("adaptive: basis growth exceeded cap " +
                             std::to_string(cfg.max_rank));
      v.values /= norm;
      out.modes.push_back(std::move(v));
      ++added;
    }

    if (added > 0) {
      const int r = out.rank();
      double dev = 0.0;
      for (int i = 0; i < r; ++i)
        for (int j = i; j < r; ++j) {
          const double g = inner(out.modes[i], out.modes[j], out.kind);
          dev = std::max(dev, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
      if (dev > kOrthoTol)
        throw NumericalError("adaptive: enriched basis lost orthonormality, deviation " +
                             std::to_string(dev));
    }
  }

  if (report) {
    report->t = state.t;
    report->residual = e;
    report->added = added;
    report->basis_size = out.rank();
    report->fd_steps = cfg.burst_len;
  }
  return out;
}

AdaptiveResult run_adaptive(const PodBasis& basis0, const RomState& init,
                            const RomConfig& rom_cfg, const AdaptiveConfig& cfg,
                            double t_final) {
  check_adaptive_config(cfg, basis0);
  if (init.a.size() != basis0.rank())
    throw ConfigError("run_adaptive: state size mismatch");
  const double span = t_final - init.t;
  if (span < 0.0) throw ConfigError("run_adaptive: t_final before start time");
  const long n = std::llround(span / rom_cfg.dt);
  if (std::abs(n * rom_cfg.dt - span) > 1e-9 * std::max(1.0, span))
    throw ConfigError("run_adaptive: time span must be an integer multiple of dt");

  const double ratio = cfg.check_period / rom_cfg.dt;
  long n_check = std::llround(ratio);
  if (std::abs(ratio - static_cast<double>(n_check)) > 1e-9)
    n_check = static_cast<long>(std::ceil(ratio));
  if (n_check < 1) n_check = 1;

  AdaptiveResult result;
  result.basis = basis0;
  auto model = std::make_unique<ReducedModel>(result.basis, rom_cfg);

  std::vector<Eigen::VectorXd> coeff_hist;
  coeff_hist.reserve(static_cast<std::size_t>(n) + 1);
  RomTrajectory& traj = result.trajectory;
  traj.times.reserve(static_cast<std::size_t>(n) + 1);
  traj.u_bar.reserve(static_cast<std::size_t>(n) + 1);
  traj.newton_iters.reserve(static_cast<std::size_t>(n));

  Eigen::VectorXd a = init.a;
  coeff_hist.push_back(a);
  traj.times.push_back(init.t);
  traj.u_bar.push_back(init.u_bar);
  double q_prev = model->mean_decay_rate(a);

  for (long k = 1; k <= n; ++k) {
    const double t_new = init.t + k * rom_cfg.dt;
    NewtonReport rep;
    a = model->step(a, t_new, &rep);
    const double q = model->last_mean_decay_rate();
    coeff_hist.push_back(a);
    traj.times.push_back(t_new);
    traj.u_bar.push_back(traj.u_bar.back() - 0.5 * rom_cfg.dt * (q_prev + q));
    traj.newton_iters.push_back(rep.iterations);
    q_prev = q;
    ++result.rom_steps_total;

    if (k % n_check == 0 && k < n) {
      CheckReport crep;
      PodBasis enriched = burst_and_enrich(
          RomState{a, traj.u_bar.back(), t_new}, result.basis, cfg, &crep);
      result.fd_steps_total += crep.fd_steps;
      if (crep.added > 0) {
        const ScalarField u_hat_state = reconstruct_mean_free(result.basis, a);
        Eigen::VectorXd a_new = Eigen::VectorXd::Zero(enriched.rank());
        a_new.head(a.size()) = a;
        for (int i = result.basis.rank(); i < enriched.rank(); ++i)
          a_new(i) = inner(u_hat_state, enriched.modes[i], enriched.kind);
        result.basis = std::move(enriched);
        model = std::make_unique<ReducedModel>(result.basis, rom_cfg);
        a = a_new;
        q_prev = model->mean_decay_rate(a);
      }
      result.reports.push_back(crep);
    }
  }

  const int rf = result.basis.rank();
  traj.coeffs = Eigen::MatrixXd::Zero(rf, n + 1);
  for (long k = 0; k <= n; ++k)
    traj.coeffs.col(k).head(coeff_hist[static_cast<std::size_t>(k)].size()) =
        coeff_hist[static_cast<std::size_t>(k)];
  return result;
}

}  // namespace podgeq
