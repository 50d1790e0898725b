#include "rbsde/rbsde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rbsde {

namespace {

std::vector<double> driver_gains(const EventTree& tree, const Driver& driver,
                                 const LadlagProcess& y,
                                 const PredictableField& z) {
  std::vector<double> g(tree.num_nodes(), 0.0);
  for (int node = 0; node < tree.num_interior(); ++node) {
    g[node] = driver.eval(tree, node, y.at[node], z.row(node));
  }
  return g;
}

double sup_distance(const LadlagProcess& ya, const PredictableField& za,
                    const LadlagProcess& yb, const PredictableField& zb) {
  double d = 0.0;
  for (std::size_t i = 0; i < ya.at.size(); ++i) {
    d = std::max(d, std::abs(ya.at[i] - yb.at[i]));
    d = std::max(d, std::abs(ya.post[i] - yb.post[i]));
  }
  for (std::size_t i = 0; i < za.values.size(); ++i) {
    d = std::max(d, std::abs(za.values[i] - zb.values[i]));
  }
  return d;
}

LadlagProcess diff(const LadlagProcess& a, const LadlagProcess& b) {
  LadlagProcess d = a;
  for (std::size_t i = 0; i < d.at.size(); ++i) {
    d.at[i] -= b.at[i];
    d.post[i] -= b.post[i];
  }
  return d;
}

PredictableField diff(const PredictableField& a, const PredictableField& b) {
  PredictableField d = a;
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
  return d;
}

}  // namespace

AffineDriver::AffineDriver(double a, std::vector<double> b,
                           std::vector<double> g0_per_period)
    : a_(a), b_(std::move(b)), g0_(std::move(g0_per_period)) {
  if (g0_.empty()) throw InputError("affine driver needs g0 per period");
}

AffineDriver::AffineDriver(double a, std::vector<double> b, double g0, int periods)
    : AffineDriver(a, std::move(b), std::vector<double>(periods, g0)) {}

double AffineDriver::operator()(const PeriodContext& ctx, double y,
                                std::span<const double> z) const {
  if (static_cast<int>(b_.size()) != static_cast<int>(z.size())) {
    throw InputError("affine driver mark dimension mismatch");
  }
  double v = a_ * y + g0_[ctx.tree->level(ctx.node)];
  for (std::size_t j = 0; j < b_.size(); ++j) v += b_[j] * z[j];
  return v;
}

double AffineDriver::lipschitz(const EventTree& tree) const {
  if (static_cast<int>(b_.size()) != tree.num_marks()) {
    throw InputError("affine driver mark dimension mismatch");
  }
  if (static_cast<int>(g0_.size()) != tree.periods()) {
    throw InputError("affine driver g0 must have one entry per period");
  }
  double lz = 0.0;
  double bsum = 0.0;
  for (double bj : b_) bsum += bj;
  for (int node = 0; node < tree.num_interior(); ++node) {
    const auto phi = tree.phi(node);
    const double dk = tree.delta_k(node);
    double q = 0.0;
    for (int j = 0; j < tree.num_marks(); ++j) {
      if (b_[j] == 0.0) continue;
      if (phi[j] == 0.0) return std::numeric_limits<double>::infinity();
      q += b_[j] * b_[j] / phi[j];
    }
    q = std::max(0.0, q - bsum * bsum);  // centered operator norm squared
    if (dk == 1.0) {
      if (bsum != 0.0) return std::numeric_limits<double>::infinity();
    } else {
      q += bsum * bsum / (1.0 - dk);
    }
    lz = std::max(lz, q);
  }
  return std::abs(a_) + std::sqrt(lz);
}

bool AffineDriver::depends_on_state() const {
  if (a_ != 0.0) return true;
  for (double bj : b_) {
    if (bj != 0.0) return true;
  }
  return false;
}

RbsdeSolution solve_frozen(const EventTree& tree, const Obstacle& obs,
                           std::span<const double> gain_rate) {
  RbsdeSolution sol;
  sol.y = snell_envelope(tree, obs, gain_rate);
  sol.parts = mertens_decompose(tree, sol.y, gain_rate);
  sol.z = represent(tree, sol.parts.martingale);
  sol.diagnostics.iterations = 1;
  sol.diagnostics.converged = true;
  return sol;
}

RbsdeSolution picard_solve(const EventTree& tree, const Obstacle& obs,
                           const Driver& driver, const PicardParams& params,
                           const LadlagProcess* y0, const PredictableField* z0) {
  if (params.tol <= 0.0) throw InputError("tol must be positive");
  if (params.max_iter < 1) throw InputError("max_iter must be >= 1");

  const double lip = driver.lipschitz(tree);
  if (!std::isfinite(lip)) {
    throw InputError("driver is not Lipschitz on this tree");
  }
  const double horizon = tree.horizon();
  const double lcap = std::max(lip, 1.0);
  const double eps2_default = 1.0 / (2.0 * lcap * lcap * (horizon + 1.0) * 8.0);
  const double eps = params.eps.value_or(std::sqrt(eps2_default));
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  const double beta = params.beta.value_or(1.0 / (eps * eps));
  if (beta * (1.0 + 1e-12) < 1.0 / (eps * eps)) {
    throw InputError("beta must be at least 1/eps^2");
  }
  if (beta * horizon > 700.0) {
    throw InputError("beta * horizon too large for double-precision weights");
  }

  SolveDiagnostics diag;
  diag.beta = beta;
  diag.eps = eps;
  diag.tol = params.tol;
  diag.max_iter = params.max_iter;
  diag.beta_overridden = params.beta.has_value();
  diag.eps_overridden = params.eps.has_value();
  diag.lipschitz = lip;

  LadlagProcess y = y0 ? *y0 : LadlagProcess::zeros(tree);
  PredictableField z = z0 ? *z0 : PredictableField::zeros(tree);
  if (static_cast<int>(y.at.size()) != tree.num_nodes() ||
      z.marks != tree.num_marks()) {
    throw InputError("initial iterate has the wrong shape");
  }

  const double tol2 = params.tol * params.tol;
  for (int k = 1; k <= params.max_iter; ++k) {
    const auto gains = driver_gains(tree, driver, y, z);
    RbsdeSolution sol = solve_frozen(tree, obs, gains);
    const double d2 = s2_norm(tree, diff(sol.y, y), beta) +
                      h2_norm(tree, diff(sol.z, z), beta);
    const double dsup = sup_distance(sol.y, sol.z, y, z);
    if (!diag.weighted_distances.empty() && diag.weighted_distances.back() > 0.0) {
      diag.ratios.push_back(d2 / diag.weighted_distances.back());
    }
    diag.weighted_distances.push_back(d2);
    diag.sup_distances.push_back(dsup);
    diag.iterations = k;
    if (d2 < tol2 || dsup < params.tol) {
      diag.converged = true;
      diag.final_ratio = diag.ratios.empty() ? 0.0 : diag.ratios.back();
      sol.diagnostics = diag;
      return sol;
    }
    y = std::move(sol.y);
    z = std::move(sol.z);
  }
  throw NonConvergenceError(
      "picard iteration did not meet tol within " +
          std::to_string(params.max_iter) + " iterations",
      diag.weighted_distances);
}

VerifyReport verify_solution(const EventTree& tree, const RbsdeSolution& sol,
                             const Obstacle& obs, const Driver& driver,
                             double reconstruction_tol) {
  VerifyReport report;
  report.reconstruction.name = "reconstruction";
  report.domination.name = "domination";
  report.a_part.name = "a-part";
  report.c_part.name = "c-part";

  const auto& y = sol.y;
  const auto& parts = sol.parts;
  const auto gains = driver_gains(tree, driver, y, sol.z);
  const double dt = tree.dt();

  // (i) Backward identity from every stopping node to the horizon, per path.
  for (int leaf = tree.leaf_begin(); leaf < tree.num_nodes(); ++leaf) {
    const double terminal = obs.at[leaf];
    const double m_T = parts.martingale[leaf];
    const double a_T = parts.a_cum[leaf];
    const double c_Tminus = parts.c_before(tree, leaf);
    double gain_after = 0.0;  // gains on (t, T] for t the current node
    for (int node = leaf;; node = tree.parent(node)) {
      if (!tree.is_leaf(node)) gain_after += gains[node] * dt;
      const double rhs = terminal + gain_after - (m_T - parts.martingale[node]) +
                         (a_T - parts.a_cum[node]) +
                         (c_Tminus - parts.c_before(tree, node));
      const double defect = std::abs(y.at[node] - rhs);
      if (defect > report.reconstruction.worst) {
        report.reconstruction.worst = defect;
        report.reconstruction.where = node;
      }
      if (node == 0) break;
    }
  }
  report.reconstruction.pass = report.reconstruction.worst <= reconstruction_tol;

  // (ii) Domination in both slots, exact.
  for (int node = 0; node < tree.num_nodes(); ++node) {
    const double gap = std::min(y.at[node] - obs.at[node], y.post[node] - obs.post[node]);
    if (gap < -report.domination.worst) {
      report.domination.worst = -gap;
      report.domination.where = node;
      report.domination.pass = false;
    }
  }

  // (iii) A: nondecreasing, one increment per parent (predictable placement),
  // charges only where the pre-jump value sits on the obstacle.
  for (int node = 0; node < tree.num_interior(); ++node) {
    const int first = tree.first_child(node);
    const double da = parts.delta_a[node];
    for (int c = first; c < first + tree.num_children(node); ++c) {
      const double placement = parts.a_cum[c] - (parts.a_cum[node] + da);
      if (placement != 0.0) {
        report.a_part.pass = false;
        report.a_part.worst = std::max(report.a_part.worst, std::abs(placement));
        report.a_part.where = c;
      }
    }
    if (da < 0.0) {
      report.a_part.pass = false;
      report.a_part.worst = std::max(report.a_part.worst, -da);
      report.a_part.where = node;
    } else if (da > 0.0) {
      const double touch = std::abs(y.post[node] - obs.post[node]);
      if (touch != 0.0) {
        report.a_part.pass = false;
        report.a_part.worst = std::max(report.a_part.worst, touch);
        report.a_part.where = node;
      }
    }
  }

  // (iv) C: nondecreasing, matches the right jumps, charges only on contact.
  for (int node = 0; node < tree.num_nodes(); ++node) {
    const double dc = parts.delta_c[node];
    const double jump = y.at[node] - y.post[node];
    if (dc != jump || dc < 0.0) {
      report.c_part.pass = false;
      report.c_part.worst =
          std::max(report.c_part.worst, std::abs(dc - jump) + std::max(-dc, 0.0));
      report.c_part.where = node;
    } else if (dc > 0.0) {
      const double touch = std::abs(y.at[node] - obs.at[node]);
      if (touch != 0.0) {
        report.c_part.pass = false;
        report.c_part.worst = std::max(report.c_part.worst, touch);
        report.c_part.where = node;
      }
    }
  }
  return report;
}

std::vector<double> residual(const EventTree& tree, const RbsdeSolution& sol,
                             const Obstacle& obs, const Driver& driver) {
  std::vector<double> res(tree.num_nodes(), 0.0);
  const auto& y = sol.y;
  const auto& parts = sol.parts;
  const double dt = tree.dt();
  for (int node = 0; node < tree.num_nodes(); ++node) {
    if (tree.is_leaf(node)) {
      res[node] = std::abs(y.at[node] - obs.at[node]);
      continue;
    }
    const double g = driver.eval(tree, node, y.at[node], sol.z.row(node));
    double mean = 0.0;
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      mean += tree.cond_prob(c) * y.at[c];
    }
    const int first = tree.first_child(node);
    const double da = parts.delta_a[node];
    double defect = std::abs(y.post[node] - g * dt - da - mean);
    defect = std::max(defect,
                      std::abs(y.at[node] - y.post[node] - parts.delta_c[node]));
    for (int c = first; c < first + tree.num_children(node); ++c) {
      const double dm = parts.martingale[c] - parts.martingale[node];
      defect = std::max(defect, std::abs(dm - (y.at[c] - mean)));
    }
    res[node] = defect;
  }
  return res;
}

double spot_check_lipschitz(const EventTree& tree, const Driver& driver,
                            int samples, std::uint64_t seed) {
  Rng rng(seed);
  const int m = tree.num_marks();
  PredictableField za = PredictableField::zeros(tree);
  PredictableField zb = PredictableField::zeros(tree);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const int node = rng.uniform_int(0, tree.num_interior() - 1);
    const double ya = rng.uniform(-2.0, 2.0);
    const double yb = rng.uniform(-2.0, 2.0);
    for (int j = 0; j < m; ++j) {
      za.at(node, j) = rng.uniform(-2.0, 2.0);
      zb.at(node, j) = rng.uniform(-2.0, 2.0);
    }
    const double fa = driver.eval(tree, node, ya, za.row(node));
    const double fb = driver.eval(tree, node, yb, zb.row(node));
    const double den = std::abs(ya - yb) + lipschitz_z_norm(tree, za, zb, node);
    if (den > 1e-12) {
      worst = std::max(worst, std::abs(fa - fb) / den);
    }
  }
  return worst;
}

std::unique_ptr<AffineDriver> random_affine_driver(Rng& rng,
                                                   const EventTree& tree,
                                                   const RandomDriverParams& params) {
  const double lt_limit = params.lt_cap / tree.dt();
  const double target = rng.uniform(0.0, std::min(params.max_lipschitz, lt_limit));
  const double y_share = rng.u01();

  const double a = (rng.bernoulli(0.5) ? 1.0 : -1.0) * y_share * target;
  std::vector<double> b(tree.num_marks());
  for (double& bj : b) bj = rng.uniform(-1.0, 1.0);

  // Scale the z-coefficients so the tree-wide constant lands on target.
  AffineDriver probe(0.0, b, 0.0, tree.periods());
  const double lz = probe.lipschitz(tree);
  const double z_target = (1.0 - y_share) * target;
  if (lz > 0.0 && std::isfinite(lz)) {
    for (double& bj : b) bj *= z_target / lz;
  } else {
    std::fill(b.begin(), b.end(), 0.0);
  }

  std::vector<double> g0(tree.periods());
  for (double& g : g0) g = rng.uniform(-params.g0_scale, params.g0_scale);
  return std::make_unique<AffineDriver>(a, std::move(b), std::move(g0));
}

}  // namespace rbsde
