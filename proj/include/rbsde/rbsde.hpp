#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbsde/snell.hpp"

namespace rbsde {

/// Generator f(t, y, z) of the equation. The gain rate on the period after a
/// level-i node is f evaluated at that node's time, its at-value and the
/// integrand row of the next period stored at the node (both
/// parent-measurable).
class Driver {
 public:
  struct PeriodContext {
    const EventTree* tree;
    int node;      // interior node whose period the gain covers
    double t;      // time of the node
    double dt;
    double delta_k;
    std::span<const double> phi;
  };

  virtual ~Driver() = default;
  virtual double operator()(const PeriodContext& ctx, double y,
                            std::span<const double> z) const = 0;
  /// Lipschitz constant valid on this tree, in |y| + compensated-z metric.
  virtual double lipschitz(const EventTree& tree) const = 0;
  virtual bool depends_on_state() const { return true; }

  double eval(const EventTree& tree, int node, double y,
              std::span<const double> z) const {
    PeriodContext ctx{&tree, node,
                      tree.time_of(node), tree.dt(),
                      tree.delta_k(node), tree.phi(node)};
    return (*this)(ctx, y, z);
  }
};

/// f(t, y, z) = a*y + sum_j b_j z(u_j) + g0(t), with g0 per period. The
/// Lipschitz constant is computed exactly for the tree at hand:
///   L = |a| + max over interior nodes sqrt(B²/(1-ΔK) + Σ b_j²/φ_j - B²),
/// B = Σ b_j (infinite when a node makes the z-part unbounded in the
/// compensated metric, e.g. ΔK = 1 with B != 0).
class AffineDriver final : public Driver {
 public:
  AffineDriver(double a, std::vector<double> b, std::vector<double> g0_per_period);
  AffineDriver(double a, std::vector<double> b, double g0, int periods);

  double operator()(const PeriodContext& ctx, double y,
                    std::span<const double> z) const override;
  double lipschitz(const EventTree& tree) const override;
  bool depends_on_state() const override;

  double a() const { return a_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& g0() const { return g0_; }

 private:
  double a_;
  std::vector<double> b_;
  std::vector<double> g0_;  // one entry per period
};

/// Driver that ignores (y, z): a fixed per-node gain rate.
class FrozenGainDriver final : public Driver {
 public:
  explicit FrozenGainDriver(std::vector<double> gain_rate)
      : gain_(std::move(gain_rate)) {}
  double operator()(const PeriodContext& ctx, double, std::span<const double>) const override {
    return gain_[ctx.node];
  }
  double lipschitz(const EventTree&) const override { return 0.0; }
  bool depends_on_state() const override { return false; }
  const std::vector<double>& gain() const { return gain_; }

 private:
  std::vector<double> gain_;
};

struct PicardParams {
  std::optional<double> beta;  // default 1/eps^2
  std::optional<double> eps;   // default from the driver's Lipschitz constant
  double tol = 1e-10;
  int max_iter = 200;
};

struct SolveDiagnostics {
  int iterations = 0;
  bool converged = true;
  double beta = 0.0, eps = 0.0, tol = 0.0;
  int max_iter = 0;
  bool beta_overridden = false, eps_overridden = false;
  double lipschitz = 0.0;
  std::vector<double> weighted_distances;  // beta-weighted squared distances
  std::vector<double> sup_distances;       // max-norm distances
  std::vector<double> ratios;              // successive weighted-distance ratios
  double final_ratio = 0.0;
};

/// Solution quadruple with the decomposition martingale and run diagnostics.
struct RbsdeSolution {
  LadlagProcess y;
  PredictableField z;
  MertensParts parts;  // martingale M, cumulative A, cumulative C
  SolveDiagnostics diagnostics;
};

/// Solve with a state-independent gain: envelope, decomposition,
/// representation. The quadruple satisfies the backward identity exactly.
RbsdeSolution solve_frozen(const EventTree& tree, const Obstacle& obs,
                           std::span<const double> gain_rate);

/// Fixed-point iteration of (y, z) -> frozen solve with gains f(t, y, z).
/// Stops when the combined beta-weighted squared distance between successive
/// iterates falls below tol², or when the unweighted max-norm distance falls
/// below tol (the weighted threshold is unreachable in double precision once
/// beta*T is large, so the max-norm test is what usually fires at defaults).
/// Throws NonConvergenceError with the distance history on failure.
RbsdeSolution picard_solve(const EventTree& tree, const Obstacle& obs,
                           const Driver& driver, const PicardParams& params = {},
                           const LadlagProcess* y0 = nullptr,
                           const PredictableField* z0 = nullptr);

struct VerifyReport {
  struct Check {
    std::string name;
    bool pass = true;
    double worst = 0.0;
    int where = -1;
  };
  Check reconstruction;  // backward identity at every (path, stopping node)
  Check domination;      // y >= obstacle in both slots
  Check a_part;          // nondecreasing, predictable placement, flat off the obstacle
  Check c_part;          // nondecreasing, equals the right jumps, minimal
  bool all_pass() const {
    return reconstruction.pass && domination.pass && a_part.pass && c_part.pass;
  }
};

VerifyReport verify_solution(const EventTree& tree, const RbsdeSolution& sol,
                             const Obstacle& obs, const Driver& driver,
                             double reconstruction_tol = 1e-9);

/// Per-node defect of the one-step backward identity (and the terminal
/// match at the leaves), using the solution's own fields.
std::vector<double> residual(const EventTree& tree, const RbsdeSolution& sol,
                             const Obstacle& obs, const Driver& driver);

/// Largest observed ratio |f(y,z) - f(y',z')| / (|y-y'| + z-metric) over
/// random argument pairs; a declared Lipschitz constant should dominate it.
double spot_check_lipschitz(const EventTree& tree, const Driver& driver,
                            int samples, std::uint64_t seed);

struct RandomDriverParams {
  double max_lipschitz = 2.0;
  /// Cap on L*dt; explicit per-node gain feedback diverges past ~1.
  double lt_cap = 0.4;
  double g0_scale = 1.0;
};

std::unique_ptr<AffineDriver> random_affine_driver(Rng& rng,
                                                   const EventTree& tree,
                                                   const RandomDriverParams& params);

}  // namespace rbsde
