#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "cagefit/circuit.hpp"
#include "cagefit/descent.hpp"
#include "cagefit/formulation.hpp"
#include "cagefit/sampling.hpp"
#include "helpers.hpp"

using namespace cagefit;
using testutil::close_rel;

namespace {

// Machine whose parameters satisfy the standard restrictions exactly, so
// the restricted search space can represent it.
CircuitParams restricted_truth() {
  const Vec6 free{0.10, 3.1, 0.018, 0.18, 0.12, 42.0};
  return apply_restrictions(free, RestrictionConfig::standard());
}

TargetVector roundtrip_targets(const CircuitParams& p, double s_f = 0.02) {
  return targets_from_model(p, s_f);
}

Vec6 mat_apply(const Mat6& a, const Vec6& v) {
  Vec6 out{};
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) out[i] += a[i][j] * v[j];
  return out;
}

// F(x) = A (x - x*), the affine probe map used by several tests below.
struct AffineMap {
  Mat6 a;
  Vec6 xstar;
  Vec6 operator()(const Vec6& x) const {
    Vec6 d{};
    for (std::size_t i = 0; i < 6; ++i) d[i] = x[i] - xstar[i];
    return mat_apply(a, d);
  }
};

Mat6 well_conditioned() {
  Mat6 a{};
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) a[i][j] = 0.1 / (1.0 + i + j);
    a[i][i] = 2.0 + 0.3 * i;
  }
  return a;
}

}  // namespace

TEST_CASE("restriction assembly derives the tied parameters") {
  {
    const CircuitParams p =
        apply_restrictions({0.09, 2.0, 0.04, 0.2, 0.1, 30.0}, {0.5, 1.0});
    CHECK(p.r_s == 0.5 * 0.04);
    CHECK(p.x_r2 == 1.0 * 0.09);
  }
  {
    const CircuitParams p = apply_restrictions({0.10, 2.0, 0.04, 0.2, 0.1, 30.0},
                                               RestrictionConfig::standard());
    CHECK(p.r_s == 0.04);
    CHECK(p.x_r2 == 0.05);
  }
  const ParameterSpace fixed = ParameterSpace::fixed_pair(0.0377, 0.0513);
  const CircuitParams p = fixed.assemble({0.09, 2.0, 0.04, 0.2, 0.1, 30.0});
  CHECK(p.r_s == 0.0377);
  CHECK(p.x_r2 == 0.0513);
  // extract is the left inverse of assemble on the free coordinates
  const Vec6 back = fixed.extract(p);
  CHECK(back == Vec6{0.09, 2.0, 0.04, 0.2, 0.1, 30.0});
}

TEST_CASE("solvers start from the requested initial guess") {
  const CircuitParams truth = restricted_truth();
  const TargetVector targets = roundtrip_targets(truth);
  DescentConfig cfg;
  cfg.initial_guess = InitialGuessPolicy::typical_machine();

  Vec6 first{};
  bool seen = false;
  const auto observe = [&](const IterateRecord& rec) {
    if (rec.iteration == 0) {
      first = rec.x;
      seen = true;
    }
  };
  solve_nr(targets, cfg, ParameterSpace::restricted(cfg.restrictions), observe);
  REQUIRE(seen);
  CHECK(first == Vec6{0.08, 2.5, 0.03, 0.15, 0.08, 30.0});

  // The sampled policy is a pure function of its seed.
  cfg.initial_guess = InitialGuessPolicy::sample(99);
  Vec6 a{}, b{};
  solve_nr(targets, cfg, ParameterSpace::restricted(cfg.restrictions),
           [&](const IterateRecord& rec) {
             if (rec.iteration == 0) a = rec.x;
           });
  solve_dnr(targets, cfg, ParameterSpace::restricted(cfg.restrictions),
            [&](const IterateRecord& rec) {
              if (rec.iteration == 0) b = rec.x;
            });
  CHECK(a == b);
}

TEST_CASE("a fixed point converges in zero iterations") {
  const CircuitParams truth = restricted_truth();
  const TargetVector targets = roundtrip_targets(truth);
  DescentConfig cfg;
  cfg.initial_guess = InitialGuessPolicy::explicit_guess(truth);

  for (const auto alg :
       {DescentAlgorithm::NR, DescentAlgorithm::LM, DescentAlgorithm::DNR}) {
    const SolveOutcome out = solve_descent(alg, targets, cfg);
    CHECK(out.converged);
    CHECK(out.iterations == 0);
    // Not == 0.0: the optimizer may constant-fold one evaluation of the
    // circuit and leave the other at runtime, and folded complex division
    // can differ from __divdc3 in the last ulp. The round-trip bound is
    // the contract; exact zero is not promised across contexts.
    CHECK(out.squared_error < 1e-20);
    CHECK_FALSE(out.failure.has_value());
    CHECK(out.params == truth);
  }
}

TEST_CASE("newton solves an affine system in one iteration") {
  const AffineMap map{well_conditioned(), {1.2, 2.5, 0.8, 1.5, 1.1, 3.0}};
  DescentConfig cfg;
  const Vec6 x0{1.5, 2.0, 1.0, 1.2, 1.4, 2.5};

  const CoreOutcome out = newton_core(map, x0, cfg);
  CHECK(out.converged);
  CHECK(out.iterations == 1);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(std::abs(out.x[i] - map.xstar[i]) < 1e-6);
  }
}

TEST_CASE("damping steps past a singular jacobian") {
  // The map never reads x[3], so the finite-difference jacobian carries a
  // bitwise-zero column: exactly rank-deficient, deterministically.
  const Mat6 a = well_conditioned();
  const Vec6 xstar{1.2, 2.5, 0.8, 1.5, 1.1, 3.0};
  const auto map = [&a, &xstar](const Vec6& x) {
    const Vec6 d{x[0] - xstar[0], x[1] - xstar[1], x[2] - xstar[2], 0.0,
                 x[4] - xstar[4], x[5] - xstar[5]};
    return mat_apply(a, d);
  };
  DescentConfig cfg;
  const Vec6 x0{1.5, 2.0, 1.0, 1.2, 1.4, 2.5};

  const CoreOutcome nr = newton_core(map, x0, cfg);
  REQUIRE(nr.failure.has_value());
  CHECK(*nr.failure == FailureReason::SingularJacobian);

  const CoreOutcome dnr = dnr_core(map, x0, cfg);
  CHECK(dnr.iterations >= 1);
  if (dnr.failure) {
    CHECK(*dnr.failure != FailureReason::SingularJacobian);
  }
  // The damped matrix is regular, so the first step must have moved.
  CHECK(dnr.x != x0);
}

TEST_CASE("zero damping reduces damped newton to plain newton") {
  Rng rng(1234);
  for (int i = 0; i < 50; ++i) {
    const CircuitParams machine = testutil::random_feasible(rng);
    const TargetVector targets = roundtrip_targets(machine);
    DescentConfig cfg;
    cfg.damping.lambda0 = 0.0;
    cfg.initial_guess = InitialGuessPolicy::sample(1000 + i);
    const ParameterSpace space = ParameterSpace::restricted(cfg.restrictions);

    std::vector<IterateRecord> nr_recs, dnr_recs;
    const SolveOutcome nr = solve_nr(targets, cfg, space,
                                     [&](const IterateRecord& r) {
                                       nr_recs.push_back(r);
                                     });
    const SolveOutcome dnr = solve_dnr(targets, cfg, space,
                                       [&](const IterateRecord& r) {
                                         dnr_recs.push_back(r);
                                       });
    INFO("problem " << i);
    REQUIRE(nr_recs.size() == dnr_recs.size());
    for (std::size_t k = 0; k < nr_recs.size(); ++k) {
      for (std::size_t j = 0; j < 6; ++j) {
        REQUIRE(std::abs(nr_recs[k].x[j] - dnr_recs[k].x[j]) <= 1e-12);
      }
      REQUIRE(nr_recs[k].squared_error == dnr_recs[k].squared_error);
    }
    REQUIRE(nr.iterations == dnr.iterations);
    REQUIRE(nr.converged == dnr.converged);
    REQUIRE(nr.squared_error == dnr.squared_error);
  }
}

TEST_CASE("error-term damping decays geometrically on an improving run") {
  const AffineMap map{well_conditioned(), {1.2, 2.5, 0.8, 1.5, 1.1, 3.0}};
  DescentConfig cfg;  // ErrorTerm strategy by default
  const Vec6 x0{1.5, 2.0, 1.0, 1.2, 1.4, 2.5};

  std::vector<IterateRecord> recs;
  const CoreOutcome out = lm_core(map, x0, cfg, [&](const IterateRecord& r) {
    recs.push_back(r);
  });
  REQUIRE(out.converged);
  REQUIRE(recs.size() >= 3);
  CHECK(recs[0].lambda == cfg.damping.lambda0);
  for (std::size_t k = 1; k < recs.size(); ++k) {
    INFO("iteration " << k);
    // every step improves on this convex quadratic, so lambda only shrinks
    REQUIRE(recs[k].lambda == recs[k - 1].lambda / cfg.damping.gamma);
    REQUIRE(recs[k].squared_error < recs[k - 1].squared_error);
  }
}

TEST_CASE("huge damping turns the lm step into scaled steepest descent") {
  const TargetVector targets = to_targets([] {
    NameplateData p;
    p.u_n = 400.0;
    p.freq = 50.0;
    p.n_fl = 1480.0;
    p.i_s_fl = 181.0;
    p.p_m_fl = 100000.0;
    p.pf_fl = 0.85;
    p.eff_fl = 0.92;
    p.t_b_ratio = 2.3;
    p.t_lr_ratio = 1.9;
    p.i_lr_ratio = 6.5;
    return p;
  }());
  const ParameterSpace space =
      ParameterSpace::restricted(RestrictionConfig::standard());
  auto fn = detail::residual_fn(targets, space);
  const Vec6 x0{0.08, 2.5, 0.03, 0.15, 0.08, 30.0};

  const double lambda = 1e8;
  const Vec6 f0 = fn(x0);
  const auto jac = detail::residual_jacobian(fn, x0, f0, 1e-6);
  REQUIRE(jac.has_value());
  const Vec6 grad = transpose_apply(*jac, f0);
  const Mat6 normal = normal_matrix(*jac);
  Vec6 expected{};
  for (std::size_t i = 0; i < 6; ++i) {
    expected[i] = -grad[i] / (lambda * normal[i][i]);
  }

  DescentConfig cfg;
  cfg.max_iterations = 1;
  cfg.damping.lambda0 = lambda;
  std::vector<IterateRecord> recs;
  lm_core(fn, x0, cfg, [&](const IterateRecord& r) { recs.push_back(r); });
  REQUIRE(recs.size() == 2);
  Vec6 step{};
  for (std::size_t i = 0; i < 6; ++i) step[i] = recs[1].x[i] - recs[0].x[i];

  const double cosine =
      dot(step, expected) / std::sqrt(dot(step, step) * dot(expected, expected));
  const double angle = std::acos(std::min(1.0, std::max(-1.0, cosine)));
  CHECK(angle < 1e-3);
}

TEST_CASE("lm rejects worsening steps and recovers") {
  // One strongly curved coordinate started close to a flat spot: the
  // near-singular slope invites a massive overshoot, so the first steps
  // must be rejected with rising damping before progress resumes.
  const auto map = [](const Vec6& x) {
    return Vec6{x[0] * x[0] - 4.0, x[1] - 1.0, x[2] - 1.0,
                x[3] - 1.0, x[4] - 1.0, x[5] - 1.0};
  };
  DescentConfig cfg;
  const Vec6 x0{0.01, 1.0, 1.0, 1.0, 1.0, 1.0};

  std::vector<IterateRecord> recs;
  const CoreOutcome out = lm_core(map, x0, cfg, [&](const IterateRecord& r) {
    recs.push_back(r);
  });
  REQUIRE(out.converged);
  CHECK(std::abs(out.x[0] - 2.0) < 1e-3);

  int rejections = 0;
  for (std::size_t k = 1; k < recs.size(); ++k) {
    // the reported error never rises: rejected steps keep the old iterate
    REQUIRE(recs[k].squared_error <= recs[k - 1].squared_error);
    if (recs[k].x == recs[k - 1].x) {
      ++rejections;
      REQUIRE(recs[k].lambda == recs[k - 1].lambda * cfg.damping.beta);
    }
  }
  CHECK(rejections >= 3);
}

TEST_CASE("gain-ratio damping also rolls back worsening steps") {
  const auto map = [](const Vec6& x) {
    return Vec6{x[0] * x[0] - 4.0, x[1] - 1.0, x[2] - 1.0,
                x[3] - 1.0, x[4] - 1.0, x[5] - 1.0};
  };
  DescentConfig cfg;
  cfg.damping.strategy = DampingStrategy::GainRatio;
  const Vec6 x0{0.01, 1.0, 1.0, 1.0, 1.0, 1.0};

  std::vector<IterateRecord> recs;
  const CoreOutcome out = lm_core(map, x0, cfg, [&](const IterateRecord& r) {
    recs.push_back(r);
  });
  CHECK(out.converged);
  for (std::size_t k = 1; k < recs.size(); ++k) {
    REQUIRE(recs[k].squared_error <= recs[k - 1].squared_error);
  }
}

TEST_CASE("reported error is the best seen, not the last iterate") {
  Rng rng(5678);
  for (int i = 0; i < 20; ++i) {
    const CircuitParams machine = testutil::random_feasible(rng);
    const TargetVector targets = roundtrip_targets(machine);
    DescentConfig cfg;
    cfg.initial_guess = InitialGuessPolicy::sample(2000 + i);
    const ParameterSpace space = ParameterSpace::restricted(cfg.restrictions);

    double best_seen = std::numeric_limits<double>::infinity();
    const SolveOutcome out = solve_dnr(targets, cfg, space,
                                       [&](const IterateRecord& r) {
                                         best_seen =
                                             std::min(best_seen,
                                                      r.squared_error);
                                       });
    INFO("problem " << i);
    if (out.failure != FailureReason::NonFinite) {
      REQUIRE(out.squared_error == best_seen);
    }
    if (out.converged) {
      REQUIRE(out.squared_error < cfg.convergence_threshold);
      REQUIRE(out.params.all_positive());
      REQUIRE_FALSE(out.failure.has_value());
    }
  }
}

TEST_CASE("every iterate satisfies the restrictions exactly") {
  Rng rng(31337);
  for (int i = 0; i < 50; ++i) {
    const CircuitParams machine = testutil::random_feasible(rng);
    const TargetVector targets = roundtrip_targets(machine);
    DescentConfig cfg;
    cfg.restrictions = (i % 2 == 0) ? RestrictionConfig::standard()
                                    : RestrictionConfig::alternate();
    cfg.initial_guess = InitialGuessPolicy::sample(3000 + i);
    const ParameterSpace space = ParameterSpace::restricted(cfg.restrictions);
    const DescentAlgorithm alg = static_cast<DescentAlgorithm>(i % 3);

    const double k_r = cfg.restrictions.k_r;
    const double k_x = cfg.restrictions.k_x;
    int iterates = 0;
    solve_descent(alg, targets, cfg, space, [&](const IterateRecord& r) {
      const CircuitParams p = space.assemble(r.x);
      ++iterates;
      REQUIRE(p.r_s == k_r * p.r_r1);
      REQUIRE(p.x_r2 == k_x * p.x_s);
    });
    REQUIRE(iterates >= 1);
  }
}

TEST_CASE("fixed-pair mode never moves the imposed parameters") {
  Rng rng(2468);
  for (int i = 0; i < 20; ++i) {
    const CircuitParams machine = testutil::random_feasible(rng);
    const TargetVector targets = roundtrip_targets(machine);
    DescentConfig cfg;
    cfg.initial_guess = InitialGuessPolicy::sample(4000 + i);
    const double r_s = 0.01 + 0.001 * i;
    const double x_r2 = 0.05 + 0.002 * i;
    const ParameterSpace space = ParameterSpace::fixed_pair(r_s, x_r2);

    const SolveOutcome out =
        solve_descent(DescentAlgorithm::DNR, targets, cfg, space,
                      [&](const IterateRecord& r) {
                        const CircuitParams p = space.assemble(r.x);
                        REQUIRE(p.r_s == r_s);
                        REQUIRE(p.x_r2 == x_r2);
                      });
    REQUIRE(out.params.r_s == r_s);
    REQUIRE(out.params.x_r2 == x_r2);
  }
}

TEST_CASE("identical configuration reproduces the outcome exactly") {
  const CircuitParams truth = restricted_truth();
  const TargetVector targets = roundtrip_targets(truth);
  DescentConfig cfg;
  cfg.initial_guess = InitialGuessPolicy::sample(777);

  for (const auto alg :
       {DescentAlgorithm::NR, DescentAlgorithm::LM, DescentAlgorithm::DNR}) {
    const SolveOutcome a = solve_descent(alg, targets, cfg);
    const SolveOutcome b = solve_descent(alg, targets, cfg);
    CHECK(a.params == b.params);
    CHECK(a.squared_error == b.squared_error);
    CHECK(a.iterations == b.iterations);
    CHECK(a.converged == b.converged);
  }
}
