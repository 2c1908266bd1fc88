#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>

#include "agghb/error.hpp"
#include "agghb/harness.hpp"
#include "agghb/libsvm.hpp"
#include "test_util.hpp"

namespace {

namespace h = agghb::harness;
using agghb::AggConfig;

agghb::ProblemPtr scalar_quadratic(double q, double b = 0.0) {
  return agghb::make_quadratic(Eigen::MatrixXd::Constant(1, 1, q), Eigen::VectorXd::Constant(1, b));
}

agghb::ProblemPtr diag_quadratic(std::size_t n) {
  const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), 1.0,
                                                       static_cast<double>(n));
  return agghb::make_quadratic(d.asDiagonal().toDenseMatrix(),
                               Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
}

h::RunConfig explicit_run(h::OptimizerKind kind, AggConfig c, std::vector<double> x0,
                          std::size_t K) {
  h::RunConfig r;
  r.problem.id = "quadratic";
  r.kind = kind;
  r.optimizer = std::move(c);
  r.x0 = std::move(x0);
  r.iterations = K;
  return r;
}

// f(x) = |x|^2 / 2 that claims a far smaller L than it has.
class Understated final : public agghb::Problem {
 public:
  Understated() : Problem(make_info()) {}
  double value(std::span<const double> x) const override { return 0.5 * x[0] * x[0]; }
  void gradient(std::span<const double> x, std::span<double> out) const override { out[0] = x[0]; }

 private:
  static agghb::ProblemInfo make_info() {
    agghb::ProblemInfo i;
    i.name = "understated";
    i.dim = 1;
    i.L = 1e-6;
    i.convex = true;
    return i;
  }
};

TEST(Run, GradientDescentExactStep) {
  const auto p = agghb::make_quadratic(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1));
  const auto t = h::run(explicit_run(h::OptimizerKind::gd, {{0.0}, {1.0}}, {1.0}, 3), *p);
  ASSERT_EQ(t.points.size(), 4u);
  EXPECT_EQ(t.points[0].f, 0.5);
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_EQ(t.points[k].f, 0.0);
    EXPECT_EQ(t.points[k].grad_norm, 0.0);
    EXPECT_EQ(*t.points[k].dist_opt, 0.0);
  }
  EXPECT_FALSE(t.diverged);
}

TEST(Run, TwoBufferObjectiveValues) {
  const auto p = scalar_quadratic(1.0);
  const auto t =
      h::run(explicit_run(h::OptimizerKind::agghb, {{0.0, 0.5}, {0.1, 0.1}}, {1.0}, 2), *p);
  ASSERT_EQ(t.points.size(), 3u);
  EXPECT_NEAR(t.points[0].f, 0.5, 1e-16);
  EXPECT_NEAR(t.points[1].f, 0.405, 1e-15);
  EXPECT_NEAR(t.points[2].f, 0.3081125, 1e-15);
}

TEST(Run, SingleBufferMatchesHeavyBall) {
  const auto p = diag_quadratic(5);
  const std::vector<double> x0{1, -2, 3, -4, 5};
  const auto agg = h::run(explicit_run(h::OptimizerKind::agghb, {{0.9}, {0.05}}, x0, 300), *p);
  const auto hb = h::run(explicit_run(h::OptimizerKind::hb, {{0.9}, {0.05}}, x0, 300), *p);
  ASSERT_EQ(agg.points.size(), hb.points.size());
  for (std::size_t k = 0; k < agg.points.size(); ++k) {
    EXPECT_NEAR(agg.points[k].f, hb.points[k].f, 1e-12 * (1e-300 + hb.points[k].f));
  }
}

TEST(Run, ConfigValidation) {
  const auto p = scalar_quadratic(1.0);
  EXPECT_THROW(h::run(explicit_run(h::OptimizerKind::gd, {{0.5}, {0.1}}, {1.0}, 3), *p),
               std::invalid_argument);
  EXPECT_THROW(h::run(explicit_run(h::OptimizerKind::hb, {{0.5, 0.6}, {0.1, 0.1}}, {1.0}, 3), *p),
               std::invalid_argument);
  EXPECT_THROW(h::run(explicit_run(h::OptimizerKind::agghb, {{0.5}, {0.1}}, {1.0}, 0), *p),
               std::invalid_argument);
  EXPECT_THROW(h::run(explicit_run(h::OptimizerKind::agghb, {{0.5}, {0.1}}, {1.0, 2.0}, 3), *p),
               std::invalid_argument);
  auto tuned = explicit_run(h::OptimizerKind::agghb, {{0.5}, {}}, {1.0}, 3);
  tuned.source = h::StepsizeSource::tuned;
  EXPECT_THROW(h::run(tuned, *p), std::invalid_argument);
}

TEST(Run, DivergenceTruncates) {
  const auto p = scalar_quadratic(1.0);
  const auto t = h::run(explicit_run(h::OptimizerKind::agghb, {{0.9}, {50.0}}, {1.0}, 5000), *p);
  EXPECT_TRUE(t.diverged);
  EXPECT_LT(t.points.size(), 5001u);
  for (const auto& pt : t.points) {
    EXPECT_TRUE(std::isfinite(pt.f));
    EXPECT_TRUE(std::isfinite(pt.grad_norm));
  }
}

TEST(Run, DeterministicAndPrefixStable) {
  const auto p = diag_quadratic(4);
  auto c = explicit_run(h::OptimizerKind::agghb, {{0.5, 0.9, 0.99}, {0.01, 0.02, 0.03}},
                        {0.3, -0.7, 1.1, 2.0}, 200);
  const auto a = h::run(c, *p);
  const auto b = h::run(c, *p);
  c.iterations = 400;
  const auto longer = h::run(c, *p);
  ASSERT_EQ(a.points.size(), 201u);
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    EXPECT_EQ(a.points[k].f, b.points[k].f);
    EXPECT_EQ(a.points[k].grad_norm, b.points[k].grad_norm);
    EXPECT_EQ(a.points[k].f, longer.points[k].f);
    EXPECT_EQ(a.points[k].grad_norm, longer.points[k].grad_norm);
    EXPECT_EQ(*a.points[k].dist_opt, *longer.points[k].dist_opt);
  }
  // f_avg uses weights that depend on the budget only through F, which does
  // not depend on K, so it is prefix stable too.
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    EXPECT_EQ(*a.points[k].f_avg, *longer.points[k].f_avg);
  }
  EXPECT_EQ(h::trace_csv(a), h::trace_csv(b));
}

TEST(Run, VirtualRecursionResidualIsTiny) {
  const auto p = diag_quadratic(6);
  auto c = explicit_run(h::OptimizerKind::agghb, {{0.9, 0.95, 0.99}, {0.001, 0.002, 0.003}},
                        {1, 1, 1, 1, 1, 1}, 2000);
  c.track_virtual_recursion = true;
  const auto t = h::run(c, *p);
  ASSERT_TRUE(t.max_recursion_residual);
  EXPECT_LE(*t.max_recursion_residual, 1e-10);
}

TEST(Run, StronglyConvexAverageUsesContractionWeights) {
  const auto p = diag_quadratic(3);
  auto c = explicit_run(h::OptimizerKind::agghb, {{0.5}, {0.1}}, {1, 1, 1}, 3);
  const auto t = h::run(c, *p);
  EXPECT_DOUBLE_EQ(t.averaging_rho, 1.0 / (1.0 - 1.0 * t.constants.F / 2.0));
}

TEST(Tune, GridHasFifteenPowersOfTwo) {
  const auto g = h::tuning_grid();
  ASSERT_EQ(g.size(), 15u);
  EXPECT_EQ(g.front(), 1.0 / 64.0);
  EXPECT_EQ(g.back(), 256.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_EQ(g[i], 2.0 * g[i - 1]);
}

TEST(Tune, IdentityQuadraticPicksUnitScale) {
  const auto p = agghb::make_quadratic(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
  auto base = explicit_run(h::OptimizerKind::gd, {{0.0}, {}}, {1.0, -3.0}, 200);
  for (unsigned jobs : {1u, 4u}) {
    const auto r = h::tune(base, *p, jobs);
    EXPECT_EQ(r.best.tune_scale, 1.0);
    EXPECT_EQ(r.best.source, h::StepsizeSource::tuned);
    ASSERT_EQ(r.sweep.size(), 15u);
    EXPECT_EQ(r.sweep[6].a, 1.0);
    EXPECT_EQ(r.sweep[6].final_f, 0.0);
    EXPECT_TRUE(r.sweep.back().diverged);
  }
}

TEST(Tune, TiesGoToSmallerScaleAndResultIsPure) {
  const auto p = scalar_quadratic(1.0);
  auto base = explicit_run(h::OptimizerKind::agghb, {{0.5, 0.9}, {}}, {0.0}, 10);
  const auto a = h::tune(base, *p, 1);
  const auto b = h::tune(base, *p, 3);
  EXPECT_EQ(a.best.tune_scale, 1.0 / 64.0);
  ASSERT_EQ(a.sweep.size(), b.sweep.size());
  for (std::size_t i = 0; i < a.sweep.size(); ++i) {
    EXPECT_EQ(a.sweep[i].final_f, b.sweep[i].final_f);
    EXPECT_EQ(a.sweep[i].diverged, b.sweep[i].diverged);
  }
}

TEST(Tune, AllDivergedCarriesSweep) {
  const Understated p;
  auto base = explicit_run(h::OptimizerKind::agghb, {{0.5}, {}}, {1.0}, 2000);
  try {
    h::tune(base, p, 2);
    FAIL() << "expected TuningFailed";
  } catch (const h::TuningFailed& e) {
    ASSERT_EQ(e.sweep().size(), 15u);
    for (const auto& s : e.sweep()) EXPECT_TRUE(s.diverged);
  }
}

TEST(Reference, ClosedFormAndRejection) {
  Eigen::MatrixXd Q = Eigen::Vector2d(1.0, 3.0).asDiagonal();
  const auto q = agghb::make_quadratic(Q, Eigen::Vector2d(1.0, 3.0));
  const auto r = h::reference_solution(*q);
  EXPECT_TRUE(r.closed_form);
  EXPECT_NEAR(r.x[0], 1.0, 1e-15);
  EXPECT_NEAR(r.x[1], 1.0, 1e-15);
  EXPECT_NEAR(r.f, -2.0, 1e-15);
  EXPECT_THROW(h::reference_solution(*agghb::make_rosenbrock()), std::invalid_argument);
  const auto data = agghb::libsvm::synthetic(40, 4, 3);
  EXPECT_THROW(h::reference_solution(*agghb::make_logreg_nonconvex(data, 0.01)),
               std::invalid_argument);
}

TEST(Reference, LogisticCertificate) {
  const auto data = agghb::libsvm::synthetic(80, 5, 4);
  const auto p = agghb::make_logreg_l2(data, 0.05);
  const auto r = h::reference_solution(*p);
  EXPECT_FALSE(r.closed_form);
  EXPECT_LE(r.grad_norm, 1e-10);
  EXPECT_LT(r.iterations, 1'000'000u);
  EXPECT_NEAR(std::sqrt([&] {
                const auto g = p->gradient(r.x);
                double s = 0;
                for (double v : g) s += v * v;
                return s;
              }()),
              r.grad_norm, 1e-15);
}

TEST(Verify, CheckpointSchedule) {
  EXPECT_EQ(h::checkpoint_schedule(1000), (std::vector<std::size_t>{10, 100, 1000}));
  EXPECT_EQ(h::checkpoint_schedule(2500), (std::vector<std::size_t>{10, 100, 1000, 2500}));
  EXPECT_EQ(h::checkpoint_schedule(7), (std::vector<std::size_t>{7}));
}

TEST(Verify, ConvexTheoryStepsizePasses) {
  const auto p = diag_quadratic(10);
  h::RunConfig c = explicit_run(h::OptimizerKind::agghb, {{0.9}, {}}, std::vector<double>(10, 1.0),
                                1000);
  c.source = h::StepsizeSource::theory_convex;
  const auto t = h::run(c, *p);
  const auto rep = h::verify_bounds(t, *p);
  EXPECT_EQ(rep.kind, h::BoundKind::convex);
  ASSERT_EQ(rep.checkpoints.size(), 3u);
  EXPECT_TRUE(rep.all_pass());
  ASSERT_TRUE(rep.certificate);
  EXPECT_EQ(*rep.certificate, 0.0);
}

TEST(Verify, NonconvexStartAtOptimumPassesTrivially) {
  const auto p = agghb::make_rosenbrock();
  h::RunConfig c = explicit_run(h::OptimizerKind::agghb, {{0.9, 0.99}, {}}, {1.0, 1.0}, 100);
  c.source = h::StepsizeSource::theory_nonconvex;
  const auto rep = h::verify_bounds(h::run(c, *p), *p);
  ASSERT_EQ(rep.checkpoints.size(), 2u);
  for (const auto& cp : rep.checkpoints) {
    EXPECT_EQ(cp.bound, 0.0);
    EXPECT_EQ(cp.observed, 0.0);
    EXPECT_TRUE(cp.pass);
  }
}

TEST(Verify, NonconvexTheoryStepsizePasses) {
  const auto p = agghb::make_rosenbrock();
  h::RunConfig c =
      explicit_run(h::OptimizerKind::agghb, {{0.9, 0.95, 0.99}, {}}, {-1.0, 1.5}, 1000);
  c.source = h::StepsizeSource::theory_nonconvex;
  const auto rep = h::verify_bounds(h::run(c, *p), *p);
  EXPECT_EQ(rep.kind, h::BoundKind::nonconvex);
  EXPECT_TRUE(rep.all_pass());
}

TEST(Verify, RefusesOtherSources) {
  const auto p = scalar_quadratic(1.0);
  auto c = explicit_run(h::OptimizerKind::agghb, {{0.5}, {0.1}}, {1.0}, 10);
  EXPECT_THROW(h::verify_bounds(h::run(c, *p), *p), agghb::VerificationRefused);
  c.source = h::StepsizeSource::tuned;
  c.tune_scale = 1.0;
  EXPECT_THROW(h::verify_bounds(h::run(c, *p), *p), agghb::VerificationRefused);
}

TEST(Export, HeaderOnlyForEmptyTrace) {
  h::Trace t;
  EXPECT_EQ(h::trace_csv(t), "k,f,grad_norm,dist_opt,f_avg\n");
}

TEST(Export, RowsFieldsAndDeterminism) {
  agghb::testing::TempDir dir("export");
  const auto p = scalar_quadratic(1.0);
  const auto t = h::run(explicit_run(h::OptimizerKind::agghb, {{0.0, 0.5}, {0.1, 0.1}}, {1.0}, 2),
                        *p);
  const std::string csv = h::trace_csv(t);
  std::istringstream lines(csv);
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "k,f,grad_norm,dist_opt,f_avg");
  EXPECT_EQ(rows[1], "0,0.5,1,1,0.5");

  h::export_trace(t, dir / "a.csv");
  h::export_trace(t, dir / "b.csv");
  const auto slurp = [](const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.csv"), csv);
  EXPECT_EQ(slurp(h::metadata_path(dir / "a.csv")), slurp(h::metadata_path(dir / "b.csv")));
  EXPECT_EQ(h::metadata_path("x/t.csv"), std::filesystem::path("x/t.csv.meta.json"));

  const auto back = h::import_trace(dir / "a.csv");
  ASSERT_EQ(back.points.size(), t.points.size());
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    EXPECT_EQ(back.points[k].f, t.points[k].f);
    EXPECT_EQ(back.points[k].grad_norm, t.points[k].grad_norm);
    EXPECT_EQ(back.points[k].dist_opt, t.points[k].dist_opt);
    EXPECT_EQ(back.points[k].f_avg, t.points[k].f_avg);
  }
  EXPECT_EQ(back.config.optimizer.betas, t.config.optimizer.betas);
  EXPECT_EQ(back.resolved.gammas, t.resolved.gammas);
  EXPECT_EQ(back.constants.F, t.constants.F);
  EXPECT_EQ(h::trace_metadata(back), h::trace_metadata(t));

  EXPECT_THROW(h::export_trace(t, dir / "no-such-dir" / "c.csv"), std::runtime_error);
}

TEST(Export, CorruptCsvReportsLine) {
  agghb::testing::TempDir dir("corrupt");
  const auto p = scalar_quadratic(1.0);
  const auto t =
      h::run(explicit_run(h::OptimizerKind::agghb, {{0.5}, {0.1}}, {1.0}, 5), *p);
  h::export_trace(t, dir / "t.csv");
  std::string csv = h::trace_csv(t);
  const auto third = csv.find('\n', csv.find('\n', csv.find('\n') + 1) + 1);
  csv.insert(third + 1, "3,abc,1,,\n");
  std::ofstream(dir / "t.csv", std::ios::binary) << csv;
  try {
    h::import_trace(dir / "t.csv");
    FAIL() << "expected ParseError";
  } catch (const agghb::ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  std::ofstream(dir / "t.csv", std::ios::binary) << "wrong,header\n";
  EXPECT_THROW(h::import_trace(dir / "t.csv"), agghb::ParseError);
  EXPECT_THROW(h::import_trace(dir / "missing.csv"), std::runtime_error);
}

}  // namespace
