#include "support.hpp"

#include <doctest.h>

using namespace spt;
using spt::testing::Gen;

namespace {

struct Seeded {
  SampledPath prices;
  PartitionHierarchy hier;
};

const Seeded& seed42() {
  static const Seeded s = [] {
    SampledPath p = simulate_paths(standard_test_market(Index{1} << 14, 42));
    PartitionHierarchy h = build_dyadic_hierarchy(p.grid(), 14);
    return Seeded{std::move(p), std::move(h)};
  }();
  return s;
}

WeightSeries single_stamp(const Vector& mu) {
  return WeightSeries(TimeGrid::uniform(1, 1.0), mu.replicate(1, 2), WeightScheme::Market);
}

BVPath constant_bv(const Vector& a) { return BVPath(TimeGrid::uniform(1, 1.0), a.replicate(1, 2)); }

}  // namespace

TEST_CASE("phi at hand-checked points") {
  const Vector bary4 = Vector::Constant(4, 0.25);
  CHECK(phi_value(Family::Geometric, 0.5, bary4) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(phi_value(Family::Diversity, 0.5, bary4) == doctest::Approx(4.0).epsilon(1e-15));

  const PhiDerivatives e = phi_eval_grad_hess(Family::Entropy, 0.5, Vector::Constant(2, 0.5));
  CHECK(e.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(e.gradient[0] == doctest::Approx(-1.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(e.gradient[1] == doctest::Approx(-1.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(e.hessian(0, 0) == -2.0);
  CHECK(e.hessian(1, 1) == -2.0);
  CHECK(e.hessian(0, 1) == 0.0);

  CHECK_THROWS_AS(phi_value(Family::Geometric, 0.5, Vector::Zero(2)), DomainError);
  CHECK_THROWS_AS(phi_value(Family::Entropy, 0.5, Vector::Ones(2)), DomainError);
}

TEST_CASE("property: closed-form gradients and Hessians match finite differences") {
  Gen gen(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = gen.integer(2, 5);
    const Vector x = gen.simplex_point(d);
    const Family f = static_cast<Family>(gen.integer(0, 2));
    const double p = gen.uniform(0.1, 0.9);
    const PhiDerivatives c = phi_eval_grad_hess(f, p, x);
    const GeneratingFunction fd =
        GeneratingFunction::from_values(d, 0, [=](const Vector& y, const Vector&) { return phi_value(f, p, y); });
    CAPTURE(trial);
    CHECK(c.value == phi_value(f, p, x));
    CHECK((fd.gradient_x(x, Vector()) - c.gradient).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + c.gradient.cwiseAbs().maxCoeff()));
    CHECK((fd.hessian_x(x, Vector()) - c.hessian).cwiseAbs().maxCoeff() <= 1e-4 * (1.0 + c.hessian.cwiseAbs().maxCoeff()));
    CHECK((c.hessian - c.hessian.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + c.hessian.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("entropy weights at (0.3, 0.7) with lambda 1") {
  Vector mu(2);
  mu << 0.3, 0.7;
  CHECK(phi_value(Family::Entropy, 0.5, mu) == doctest::Approx(0.6109).epsilon(1e-4));
  const WeightSeries pi = mixed_weights({Family::Entropy, 1.0, 1.0, 0.5}, single_stamp(mu), constant_bv(mu));
  CHECK(pi.col(0)[0] == doctest::Approx(0.5913).epsilon(1e-4));
  // Closed form -mu_i log mu_i / phi.
  CHECK(pi.col(0)[0] == doctest::Approx(-0.3 * std::log(0.3) / phi_value(Family::Entropy, 0.5, mu)).epsilon(1e-14));
  CHECK(pi.col(0).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("symmetric weights and the diversity p -> 1 limit leave the market unchanged") {
  const Vector bary = Vector::Constant(3, 1.0 / 3.0);
  for (const double lambda : {0.3, 1.0}) {
    const WeightSeries pi =
        mixed_weights({Family::Geometric, lambda, 1.0, 0.5}, single_stamp(bary), constant_bv(bary));
    CHECK((pi.col(0) - bary).cwiseAbs().maxCoeff() <= 1e-15);
  }
  Gen gen(32);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector mu = gen.simplex_point(4), alpha = gen.simplex_point(4);
    const WeightSeries pi = mixed_weights({Family::Diversity, gen.uniform(0.2, 1.0), 1.0, 0.999},
                                          single_stamp(mu), constant_bv(alpha));
    CAPTURE(trial);
    CHECK((pi.col(0) - mu).cwiseAbs().maxCoeff() <= 1e-2);
  }
}

TEST_CASE("property: closed-form weights equal the generic generated weights") {
  Gen gen(33);
  for (int trial = 0; trial < 15; ++trial) {
    const Index d = gen.integer(2, 5);
    const TimeGrid g = gen.grid(50);
    const WeightSeries mu = market_weights(gen.prices(g, d));
    const MixedGeneratorSpec spec{static_cast<Family>(gen.integer(0, 2)), gen.uniform(0.1, 1.0),
                                  gen.uniform(0.02, 0.5), gen.uniform(0.1, 0.9)};
    const BVPath alpha = moving_average(mu.as_path(), spec.theta);
    const WeightSeries closed = mixed_weights(spec, mu, alpha);
    const WeightSeries generic = generated_weights(mixed_generating_function(spec, d), mu, alpha);
    CAPTURE(trial);
    CHECK((closed.values() - generic.values()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((closed.values().colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("drift terms: closed forms against the generic left-point route") {
  const Seeded& m = seed42();
  const WeightSeries mu = market_weights(m.prices);
  const double theta = 32.0 * m.prices.grid().horizon() / static_cast<double>(m.prices.steps());
  const BVPath alpha = moving_average(mu.as_path(), theta);
  for (const Family f : {Family::Geometric, Family::Diversity, Family::Entropy}) {
    const MixedGeneratorSpec spec{f, 0.7, theta, 0.4};
    const GeneratingFunction g = mixed_generating_function(spec, 3);
    for (const Index level : {8, 14}) {
      const DriftLedger generic = master_decomposition(g, m.prices, alpha, m.hier, level, HorizontalRule::LeftPoint);
      const DriftTerms closed =
          example_drift_terms(spec, mu, alpha, covariation_matrix(mu.as_path(), m.hier, level));
      CAPTURE(to_string(f));
      CAPTURE(level);
      CHECK((closed.g_cum.values().row(0).transpose() - generic.g_cum).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((closed.h_cum.values().row(0).transpose() - generic.h_cum).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  const DriftTerms one = example_drift_terms({Family::Entropy, 1.0, theta, 0.5}, mu, alpha,
                                             covariation_matrix(mu.as_path(), m.hier, 10));
  CHECK(one.h_cum.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a constant market has no drift terms") {
  const TimeGrid g = TimeGrid::uniform(64, 1.0);
  const SampledPath s(g, Matrix::Constant(3, g.size(), 5.0));
  const PartitionHierarchy h = build_dyadic_hierarchy(g, 6);
  const WeightSeries mu = market_weights(s);
  const BVPath alpha = moving_average(mu.as_path(), 8.0);
  for (const Family f : {Family::Geometric, Family::Diversity, Family::Entropy}) {
    const DriftTerms t = example_drift_terms({f, 0.5, 8.0, 0.5}, mu, alpha, covariation_matrix(mu.as_path(), h, 6));
    CHECK(t.g_cum.values().cwiseAbs().maxCoeff() == 0.0);
    // The window average reproduces the constant only to rounding.
    CHECK(t.h_cum.values().cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("route equivalence: exact weights, collapse at lambda 1, ledger under refinement") {
  const Seeded& m = seed42();
  const double theta = 32.0 * m.prices.grid().horizon() / static_cast<double>(m.prices.steps());
  for (const Family f : {Family::Geometric, Family::Diversity, Family::Entropy}) {
    CAPTURE(to_string(f));
    const EquivalenceReport one = equivalence_check({f, 1.0, theta, 0.3}, m.prices, m.hier, 12);
    CHECK(one.weights_deviation <= 1e-12);
    CHECK(one.ledger_deviation <= 1e-12);
    CHECK(one.state.h_cum.cwiseAbs().maxCoeff() == 0.0);

    std::vector<double> ledger;
    for (const Index level : {10, 12, 14}) {
      const EquivalenceReport r = equivalence_check({f, 0.6, theta, 0.3}, m.prices, m.hier, level);
      CHECK(r.weights_deviation <= 1e-10);
      ledger.push_back(r.ledger_deviation);
    }
    CAPTURE(ledger[0]);
    CAPTURE(ledger[2]);
    CHECK(ledger.back() <= 2e-2);
  }
}

TEST_CASE("property: entropy second-order drift is non-decreasing") {
  Gen gen(34);
  for (int trial = 0; trial < 8; ++trial) {
    const Index d = gen.integer(2, 5);
    const TimeGrid g = gen.grid(256);
    const SampledPath s = gen.prices(g, d, gen.uniform(0.2, 1.0));
    const PartitionHierarchy h = build_dyadic_hierarchy(g, 8);
    const MixedGeneratorSpec spec{Family::Entropy, gen.uniform(0.2, 1.0), gen.uniform(0.02, 0.3), 0.5};
    const WeightSeries mu = market_weights(s);
    const BVPath alpha = moving_average(mu.as_path(), spec.theta);
    const Index level = gen.integer(0, 8);
    const DriftLedger l = master_decomposition(mixed_generating_function(spec, d), s, alpha, h, level);
    CAPTURE(trial);
    for (Index j = 0; j + 1 < l.g_cum.size(); ++j) CHECK(l.g_cum[j + 1] - l.g_cum[j] >= -1e-12);
  }
}

TEST_CASE("property: permuting assets permutes weights and keeps the ledger") {
  Gen gen(35);
  for (int trial = 0; trial < 6; ++trial) {
    const Index d = gen.integer(2, 5);
    const TimeGrid g = gen.grid(128);
    const SampledPath s = gen.prices(g, d);
    const PartitionHierarchy h = build_dyadic_hierarchy(g, 7);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(d);
    perm.setIdentity();
    for (Index i = d - 1; i > 0; --i) std::swap(perm.indices()[i], perm.indices()[gen.integer(0, i)]);
    const SampledPath sp(g, perm * s.values());
    const MixedGeneratorSpec spec{static_cast<Family>(gen.integer(0, 2)), gen.uniform(0.2, 1.0), 0.1, 0.5};
    const WeightSeries mu = market_weights(s), mu_p = market_weights(sp);
    const BVPath alpha = moving_average(mu.as_path(), spec.theta);
    const BVPath alpha_p = moving_average(mu_p.as_path(), spec.theta);
    CAPTURE(trial);
    CHECK((perm * mixed_weights(spec, mu, alpha).values() - mixed_weights(spec, mu_p, alpha_p).values())
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    const GeneratingFunction gf = mixed_generating_function(spec, d);
    const Index level = h.finest_level();
    CHECK((master_decomposition(gf, s, alpha, h, level).columns() -
           master_decomposition(gf, sp, alpha_p, h, level).columns())
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("family names and parameter validation") {
  for (const Family f : {Family::Geometric, Family::Diversity, Family::Entropy})
    CHECK(parse_family(to_string(f)) == f);
  CHECK_THROWS_AS(parse_family("Entropy"), ParameterError);
  CHECK_THROWS_AS(MixedGeneratorSpec({Family::Entropy, 0.0, 1.0, 0.5}).validate(), ParameterError);
  CHECK_THROWS_AS(MixedGeneratorSpec({Family::Entropy, 1.5, 1.0, 0.5}).validate(), ParameterError);
  CHECK_THROWS_AS(MixedGeneratorSpec({Family::Entropy, 0.5, 0.0, 0.5}).validate(), ParameterError);
  CHECK_THROWS_AS(MixedGeneratorSpec({Family::Diversity, 0.5, 1.0, 1.0}).validate(), ParameterError);
  CHECK_NOTHROW(MixedGeneratorSpec({Family::Geometric, 1.0, 1.0, 7.0}).validate());
  CHECK_THROWS_AS(MovingAverageMixedFunctional({Family::Entropy, 0.5, -1.0, 0.5}, 3), ParameterError);
  CHECK_THROWS_AS(mixed_generating_function({Family::Diversity, 0.5, 1.0, 0.0}, 3), ParameterError);
}
