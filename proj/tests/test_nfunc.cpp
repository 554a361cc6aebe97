#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "plap/nfunc.hpp"
#include "plap/random.hpp"

using namespace plap;

namespace {

const std::vector<double> kExponents{1.2, 1.5, 2.0, 3.0, 4.5};

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double band_for(double p, std::uint64_t seed, int samples = 10000) {
  Rng rng(seed);
  std::uniform_int_distribution<int> dims(1, 3);
  const Exponent e(p);
  EquivalenceBand band;
  for (int k = 0; k < samples; ++k) {
    const int N = dims(rng), n = 2 + (dims(rng) > 2 ? 1 : 0);
    const Tensor P = random_tensor(rng, N, n), Q = random_tensor(rng, N, n);
    band.add(equivalence_ratios(e, P, Q).five());
  }
  return band.constant();
}

}  // namespace

TEST(Exponent, RejectsNonConjugable) {
  EXPECT_THROW(Exponent(1.0), std::invalid_argument);
  EXPECT_THROW(Exponent(0.5), std::invalid_argument);
  for (double p : kExponents) {
    const Exponent e(p);
    EXPECT_LE(std::abs(1.0 / e.p() + 1.0 / e.pprime() - 1.0), 1e-12);
  }
}

TEST(Tensor, NormVanishesOnlyAtZero) {
  Tensor z(2, 2);
  EXPECT_EQ(z.norm(), 0.0);
  EXPECT_TRUE(z.is_zero());
  Tensor t(2, 2, {0, 0, 1e-200, 0});
  EXPECT_GT(t.norm(), 0.0);
  Tensor big(1, 2, {3e200, 4e200});
  EXPECT_NEAR(big.norm() / 5e200, 1.0, 1e-15);
}

TEST(Phi, UnshiftedIsPower) {
  for (double p : kExponents)
    for (double t : {1e-3, 0.5, 1.0, 7.0, 1e3}) EXPECT_LE(rel(phi(ShiftedPower(p, 0.0), t), std::pow(t, p)), 1e-13);
}

TEST(Phi, HandValues) {
  EXPECT_DOUBLE_EQ(phi(ShiftedPower(3.0, 1.0), 2.0), 12.0);
  EXPECT_DOUBLE_EQ(phi_prime(ShiftedPower(3.0, 1.0), 2.0), 16.0);
  for (double p : kExponents) {
    EXPECT_EQ(phi(ShiftedPower(p, 0.7), 0.0), 0.0);
    EXPECT_EQ(phi(ShiftedPower(p, 0.0), 0.0), 0.0);
    EXPECT_EQ(phi_prime(ShiftedPower(p, 0.0), 0.0), 0.0);
    EXPECT_EQ(phi_prime(ShiftedPower(p, 2.0), 0.0), 0.0);
  }
  EXPECT_THROW(phi(ShiftedPower(2.0, 1.0), -1.0), std::domain_error);
}

TEST(Phi, DerivativeMatchesCentralDifference) {
  for (double p : kExponents)
    for (double a : {0.0, 0.3, 5.0})
      for (int k = 0; k <= 30; ++k) {
        const double t = std::pow(10.0, -3.0 + 6.0 * k / 30.0);
        const double h = 1e-6 * t;
        const ShiftedPower sp(p, a);
        const double fd = (phi(sp, t + h) - phi(sp, t - h)) / (2 * h);
        EXPECT_LE(rel(fd, phi_prime(sp, t)), 1e-6) << "p=" << p << " a=" << a << " t=" << t;
      }
}

TEST(Phi, MidpointConvexity) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (double p : kExponents)
    for (int k = 0; k < 1000; ++k) {
      const ShiftedPower sp(p, u(rng));
      const double t1 = u(rng), t2 = u(rng);
      const double scale = std::max(phi(sp, t1), phi(sp, t2)) + 1.0;
      EXPECT_LE(phi(sp, 0.5 * (t1 + t2)), 0.5 * (phi(sp, t1) + phi(sp, t2)) + 1e-12 * scale);
    }
}

TEST(FluxMaps, IdentityAtTwoAndOnUnitSphere) {
  Rng rng(3);
  const Exponent two(2.0);
  for (int k = 0; k < 100; ++k) {
    const Tensor P = random_tensor(rng, 2, 2, -2, 2);
    EXPECT_LE((a_map(two, P) - P).norm(), 1e-15 * P.norm());
    EXPECT_LE((v_map(two, P) - P).norm(), 1e-15 * P.norm());
    EXPECT_LE((a_inverse(two, P) - P).norm(), 1e-15 * P.norm());
    const Tensor U = P * (1.0 / P.norm());
    for (double p : kExponents) {
      EXPECT_LE((a_map(Exponent(p), U) - U).norm(), 1e-14);
      EXPECT_LE((v_map(Exponent(p), U) - U).norm(), 1e-14);
      EXPECT_LE((a_inverse(Exponent(p), U) - U).norm(), 1e-14);
    }
  }
}

TEST(FluxMaps, ZeroMapsToZero) {
  for (double p : kExponents) {
    EXPECT_TRUE(a_map(Exponent(p), Tensor(2, 2)).is_zero());
    EXPECT_TRUE(v_map(Exponent(p), Tensor(2, 2)).is_zero());
    EXPECT_TRUE(a_inverse(Exponent(p), Tensor(2, 2)).is_zero());
  }
}

TEST(FluxMaps, NormIdentitiesAndRoundTrip) {
  Rng rng(5);
  for (double p : kExponents) {
    const Exponent e(p);
    for (int k = 0; k < 500; ++k) {
      const Tensor P = random_tensor(rng, 3, 2, -4, 4);
      EXPECT_LE(rel(a_map(e, P).norm(), std::pow(P.norm(), p - 1.0)), 1e-12);
      EXPECT_LE(rel(v_map(e, P).squared_norm(), std::pow(P.norm(), p)), 1e-12);
      EXPECT_LE(rel(dot(a_map(e, P), P), v_map(e, P).squared_norm()), 1e-12);
      EXPECT_LE((a_map(e, a_inverse(e, P)) - P).norm(), 1e-10 * P.norm());
      EXPECT_LE((a_inverse(e, a_map(e, P)) - P).norm(), 1e-10 * P.norm());
    }
  }
}

TEST(FluxMaps, PositiveHomogeneity) {
  Rng rng(9);
  std::uniform_real_distribution<double> lam(0.01, 100.0);
  for (double p : kExponents) {
    const Exponent e(p);
    for (int k = 0; k < 200; ++k) {
      const Tensor P = random_tensor(rng, 2, 2, -3, 3);
      const double l = lam(rng);
      const Tensor a1 = a_map(e, P * l), a2 = a_map(e, P) * std::pow(l, p - 1.0);
      const Tensor v1 = v_map(e, P * l), v2 = v_map(e, P) * std::pow(l, p / 2.0);
      EXPECT_LE((a1 - a2).norm(), 1e-12 * a2.norm());
      EXPECT_LE((v1 - v2).norm(), 1e-12 * v2.norm());
    }
  }
}

TEST(Equivalence, DiagonalVanishes) {
  Rng rng(1);
  const Tensor P = random_tensor(rng, 2, 2, 0, 0);
  for (double p : kExponents)
    for (double v : equivalence_ratios(Exponent(p), P, P).five()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(equivalence_ratios(Exponent(2.0), Tensor(2, 2), Tensor(2, 2)), std::invalid_argument);
}

TEST(Equivalence, InnerProductIsSquaredDistanceAtTwo) {
  Rng rng(2);
  for (int k = 0; k < 1000; ++k) {
    const Tensor P = random_tensor(rng, 2, 2, -2, 2), Q = random_tensor(rng, 2, 2, -2, 2);
    const auto s = equivalence_ratios(Exponent(2.0), P, Q);
    EXPECT_LE(rel(s.inner, (P - Q).squared_norm()), 1e-12);
  }
}

TEST(Equivalence, FiveExpressionBandIsFiniteAndSeedStable) {
  for (double p : kExponents) {
    const double c1 = band_for(p, 100), c2 = band_for(p, 200);
    EXPECT_TRUE(std::isfinite(c1)) << p;
    EXPECT_TRUE(std::isfinite(c2)) << p;
    EXPECT_LT(std::max(c1, c2) / std::min(c1, c2), 2.0) << p;
  }
}

TEST(Equivalence, FluxDifferenceBand) {
  for (double p : kExponents) {
    double c[2];
    for (int s = 0; s < 2; ++s) {
      Rng rng(300 + s);
      EquivalenceBand band;
      const Exponent e(p);
      for (int k = 0; k < 10000; ++k) {
        const Tensor P = random_tensor(rng, 2, 2), Q = random_tensor(rng, 2, 2);
        const auto x = equivalence_ratios(e, P, Q);
        band.add_ratio(x.a_diff, std::pow(P.norm() + Q.norm(), p - 2.0) * (P - Q).norm());
      }
      c[s] = band.constant();
      EXPECT_TRUE(std::isfinite(c[s]));
    }
    EXPECT_LT(std::max(c[0], c[1]) / std::min(c[0], c[1]), 2.0) << p;
  }
}

TEST(YoungBound, ZeroArgumentsNeedNoConstant) {
  EXPECT_EQ(young_bound_check(Exponent(3.0), 1.0, 0.1, 0.0, 5.0).required_constant(), 0.0);
  EXPECT_EQ(young_bound_check(Exponent(3.0), 1.0, 0.1, 5.0, 0.0).required_constant(), 0.0);
}

TEST(YoungBound, ClassicalConstantAtTwo) {
  // ts <= delta t^2 + s^2 / (4 delta), attained at t = s / (2 delta)
  for (double delta : {0.1, 0.5, 2.0}) {
    Rng rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double c = 0.0;
    for (int k = 0; k < 20000; ++k) {
      const double s = std::pow(10.0, u(rng));
      const double t = s / (2 * delta) * (1.0 + 0.01 * u(rng));
      c = std::max(c, young_bound_check(Exponent(2.0), 0.0, delta, t, s).required_constant());
    }
    EXPECT_NEAR(c, 1.0 / (4 * delta), 1e-3 / delta);
    EXPECT_LE(c, 1.0 / (4 * delta) * (1 + 1e-12));
  }
}

TEST(YoungBound, FittedConstantSeedStable) {
  for (double p : {1.5, 3.0}) {
    double c[2];
    for (int s = 0; s < 2; ++s) {
      Rng rng(40 + s);
      std::uniform_real_distribution<double> u(-3.0, 3.0);
      c[s] = 0.0;
      for (int k = 0; k < 20000; ++k) {
        const double a = std::pow(10.0, u(rng)), t = std::pow(10.0, u(rng)), x = std::pow(10.0, u(rng));
        c[s] = std::max(c[s], young_bound_check(Exponent(p), a, 0.25, t, x).required_constant());
      }
      EXPECT_TRUE(std::isfinite(c[s]));
    }
    EXPECT_LE(std::abs(c[0] - c[1]) / std::max(c[0], c[1]), 0.5) << p;
  }
}

TEST(ShiftChange, SameShiftAndZero) {
  Rng rng(8);
  for (double p : {1.5, 3.0}) {
    const Tensor P = random_tensor(rng, 2, 2, 0, 0);
    const auto s = shift_change_check(Exponent(p), P, P, 0.7, 1.0);
    EXPECT_DOUBLE_EQ(s.lhs, s.shifted_term);
    EXPECT_LE(s.required_constant(), 1.0);
    EXPECT_EQ(shift_change_check(Exponent(p), P, random_tensor(rng, 2, 2), 0.0, 0.5).lhs, 0.0);
  }
}

TEST(ShiftChange, FittedConstantSeedStable) {
  for (double p : {1.5, 3.0}) {
    double c[2];
    for (int s = 0; s < 2; ++s) {
      Rng rng(60 + s);
      std::uniform_real_distribution<double> u(-3.0, 3.0), g(0.05, 1.0);
      c[s] = 0.0;
      const Exponent e(p);
      for (int k = 0; k < 20000; ++k) {
        const Tensor P = random_tensor(rng, 2, 2, -3, 3), Q = random_tensor(rng, 2, 2, -3, 3);
        const double scale = std::pow(std::max(P.norm(), Q.norm()), p - 1.0);
        const double t = scale * std::pow(10.0, u(rng) / 3.0);
        c[s] = std::max(c[s], shift_change_check(e, P, Q, t, g(rng)).required_constant());
      }
      EXPECT_TRUE(std::isfinite(c[s]));
    }
    EXPECT_LT(std::max(c[0], c[1]) / std::min(c[0], c[1]), 2.0) << p;
  }
}
