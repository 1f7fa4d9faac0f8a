#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wcp/timefn.hpp"
#include "wcp/types.hpp"

using namespace wcp;

TEST(TimeFunction, EvaluatesAllTerms) {
  TimeFunction f;
  f.c = 1.0;
  f.sin_a = 0.5;
  f.sin_w = 2.0;
  f.cos_a = -0.25;
  f.cos_w = 3.0;
  f.exp_a = 2.0;
  f.exp_r = 0.5;
  const double t = 0.7;
  EXPECT_DOUBLE_EQ(f(t), 1.0 + 0.5 * std::sin(1.4) - 0.25 * std::cos(2.1) + 2.0 * std::exp(-0.35));
  EXPECT_FALSE(f.is_constant());
  EXPECT_TRUE(TimeFunction::constant(3.0).is_constant());
  EXPECT_TRUE(TimeFunction::constant(0.0).is_zero());
  EXPECT_FALSE(TimeFunction::constant(1e-300).is_zero());
}

TEST(TimeFunction, ExponentialWithZeroRateIsConstant) {
  TimeFunction f;
  f.c = 1.0;
  f.exp_a = -1.0;
  f.exp_r = 0.0;
  EXPECT_TRUE(f.is_constant());
  EXPECT_TRUE(f.is_zero());
}

TEST(TimeFunction, EnclosureContainsEverySample) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    TimeFunction f;
    f.c = u(rng);
    f.sin_a = u(rng);
    f.sin_w = 5.0 * u(rng);
    f.cos_a = u(rng);
    f.cos_w = 5.0 * u(rng);
    f.exp_a = u(rng);
    f.exp_r = std::abs(u(rng));
    auto [lo, hi] = enclose(f, 0.0, 3.0, 33);
    for (int i = 0; i <= 3000; ++i) {
      double v = f(3.0 * i / 3000.0);
      EXPECT_LE(lo, v);
      EXPECT_GE(hi, v);
    }
  }
}

TEST(TimeFunction, SumEnclosureContainsWeightedSamples) {
  TimeFunction a, b;
  a.c = 1.0;
  a.cos_a = 0.5;
  b.sin_a = 2.0;
  b.sin_w = 3.0;
  auto [lo, hi] = enclose_sum({a, b}, {1.0, -0.5}, 0.0, 2.0, 17);
  for (int i = 0; i <= 2000; ++i) {
    double t = 2.0 * i / 2000.0;
    double v = a(t) - 0.5 * b(t);
    EXPECT_LE(lo, v);
    EXPECT_GE(hi, v);
  }
}

TEST(TimeFunction, JsonRoundTrip) {
  nlohmann::json j = {{"c", 1.0}, {"cos", {0.5, 1.0}}, {"exp", {0.25, 2.0}}};
  TimeFunction f = time_function_from_json(j);
  TimeFunction g = time_function_from_json(to_json(f));
  for (double t : {0.0, 0.3, 1.7}) EXPECT_DOUBLE_EQ(f(t), g(t));
  EXPECT_DOUBLE_EQ(time_function_from_json(2.5)(10.0), 2.5);
}

TEST(TimeFunction, RejectsUnknownTerms) {
  EXPECT_THROW(time_function_from_json(nlohmann::json{{"tan", {1.0, 1.0}}}), ConfigError);
  EXPECT_THROW(time_function_from_json(nlohmann::json{{"sin", 1.0}}), ConfigError);
  EXPECT_THROW(time_function_from_json(nlohmann::json("x")), ConfigError);
}

TEST(Rational, ArithmeticIsExact) {
  Rational half = Rational::from_json("1/2");
  Rational third = Rational::from_double(1.0 / 3.0);
  EXPECT_EQ(third.num, 1);
  EXPECT_EQ(third.den, 3);
  Rational s = half + third;
  EXPECT_EQ(s.num, 5);
  EXPECT_EQ(s.den, 6);
  EXPECT_TRUE((half - half == Rational{0, 1}));
  EXPECT_TRUE((half * 2 == Rational{1, 1}));
  EXPECT_TRUE(third < half);
  EXPECT_TRUE((Rational::from_json("-2/4") == Rational{-1, 2}));
  EXPECT_EQ(to_string(Rational::from_json(0.75)), "3/4");
}

TEST(Rational, RejectsMalformedInput) {
  EXPECT_THROW(Rational::from_json("a/b"), ConfigError);
  EXPECT_THROW(Rational::from_json("1/0"), ConfigError);
  EXPECT_THROW(Rational::from_double(std::sqrt(2.0)), ConfigError);
  EXPECT_THROW(Rational::from_json(nlohmann::json::array()), ConfigError);
}
