#include <gtest/gtest.h>

#include <random>

#include "trscat/expression.hpp"

using trscat::Expression;
using trscat::ParseError;

TEST(Expression, Fig1TextAtOrigin) {
  const auto e = Expression::parse("10+5*cos(4*pi*x)+5*tanh(x)*cos(2*pi*x)");
  EXPECT_DOUBLE_EQ(e(0.0), 15.0);
}

TEST(Expression, Harmonic) {
  EXPECT_DOUBLE_EQ(Expression::parse("1+x^2")(2.0), 5.0);
}

TEST(Expression, UnbalancedParenReportsOffset) {
  try {
    Expression::parse("cos(");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Expression, UnknownIdentifier) {
  try {
    Expression::parse("1 + foo(x)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
    EXPECT_NE(std::string(e.what()).find("foo"), std::string::npos);
  }
}

TEST(Expression, EmptyIsRejected) {
  EXPECT_THROW(Expression::parse("   "), ParseError);
  EXPECT_THROW(Expression::parse("1+"), ParseError);
  EXPECT_THROW(Expression::parse("2 3"), ParseError);
}

TEST(Expression, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(0.0), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("8-3-2")(0.0), 3.0);
  EXPECT_DOUBLE_EQ(Expression::parse("8/4/2")(0.0), 1.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-x^2")(3.0), -9.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2*-x")(3.0), -6.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1+2*3")(0.0), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("sqrt(abs(-16))+exp(0)+sin(0)")(0.0), 5.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1.5e1 + .5")(0.0), 15.5);
}

TEST(Expression, RoundTripOnGrid) {
  const char* sources[] = {
      "10+5*cos(4*pi*x)+5*tanh(x)*cos(2*pi*x)",
      "1+x^2",
      "-x^2/3 + 2^-x - exp(-abs(x))*sin(3*x)",
      "sqrt(1+x*x)/(2+cos(x))",
  };
  for (const char* s : sources) {
    const auto a = Expression::parse(s);
    const auto b = Expression::parse(a.to_string());
    EXPECT_EQ(b.to_string(), a.to_string());
    for (int i = 0; i < 1000; ++i) {
      const double x = -10.0 + 20.0 * i / 999.0;
      EXPECT_EQ(a(x), b(x)) << s << " at x=" << x;
    }
  }
}

TEST(Expression, RandomTreesRoundTrip) {
  std::mt19937 rng(7);
  const char* atoms[] = {"x", "pi", "2", "0.25", "3.5"};
  const char* ops[] = {"+", "-", "*", "/"};
  const char* funcs[] = {"cos", "sin", "tanh", "exp"};
  std::function<std::string(int)> gen = [&](int depth) -> std::string {
    if (depth == 0) return atoms[rng() % 5];
    switch (rng() % 3) {
      case 0: return gen(depth - 1) + ops[rng() % 4] + gen(depth - 1);
      case 1: return std::string(funcs[rng() % 4]) + "(" + gen(depth - 1) + ")";
      default: return "-(" + gen(depth - 1) + ")";
    }
  };
  for (int trial = 0; trial < 50; ++trial) {
    const std::string s = gen(4);
    const auto a = Expression::parse(s);
    const auto b = Expression::parse(a.to_string());
    for (int i = 0; i < 1000; ++i) {
      const double x = -3.0 + 6.0 * i / 999.0;
      const double va = a(x), vb = b(x);
      if (std::isnan(va)) EXPECT_TRUE(std::isnan(vb));
      else EXPECT_EQ(va, vb) << s;
    }
  }
}
