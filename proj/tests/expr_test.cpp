#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "chronoscale/expr.hpp"
#include "generators.hpp"

using chronoscale::diff;
using chronoscale::ErrorCode;
using chronoscale::Expr;
using chronoscale::Fn;
using chronoscale::Op;
using chronoscale::parse_expr;
using chronoscale::SyntaxError;

using gen::random_tree;
using gen::try_eval;

TEST(Parse, Examples) {
  EXPECT_EQ(parse_expr("x^2+3*x").eval(2), 10.0);
  EXPECT_EQ(parse_expr("2*x+1").eval(3), 7.0);
  EXPECT_EQ(parse_expr("1").eval(123), 1.0);
  EXPECT_EQ(parse_expr("exp(x)").eval(0), 1.0);
}

TEST(Parse, SyntaxErrorOffsetAndExpected) {
  try {
    parse_expr("x^^2");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.offset(), 2u);
    EXPECT_EQ(e.code(), ErrorCode::kSyntax);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Parse, ErrorPositions) {
  const std::pair<const char*, std::size_t> cases[] = {
      {"", 0}, {"(x", 2}, {"x+", 2}, {"foo(x)", 0}, {"sin x", 4}, {"2x", 1}, {"1e", 2}, {"x)", 1}};
  for (auto [text, offset] : cases) {
    try {
      parse_expr(text);
      ADD_FAILURE() << text;
    } catch (const SyntaxError& e) {
      EXPECT_EQ(e.offset(), offset) << text;
    }
  }
}

TEST(Parse, Precedence) {
  EXPECT_EQ(parse_expr("2^3^2").eval(0), 512.0);   // right associative
  EXPECT_EQ(parse_expr("-2^2").eval(0), -4.0);     // ^ binds tighter than unary minus
  EXPECT_EQ(parse_expr("8/4/2").eval(0), 1.0);     // left associative
  EXPECT_EQ(parse_expr("1-2-3").eval(0), -4.0);
  EXPECT_EQ(parse_expr("2*3+4*5").eval(0), 26.0);
  EXPECT_EQ(parse_expr("2^-1").eval(0), 0.5);
  EXPECT_EQ(parse_expr(" ( x + 1 ) * 2 ").eval(1), 4.0);
  EXPECT_EQ(parse_expr("1.5e1").eval(0), 15.0);
}

TEST(Eval, DomainErrors) {
  const std::pair<const char*, double> cases[] = {
      {"1/x", 0.0}, {"ln(x)", 0.0}, {"sqrt(x-1)", 0.0}, {"x^0.5", -1.0}, {"x^-1", 0.0}};
  for (const auto& [text, x] : cases) {
    try {
      parse_expr(text).eval(x);
      ADD_FAILURE() << text;
    } catch (const chronoscale::Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kEvalDomain) << text;
    }
  }
}

TEST(Print, RoundTripProperty) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const Expr e = random_tree(rng, 1 + trial % 6, false);
    const std::string text = e.to_string();
    EXPECT_EQ(parse_expr(text), e) << text;
    EXPECT_EQ(parse_expr(text).to_string(), text);
  }
}

TEST(Print, NegativeConstantsAndNesting) {
  for (const char* text : {"x^-3", "-x^2", "(-x)^2", "2-(3-x)", "2/(3/x)", "(x^2)^3", "-(x+1)",
                           "x*-2", "sin(-x)", "2^x^2"}) {
    const Expr e = parse_expr(text);
    EXPECT_EQ(parse_expr(e.to_string()), e) << text << " -> " << e.to_string();
  }
}

TEST(Parse, FuzzTotality) {
  // Every input parses or yields a positioned syntax error; nothing else.
  static constexpr char kAlphabet[] = "x0123456789.+-*/^() eE\tsincoexplnabsqrt,;#";
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(0, 40);
  std::uniform_int_distribution<std::size_t> ch(0, sizeof(kAlphabet) - 2);
  std::size_t parsed = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) s.push_back(kAlphabet[ch(rng)]);
    try {
      const Expr e = parse_expr(s);
      ++parsed;
      EXPECT_EQ(parse_expr(e.to_string()), e) << s;
    } catch (const SyntaxError& err) {
      EXPECT_LE(err.offset(), s.size()) << s;
    }
  }
  EXPECT_GT(parsed, 0u);
}

TEST(Parse, DeepNestingIsRejectedNotCrashed) {
  const std::string deep = std::string(5000, '(') + "x" + std::string(5000, ')');
  EXPECT_THROW(parse_expr(deep), SyntaxError);
  EXPECT_THROW(parse_expr(std::string(5000, '-') + "x"), SyntaxError);
  EXPECT_EQ(parse_expr(std::string(100, '(') + "x" + std::string(100, ')')).op(), Op::kVar);
}

TEST(Diff, Examples) {
  const Expr d = diff(parse_expr("x^2"));
  for (int i = 0; i < 20; ++i) {
    const double x = -3.0 + 0.3 * i;
    EXPECT_NEAR(d.eval(x), 2 * x, 1e-15);
  }
  EXPECT_TRUE(diff(parse_expr("7")).is_constant(0.0));
  const Expr e2 = diff(parse_expr("exp(2*x)"));
  for (double x : {-1.0, 0.0, 0.3, 1.7}) EXPECT_NEAR(e2.eval(x), 2 * std::exp(2 * x), 1e-9 * std::exp(2 * x));
  EXPECT_EQ(diff(parse_expr("x^2+3*x")).to_string(), "2*x+3");
}

TEST(Diff, AbsIsRejected) {
  try {
    diff(parse_expr("abs(x)+1"));
    FAIL();
  } catch (const chronoscale::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotDifferentiable);
  }
}

TEST(Diff, MatchesCentralDifferencesOnRandomTrees) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> point(-2.0, 2.0);
  int trees = 0;
  while (trees < 100) {
    const Expr e = random_tree(rng, 2 + trees % 4, true);
    const Expr d = diff(e);
    int checked = 0;
    for (int attempt = 0; attempt < 400 && checked < 10; ++attempt) {
      const double x = point(rng);
      const auto dv = try_eval(d, x);
      const auto ref = gen::derivative_reference(e, x);
      if (!dv || !ref) continue;
      ++checked;
      EXPECT_NEAR(*dv, *ref, 1e-6 * std::max(1.0, std::abs(*dv))) << e.to_string() << " at " << x;
    }
    if (checked == 10) ++trees;
  }
}
