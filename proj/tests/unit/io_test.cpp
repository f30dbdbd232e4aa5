#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "support.hpp"
#include "twqp/bigm.hpp"
#include "twqp/error.hpp"
#include "twqp/io.hpp"
#include "twqp/oracle.hpp"
#include "twqp/solver.hpp"

using namespace twqp;

namespace {

// Evaluates the objective section of an LP file at the given variable values.
double evaluate_lp_objective(const std::string& lp, const std::map<std::string, double>& values) {
  const auto start = lp.find("obj:");
  const auto stop = lp.find("Subject To");
  std::istringstream in(lp.substr(start + 4, stop - start - 4));
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  double linear = 0.0, quad = 0.0;
  bool in_quad = false;
  double sign = 1.0;
  for (std::size_t k = 0; k < tok.size(); ++k) {
    const std::string& t = tok[k];
    if (t == "+") { sign = 1.0; continue; }
    if (t == "-") { sign = -1.0; continue; }
    if (t == "[") { in_quad = true; sign = 1.0; continue; }
    if (t == "]") { in_quad = false; ++k; ++k; continue; }  // skips "/ 2"
    const double coef = sign * std::stod(t);
    sign = 1.0;
    if (k + 1 >= tok.size() || tok[k + 1] == "+" || tok[k + 1] == "-" || tok[k + 1] == "[" ||
        tok[k + 1] == "]") {
      linear += coef;
      continue;
    }
    const double a = values.at(tok[++k]);
    if (in_quad) {
      if (k + 1 < tok.size() && tok[k + 1] == "^2") {
        ++k;
        quad += coef * a * a;
      } else {
        k += 2;  // "*" and the second variable
        quad += coef * a * values.at(tok[k]);
      }
    } else {
      linear += coef * a;
    }
  }
  return linear + quad / 2.0;
}

}  // namespace

TEST(InstanceJson, RoundTrip) {
  auto inst = twqp::testing::random_banded(9, 2, 3, twqp::testing::LambdaRegime::mixed_sign);
  auto back = instance_from_json(instance_to_json(inst));
  EXPECT_TRUE(back.q.to_dense().isApprox(inst.q.to_dense(), 0.0));
  EXPECT_EQ(back.c, inst.c);
  EXPECT_EQ(back.lambda, inst.lambda);
  EXPECT_EQ(back.indicator, inst.indicator);
  EXPECT_EQ(back.offset, inst.offset);
}

TEST(InstanceJson, OneBasedIndicesAndScalarLambda) {
  auto j = Json::parse(R"({"n": 2, "q": [[1,1,2],[2,2,3],[1,2,0.5]], "c": [1,-1], "lambda": 0.7})");
  auto inst = instance_from_json(j);
  EXPECT_DOUBLE_EQ(inst.q(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(inst.q(1, 1), 3.0);
  EXPECT_EQ(inst.lambda, (std::vector<double>{0.7, 0.7}));
  EXPECT_EQ(inst.indicator_count(), 2);
}

TEST(InstanceJson, IndicatorAsIntegers) {
  auto j = Json::parse(R"({"n": 2, "q": [[1,1,1],[2,2,1]], "c": [0,0], "lambda": [1,1], "indicator": [1, 0]})");
  auto inst = instance_from_json(j);
  EXPECT_TRUE(inst.indicator[0]);
  EXPECT_FALSE(inst.indicator[1]);
}

TEST(InstanceJson, ErrorsAreInputErrors) {
  const char* bad[] = {
      R"({"q": [[1,1,1]], "c": [0], "lambda": [1]})",
      R"({"n": 1, "q": [[0,0,1]], "c": [0], "lambda": [1]})",
      R"({"n": 1, "q": [[1,2,1]], "c": [0], "lambda": [1]})",
      R"({"n": 2, "q": [[1,1,1],[2,2,1]], "c": [0], "lambda": [1,1]})",
      R"({"n": 1, "q": [[1,1,1]], "c": ["x"], "lambda": [1]})",
      R"({"n": 1, "q": [[1,1]], "c": [0], "lambda": [1]})",
      R"({"n": 0, "q": [], "c": [], "lambda": []})",
  };
  for (const char* text : bad) EXPECT_THROW(instance_from_json(Json::parse(text)), InputError) << text;
  std::istringstream broken("{\"n\": ");
  EXPECT_THROW(parse_json(broken, "instance"), InputError);
}

TEST(InstanceJson, AsymmetryDetected) {
  auto j = Json::parse(R"({"n": 2, "q": [[1,1,1],[2,2,1],[1,2,0.1],[2,1,0.2]], "c": [0,0], "lambda": [1,1]})");
  EXPECT_THROW(instance_from_json(j), AsymmetricInput);
}

TEST(DecompositionJson, RoundTripWithRoot) {
  TreeDecomposition t{{{0, 1}, {1, 2}, {2, 3}}, {1, 2, -1}};
  auto j = decomposition_to_json(t);
  EXPECT_EQ(j["bags"][0], Json::array({1, 2}));
  EXPECT_EQ(j["child"][2], 0);
  auto back = decomposition_from_json(j);
  EXPECT_EQ(back.bags, t.bags);
  EXPECT_EQ(back.child, t.child);
}

TEST(DecompositionJson, RejectsBadShapes) {
  EXPECT_THROW(decomposition_from_json(Json::parse(R"({"bags": [[1]], "child": [0, 0]})")), InputError);
  EXPECT_THROW(decomposition_from_json(Json::parse(R"({"bags": [[1, 1]], "child": [0]})")), InputError);
  EXPECT_THROW(decomposition_from_json(Json::parse(R"({"bags": [[1]], "child": [2]})")), InputError);
}

TEST(SolutionJson, ContainsOneBasedPattern) {
  auto sol = solve_instance(twqp::testing::dense_instance(Eigen::MatrixXd::Identity(1, 1), {-2}, {0.5}));
  auto j = solution_to_json(sol);
  EXPECT_DOUBLE_EQ(j["objective"].get<double>(), -1.5);
  EXPECT_EQ(j["z"], Json::array({1}));
  EXPECT_TRUE(j.contains("stats"));
}

TEST(PwqJson, ListsPieces) {
  PiecewiseQuad f(QuadPiece{{0, 2}, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2), 3});
  auto j = pwq_to_json(f);
  EXPECT_EQ(j["coords"], Json::array({1, 3}));
  EXPECT_EQ(j["pieces"].size(), 1u);
  EXPECT_DOUBLE_EQ(j["pieces"][0]["d"].get<double>(), 3.0);
}

TEST(BigM, SingleVariableLayout) {
  std::ostringstream out;
  export_bigm_lp(out, twqp::testing::dense_instance(Eigen::MatrixXd::Identity(1, 1), {-2}, {0.5}), 4.0);
  const std::string lp = out.str();
  EXPECT_NE(lp.find(" ub1: x1 - 4 z1 <= 0"), std::string::npos);
  EXPECT_NE(lp.find(" lb1: x1 + 4 z1 >= 0"), std::string::npos);
  EXPECT_NE(lp.find("Binaries\n z1\n"), std::string::npos);
  EXPECT_NE(lp.find("x1 free"), std::string::npos);
}

TEST(BigM, FreeVariablesGetNoBinary) {
  auto inst = twqp::testing::dense_instance(Eigen::MatrixXd::Identity(2, 2), {1, 1}, {1, 1});
  inst.indicator[1] = false;
  std::ostringstream out;
  export_bigm_lp(out, inst, 1.0);
  EXPECT_EQ(out.str().find("z2"), std::string::npos);
  EXPECT_THROW(export_bigm_lp(out, inst, 0.0), InputError);
}

TEST(BigM, ObjectiveTextEvaluatesLikeInstance) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto inst = twqp::testing::random_banded(7, 2, seed, twqp::testing::LambdaRegime::typical);
    std::ostringstream out;
    export_bigm_lp(out, inst, 100.0);
    auto sol = brute_force(inst);
    std::map<std::string, double> values;
    for (int i = 0; i < 7; ++i) {
      values["x" + std::to_string(i + 1)] = sol.x[static_cast<std::size_t>(i)];
      values["z" + std::to_string(i + 1)] = sol.z[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    EXPECT_NEAR(evaluate_lp_objective(out.str(), values), sol.objective, 1e-9 * (1 + std::abs(sol.objective)));
  }
}
