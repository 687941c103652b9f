#include <gtest/gtest.h>

#include "conexp/config.hpp"

using namespace conexp;
using namespace conexp::config;

namespace {

std::string error_path(const std::string& toml, Command cmd) {
    try {
        parse_run_config(parse_toml(toml), cmd);
    } catch (const ConfigError& e) {
        return e.path;
    }
    return "<accepted>";
}

const char* kProblem = R"(
[problem]
beta = "2/3"
lambda = 1
order = 7
[problem.h]
taylor = [{ p = 1, q = 0, re = 0.1 }]
)";

}  // namespace

TEST(Config, TomlAndJsonAgree) {
    const json t = parse_toml(kProblem);
    const json j = json::parse(R"({"problem": {"beta": "2/3", "lambda": 1, "order": 7,
                                   "h": {"taylor": [{"p": 1, "q": 0, "re": 0.1}]}}})");
    EXPECT_EQ(t, j);
}

TEST(Config, ProblemBuildsInBothModes) {
    const auto rc = parse_run_config(parse_toml(kProblem), Command::Expand);
    ASSERT_TRUE(rc.problem);
    EXPECT_EQ(rc.problem->beta, Beta(2, 3));
    EXPECT_EQ(rc.problem->order, Order::at(7));
    const auto p = build_problem<double>(*rc.problem);
    EXPECT_DOUBLE_EQ(p.lambda, 1.0);
    // h = 0.1 Re z1 = 0.1 (beta rho)^{1/beta} cos theta.
    EXPECT_NEAR(to_float(p.h).evaluate_real(0.3, 0.4), 0.1 * std::pow(2.0 / 3 * 0.3, 1.5) * std::cos(0.4), 1e-15);
    // 0.1 is not exact, so exact mode refuses it.
    EXPECT_EQ(error_path(std::string(kProblem) + "", Command::Expand), "<accepted>");
    std::string exact = kProblem;
    exact.replace(exact.find("lambda = 1"), 10, "lambda = 1\nmode = \"exact\"");
    EXPECT_EQ(error_path(exact, Command::Expand), "problem.h.taylor[0].re");
    exact.replace(exact.find("re = 0.1"), 8, "re = \"1/10\"");
    const auto ex = parse_run_config(parse_toml(exact), Command::Expand);
    const auto pe = build_problem<RationalFunction>(*ex.problem);
    EXPECT_EQ(pe.lambda, RationalFunction(1));
}

TEST(Config, FieldPathDiagnostics) {
    EXPECT_EQ(error_path("[problem]\nbeta = \"3/2\"\nlambda = 0\n", Command::Expand), "problem.beta");
    EXPECT_EQ(error_path("[problem]\nbeta = \"2/3\"\n", Command::Expand), "problem.lambda");
    EXPECT_EQ(error_path("[problem]\nbeta = \"2/3\"\nlambda = 0\nlamda = 1\n", Command::Expand), "problem.lamda");
    EXPECT_EQ(error_path("[problem]\nbeta = \"2/3\"\nlambda = 0\n[[problem.harmonic]]\nl = 0\nparity = \"sin\"\ncoeff = 1\n",
                         Command::Expand),
              "problem.harmonic[0].parity");
    EXPECT_EQ(error_path("[problem]\nbeta = \"2/3\"\nlambda = 0\norder = { a = 0 }\n", Command::Expand), "problem.order");
    EXPECT_EQ(error_path(std::string(kProblem), Command::Solve), "grid");
    EXPECT_EQ(error_path(std::string(kProblem) + "[grid]\nn_rho = 64\nrho_min = 1e-4\nrho_max = 0.5\n", Command::Solve),
              "grid.n_theta");
    EXPECT_EQ(error_path(std::string(kProblem) + "[grid]\nn_rho = 64\nn_theta = 8\nrho_min = 1e-4\nrho_max = 0.7\n",
                         Command::Solve),
              "grid.rho_max");
    EXPECT_EQ(error_path(std::string(kProblem) + "[solver]\ntheta_scheme = \"fft\"\n", Command::Solve), "solver.theta_scheme");
    EXPECT_EQ(error_path("[verify]\nlevels = 0\n", Command::Check), "verify.levels");
    EXPECT_EQ(error_path("[check]\nbetas = -1\n", Command::Check), "check.betas");
    EXPECT_EQ(error_path("", Command::Expand), "problem");
    EXPECT_EQ(error_path("[extra]\n", Command::Check), "extra");
    EXPECT_EQ(error_path("", Command::Transform), "transform");
    EXPECT_EQ(error_path("[transform]\nbeta = \"1/2\"\nbase = { rho = 0.2, theta = 0, xi = [1.0] }\n", Command::Transform),
              "transform.base.xi");
}

TEST(Config, MalformedToml) {
    EXPECT_THROW(parse_toml("[problem\nbeta = 1"), ConfigError);
    EXPECT_THROW(parse_document("{", "x.json"), ConfigError);
}

TEST(Config, GridAndSolverFlowIntoVerifyOptions) {
    const auto rc = parse_run_config(
        parse_toml(std::string(kProblem) +
                   "[grid]\nn_rho = 200\nn_theta = 12\nrho_min = 1e-5\nrho_max = 0.5\n[solver]\nnewton_tol = 1e-9\n"
                   "[verify]\ninject_odd = true\nwindow_lo = 1e-3\ncompared_modes = [0]\n"),
        Command::Verify);
    EXPECT_EQ(rc.verify.n_rho, 200);
    EXPECT_EQ(rc.verify.n_theta, 12);
    EXPECT_DOUBLE_EQ(rc.verify.rho_min, 1e-5);
    EXPECT_DOUBLE_EQ(rc.verify.solver.newton_tol, 1e-9);
    EXPECT_TRUE(rc.verify.inject_odd);
    EXPECT_EQ(rc.verify.window_lo, 1e-3);
    EXPECT_EQ(rc.verify.compared_modes, std::vector<int>{0});
    EXPECT_EQ(rc.verify.q, Order::at(7));
}

TEST(Config, SerializedExpansionForH) {
    const json doc = json::parse(R"({"problem": {"beta": "1/2", "lambda": 0, "order": 4,
        "h": {"expansion": {"beta": "1/2", "terms": [{"a": 2, "k": 0, "coeff": 0.5}]}}}})");
    const auto rc = parse_run_config(doc, Command::Expand);
    const auto p = build_problem<double>(*rc.problem);
    EXPECT_DOUBLE_EQ(p.h.coefficient(TermIndex{2, 0, 0, 0, Parity::Cos}), 0.5);
    const json bad = json::parse(R"({"problem": {"beta": "1/2", "lambda": 0,
        "h": {"expansion": {"beta": "1/3", "terms": []}}}})");
    EXPECT_THROW(build_problem<double>(*parse_run_config(bad, Command::Expand).problem), ConfigError);
}
