#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "outcomes/cli.hpp"
#include "outcomes/io.hpp"

using namespace outcomes;
using json = nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
  json report() const { return json::parse(out); }
};

Outcome run_cli(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("outcomes_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const json& j) const {
    std::ofstream(path(name)) << j.dump();
    return path(name);
  }

  std::string catalog_file(const std::string& name, std::vector<std::string> args) const {
    args.insert(args.begin(), "catalog");
    args.push_back("--out");
    args.push_back(path(name));
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  std::filesystem::path dir_;
};

} // namespace

TEST_F(CliTest, RobustnessOfTrine) {
  const auto trine = catalog_file("trine.json", {"--kind", "trine"});
  const auto r = run_cli({"robustness", "--povm", trine, "--n", "2", "--dual-dump", path("dual.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = r.report();
  EXPECT_EQ(rep["command"], "robustness");
  EXPECT_EQ(rep["version"], OUTCOMES_VERSION);
  EXPECT_EQ(rep["inputs_digest"].get<std::string>().size(), 16u);
  const auto& res = rep["result"];
  EXPECT_GT(res["robustness"].get<double>(), 0.07);
  EXPECT_LE(res["gap"].get<double>(), 1e-6);
  EXPECT_EQ(res["tol"].get<double>(), 1e-8);
  EXPECT_EQ(res["bound"]["num"], 3);
  EXPECT_EQ(res["bound"]["den"], 2);
  EXPECT_NEAR(res["witness_advantage_ratio"].get<double>(), res["primal_value"].get<double>(), 1e-6);
  EXPECT_EQ(res["combinations"], json::parse("[[0,1],[0,2],[1,2]]"));
  std::ifstream dump_file(path("dual.json"));
  const auto dump = json::parse(dump_file);
  EXPECT_EQ(dump["witness_effects"].size(), 3u);
  EXPECT_EQ(dump["standard_form"]["sense"], "minimize");
}

TEST_F(CliTest, DiscriminateQutritBasis) {
  const auto e = catalog_file("e.json", {"--kind", "uniform-orthogonal-ensemble", "--d", "3"});
  const auto m = catalog_file("m.json", {"--kind", "projective-basis", "--d", "3"});
  const auto r = run_cli({"discriminate", "--ensemble", e, "--povm", m, "--n", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = r.report()["result"];
  EXPECT_NEAR(res["p_guess"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(res["optimal_free"].get<double>(), 2.0 / 3.0, 1e-8);
  EXPECT_NEAR(res["advantage_ratio"].get<double>(), 1.5, 1e-6);
  EXPECT_EQ(res["best_combination"], json::parse("[0,1]"));
}

TEST_F(CliTest, CertifyThresholds) {
  const auto e = catalog_file("e.json", {"--kind", "uniform-orthogonal-ensemble", "--d", "3"});
  const auto r = run_cli({"certify", "--ensemble", e, "--observed", "0.70"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = r.report()["result"];
  EXPECT_EQ(res["certified_min_outcomes"], 3);
  ASSERT_EQ(res["thresholds"].size(), 3u);
  EXPECT_NEAR(res["thresholds"][1]["max_simulable_p_guess"].get<double>(), 2.0 / 3.0, 1e-8);
  EXPECT_TRUE(res["thresholds"][1]["excluded"].get<bool>());
  EXPECT_FALSE(res["thresholds"][2]["excluded"].get<bool>());
  EXPECT_EQ(run_cli({"certify", "--ensemble", e, "--observed", "0.60"}).report()["result"]["certified_min_outcomes"], 2);
}

TEST_F(CliTest, CatalogEmitsValidPovm) {
  const auto r = run_cli({"catalog", "--kind", "projective-basis", "--d", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = r.report()["result"];
  EXPECT_EQ(res["type"], "povm");
  EXPECT_EQ(res["rng"], catalog::kRngName);
  const auto p = io::povm_from_json(res["instance"]);
  EXPECT_EQ(p.outcomes(), 3);
  EXPECT_EQ(p.dim(), 3);
}

TEST_F(CliTest, CatalogReportFeedsConsumersDirectly) {
  const auto rep = run_cli({"catalog", "--kind", "trine"});
  ASSERT_EQ(rep.code, 0);
  const auto file = path("report.json");
  std::ofstream(file) << rep.out;
  const auto r = run_cli({"effective-outcomes", "--povm", file});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report()["result"]["effective_outcomes"], 3);
  // The same report piped through stdin.
  const auto piped = run_cli({"robustness", "--povm", "-", "--n", "2"}, rep.out);
  ASSERT_EQ(piped.code, 0) << piped.err;
  EXPECT_GT(piped.report()["result"]["robustness"].get<double>(), 0.07);
}

TEST_F(CliTest, ReportsAreByteStable) {
  const auto e = catalog_file("e.json", {"--kind", "random-ensemble", "--d", "2", "--m", "3", "--seed", "5"});
  const auto m = catalog_file("m.json", {"--kind", "random-povm", "--d", "2", "--m", "3", "--seed", "6"});
  const auto a = run_cli({"discriminate", "--ensemble", e, "--povm", m, "--n", "2"});
  const auto b = run_cli({"discriminate", "--ensemble", e, "--povm", m, "--n", "2"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto c = run_cli({"discriminate", "--ensemble", e, "--povm", m, "--n", "1"});
  EXPECT_NE(a.report()["inputs_digest"], c.report()["inputs_digest"]);
}

TEST_F(CliTest, SeesawIsSeeded) {
  const std::vector<std::string> args{"seesaw", "--d", "2", "--m", "3", "--n", "2", "--restarts", "2", "--seed", "9", "--csv", path("t.csv")};
  const auto a = run_cli(args), b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto res = a.report()["result"];
  EXPECT_GT(res["final_ratio"].get<double>(), 1.0);
  EXPECT_FALSE(res["saturation_guaranteed"].get<bool>());
  std::ifstream csv(path("t.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "iteration,ratio");
}

TEST_F(CliTest, ScoreWithFreeSamples) {
  json coeffs = io::to_json(ScoreCoefficients::discrimination(3));
  const auto c = write("c.json", coeffs);
  const auto a = write("a.json", io::to_json(MeasurementAssemblage({catalog::trine()})));
  const auto f = write("f.json", io::to_json(MeasurementAssemblage({catalog::projective_basis(2, 3)})));
  const auto e = write("e.json", io::to_json(Ensemble::normalized(catalog::trine().effects())));
  const auto r = run_cli({"score", "--coeffs", c, "--assemblage", a, "--preps", e, "--free", f});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = r.report()["result"];
  EXPECT_TRUE(res["bijective"].get<bool>());
  EXPECT_NEAR(res["score"].get<double>(), res["pairing"].get<double>(), 1e-10);
  EXPECT_GT(res["advantage"]["ratio"].get<double>(), 1.0);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"catalog", "--kind", "trine", "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run_cli({"--version"}).code, cli::kExitOk);

  const auto trine = catalog_file("trine.json", {"--kind", "trine"});
  EXPECT_EQ(run_cli({"robustness", "--povm", trine, "--n", "4"}).code, cli::kExitInput);
  EXPECT_EQ(run_cli({"robustness", "--povm", trine, "--n", "two"}).code, cli::kExitInput);
  EXPECT_EQ(run_cli({"robustness", "--povm", path("missing.json"), "--n", "2"}).code, cli::kExitInput);
  EXPECT_EQ(run_cli({"catalog", "--kind", "pentagon"}).code, cli::kExitInput);
  EXPECT_EQ(run_cli({"--tol", "-1", "catalog", "--kind", "trine"}).code, cli::kExitInput);

  std::ofstream(path("bad.json")) << R"({"dim": 2, "effects": [{"dim": 2, "re": [[1, 0], [0, 0]]}]})";
  const auto bad = run_cli({"robustness", "--povm", path("bad.json"), "--n", "1"});
  EXPECT_EQ(bad.code, cli::kExitInput);
  EXPECT_FALSE(bad.err.empty());
  std::ofstream(path("garbage.json")) << "{not json";
  EXPECT_EQ(run_cli({"robustness", "--povm", path("garbage.json"), "--n", "1"}).code, cli::kExitInput);

  // An unreachable accuracy makes the solver give up.
  const auto hard = run_cli({"--tol", "1e-30", "robustness", "--povm", trine, "--n", "2"});
  EXPECT_EQ(hard.code, cli::kExitSolver);
  EXPECT_NE(hard.err.find("solver failure"), std::string::npos);
}

TEST_F(CliTest, StdinUsableOnce) {
  const auto rep = run_cli({"catalog", "--kind", "uniform-orthogonal-ensemble", "--d", "3"}).out;
  EXPECT_EQ(run_cli({"discriminate", "--ensemble", "-", "--povm", "-", "--n", "2"}, rep).code, cli::kExitInput);
}

TEST(Io, RoundTripsDoublesExactly) {
  const auto p = catalog::random_povm(3, 4, 17);
  const auto text = io::to_json(p).dump();
  const auto q = io::povm_from_json(json::parse(text));
  for (int b = 0; b < 4; ++b)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_EQ(p[b](i, j), q[b](i, j));
  const auto e = catalog::random_ensemble(2, 3, 4);
  const auto f = io::ensemble_from_json(json::parse(io::to_json(e).dump()));
  for (int b = 0; b < 3; ++b) EXPECT_EQ(e[b].max_abs_diff(f[b]), 0.0);
}

TEST(Io, CoefficientsRoundTrip) {
  ScoreCoefficients c(2, 2, 3);
  c.at(1, 0, 2) = -0.25;
  const auto back = io::coefficients_from_json(json::parse(io::to_json(c).dump()));
  EXPECT_EQ(back.at(1, 0, 2), -0.25);
  EXPECT_EQ(back.x_range(), 2);
  EXPECT_THROW(io::coefficients_from_json(json::parse(R"({"X": 1, "Y": 1, "B": 2, "c": [[[1]]]})")), DomainError);
}

TEST(Io, Fnv1aKnownValues) {
  EXPECT_EQ(io::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(io::fnv1a_hex("a"), "af63dc4c8601ec8c");
}
