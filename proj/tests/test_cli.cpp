#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "varmin/cli.hpp"

namespace fs = std::filesystem;

namespace varmin {
namespace {

const fs::path kSpecs = fs::path(VARMIN_SOURCE_DIR) / "specs";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("varmin_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_spec(const std::string& text) {
    const fs::path p = dir_ / "spec.json";
    std::ofstream(p) << text;
    return p;
  }
  int run(const std::string& command, const fs::path& spec, const std::string& out = "out") {
    CommandOptions o;
    o.spec_path = spec.string();
    o.out_dir = (dir_ / out).string();
    o.timestamp = false;
    return run_command(command, o);
  }
  json report(const std::string& out = "out") { return json::parse(slurp(dir_ / out / "report.json")); }

  fs::path dir_;
};

std::string expect_spec_error(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const SpecError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no SpecError for " << text;
  return {};
}

TEST(ParseProblem, Defaults) {
  const ProblemSpec s = parse_problem(R"({"domain": {"type": "interval", "bounds": [0, 1]}, "integrand": "dirichlet"})");
  EXPECT_EQ(s.domain.dim, 1);
  EXPECT_EQ(s.levels, 3);
  EXPECT_EQ(s.resolution, 4);
  EXPECT_EQ(s.seed, kDefaultSeed);
  EXPECT_EQ(s.make_integrand().name, "dirichlet");
}

TEST(ParseProblem, Diagnostics) {
  const std::string q = expect_spec_error(R"({
  "domain": {"type": "interval", "bounds": [0, 1]},
  "integrand": "dirichlet",
  "growth": {"c0": 1, "c1": 0, "c2": 0, "p": 2, "q": 2}
})");
  EXPECT_NE(q.find("line 4"), std::string::npos) << q;
  EXPECT_NE(q.find("q"), std::string::npos) << q;

  const std::string syntax = expect_spec_error("{\n  \"domain\": {\"type\": \"interval\",,}\n}");
  EXPECT_NE(syntax.find("line 2"), std::string::npos) << syntax;
  EXPECT_NE(syntax.find("column"), std::string::npos) << syntax;

  const std::string unknown = expect_spec_error(
      R"({"domain": {"type": "interval", "bounds": [0, 1]}, "integrand": "dirichlet", "colour": 1})");
  EXPECT_NE(unknown.find("colour"), std::string::npos) << unknown;

  const std::string name = expect_spec_error(R"({"domain": {"type": "interval", "bounds": [0, 1]}, "integrand": "nope"})");
  EXPECT_NE(name.find("nope"), std::string::npos) << name;

  expect_spec_error(R"({"domain": {"type": "interval", "bounds": [1, 0]}, "integrand": "dirichlet"})");
  expect_spec_error(R"({"domain": {"type": "interval", "bounds": [0, 1]}, "integrand": "dirichlet", "mesh": {"levels": 0}})");
}

TEST_F(Cli, EveryExampleSpecSucceedsAndIsDeterministic) {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"minimize", "dirichlet_1d.json"},           {"minimize", "dirichlet_mass_cert.json"},
      {"minimize", "minimal_surface_1d.json"},     {"minimize", "p_laplace_1d.json"},
      {"minimize", "double_well_1d.json"},         {"minimize", "dirichlet_2d_product.json"},
      {"check", "dirichlet_mass_cert.json"},       {"check", "double_well_1d.json"},
      {"semicont", "semicont_dirichlet_sawtooth.json"}, {"semicont", "semicont_double_well_sawtooth.json"},
      {"lemma-apim", "lemma_identity.json"},       {"lemma-apim", "lemma_sign_odd.json"},
  };
  for (const auto& [cmd, spec] : runs) {
    const std::string tag = cmd + ":" + spec;
    const int a = run(cmd, kSpecs / spec, "a");
    const int b = run(cmd, kSpecs / spec, "b");
    EXPECT_EQ(a, b) << tag;
    EXPECT_EQ(a, cmd == "check" && spec == "double_well_1d.json" ? kExitQualified : kExitOk) << tag;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "a")) {
      ++files;
      EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << tag << " " << e.path().filename();
    }
    EXPECT_GE(files, 1u) << tag;
    const json r = report("a");
    EXPECT_EQ(r["command"], cmd);
    EXPECT_FALSE(r.contains("generated_at"));
    EXPECT_EQ(r["exit_code"], a);
    fs::remove_all(dir_ / "a");
    fs::remove_all(dir_ / "b");
  }
}

TEST_F(Cli, MinimizeReportContents) {
  ASSERT_EQ(run("minimize", kSpecs / "dirichlet_mass_cert.json"), kExitOk);
  const json r = report();
  EXPECT_EQ(r["result"]["status"], "converged");
  EXPECT_EQ(r["result"]["levels"].size(), 3u);
  EXPECT_EQ(r["result"]["monotone"], true);
  EXPECT_EQ(r["coercivity"]["violations"], 0);
  EXPECT_GT(r["coercivity"]["iterates_checked"].get<int>(), 0);
  const std::string csv = slurp(dir_ / "out" / "table_levels.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "level,dofs,F,grad_norm,iterations,seminorm,level_change,status");
  EXPECT_FALSE(fs::exists(dir_ / "out" / "trace.csv"));
}

TEST_F(Cli, MinimalSurfaceCertificateUnavailable) {
  ASSERT_EQ(run("minimize", kSpecs / "minimal_surface_1d.json"), kExitOk);
  EXPECT_NE(slurp(dir_ / "out" / "report.json").find("certificate-unavailable"), std::string::npos);
}

TEST_F(Cli, SeedOverride) {
  CommandOptions o;
  o.spec_path = (kSpecs / "double_well_1d.json").string();
  o.out_dir = (dir_ / "s").string();
  o.timestamp = false;
  o.seed = 99;
  EXPECT_EQ(run_command("minimize", o), kExitOk);
  EXPECT_EQ(report("s")["seed"], 99);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("minimize", dir_ / "missing.json"), kExitSpec);
  EXPECT_EQ(run("minimize", write_spec("{")), kExitSpec);
  EXPECT_EQ(report()["exit_code"], kExitSpec);

  // Verdict mismatch is a qualified failure.
  std::string txt = slurp(kSpecs / "semicont_double_well_sawtooth.json");
  txt.replace(txt.find("lsc-violated"), 12, "lsc-consistent");
  EXPECT_EQ(run("semicont", write_spec(txt)), kExitQualified);

  // Sawtooth resolution not a multiple of 2k.
  EXPECT_EQ(run("semicont", write_spec(R"({"domain": {"type": "interval", "bounds": [0, 1]}, "integrand": "dirichlet",
    "semicont": {"sequence": "sawtooth", "ks": [1, 3], "resolution": 8}})")),
            kExitSpec);

  // Non-finite integrand values.
  EXPECT_EQ(run("minimize", write_spec(R"({"domain": {"type": "interval", "bounds": [0, 1]},
    "integrand": {"name": "power-law", "params": {"p": 1000}},
    "boundary": {"type": "linear", "offset": 0, "slope": [5]}, "mesh": {"levels": 1}})")),
            kExitEval);
  EXPECT_EQ(report()["exit_code"], kExitEval);

  // Too few iterations.
  EXPECT_EQ(run("minimize", write_spec(R"({"domain": {"type": "interval", "bounds": [0, 1]}, "integrand": "dirichlet-mass",
    "initial": {"type": "random-interior"}, "mesh": {"resolution": 32, "levels": 1},
    "solver": {"max_iters": 2, "gtol": 1e-12}})")),
            kExitQualified);
}

TEST_F(Cli, VerboseWritesTrace) {
  CommandOptions o;
  o.spec_path = (kSpecs / "p_laplace_1d.json").string();
  o.out_dir = (dir_ / "v").string();
  o.timestamp = false;
  o.verbose = true;
  EXPECT_EQ(run_command("minimize", o), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "v" / "trace.csv"));
}

int cli(std::vector<std::string> args) {
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

TEST_F(Cli, ArgumentParsing) {
  EXPECT_EQ(cli({"varmin", "minimize", "--spec", (kSpecs / "dirichlet_1d.json").string()}), kExitSpec);
  EXPECT_EQ(cli({"varmin", "frobnicate"}), kExitSpec);
  EXPECT_EQ(cli({"varmin", "--help"}), kExitOk);
  EXPECT_EQ(cli({"varmin", "lemma-apim", "--spec", (kSpecs / "lemma_identity.json").string(), "--out",
                 (dir_ / "l").string(), "--no-timestamp"}),
            kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "l" / "table_lemma.csv"));
}

}  // namespace
}  // namespace varmin
