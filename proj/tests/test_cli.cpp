#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "waning/cli.hpp"

using namespace waning;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = WANING_SOURCE_DIR "/configs/";

std::string error_of(const std::function<void()>& f)
{
  try {
    f();
  }
  catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("waning_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string minimal_config()
{
  return slurp(kConfigs + "backward.cfg");
}

}  // namespace

TEST(LoadConfig, ShippedConfigsMatchReferenceTable)
{
  const auto cfg = load_config(kConfigs + "backward.cfg");
  const auto ref = reference_params(0.1);
  EXPECT_NO_THROW(validate_params(cfg.params));
  EXPECT_EQ(cfg.params.Lambda, ref.Lambda);
  EXPECT_EQ(cfg.params.u, ref.u);
  EXPECT_EQ(cfg.params.sigma, ref.sigma);
  EXPECT_EQ(cfg.params.gamma_A, ref.gamma_A);
  EXPECT_EQ(cfg.params.kernel.eta(), 0.2);
  EXPECT_NEAR(r0(cfg.params, cfg.params.bar_beta), 0.99, 1e-11);

  const auto b = load_config(kConfigs + "forward.cfg");
  EXPECT_EQ(b.params.beta_s, 0.10345);
  EXPECT_NEAR(r0(b.params, b.params.bar_beta), 1.012, 1e-11);
}

TEST(LoadConfig, EmptyFileNamesFirstMissingKey)
{
  EXPECT_EQ(error_of([] { parse_config(""); }), "missing required key Lambda");
}

TEST(LoadConfig, ValidationErrorNamesKey)
{
  auto text = minimal_config();
  text.replace(text.find("rho     = 0.4"), 13, "rho = 1.5");
  try {
    parse_config(text);
    FAIL();
  }
  catch (const ParameterError& e) {
    EXPECT_EQ(e.name(), "rho");
    EXPECT_NE(std::string(e.what()).find("rho"), std::string::npos);
  }
}

TEST(LoadConfig, UnknownKeyRejectedWithLine)
{
  const auto msg = error_of([] { parse_config(minimal_config() + "colour = 3\n", "x.cfg"); });
  EXPECT_NE(msg.find("unknown key colour"), std::string::npos);
  EXPECT_EQ(msg.rfind("x.cfg:", 0), 0u);
}

TEST(LoadConfig, ParseErrorsCarryPosition)
{
  EXPECT_EQ(error_of([] { parse_config("Lambda = 2o000\n", "c"); }), "c:1:10: cannot parse number for Lambda");
  EXPECT_EQ(error_of([] { parse_config("\n\nLambda 20000\n", "c"); }), "c:3:1: expected `key = value`");
  EXPECT_NE(error_of([] { parse_config("Lambda = 1\nLambda = 2\n"); }).find("duplicate key Lambda"), std::string::npos);
}

TEST(LoadConfig, RatiosAndComments)
{
  const auto cfg = parse_config(minimal_config());
  EXPECT_EQ(cfg.params.u, 1.0 / 27375.0);
  EXPECT_EQ(cfg.params.gamma_I, 1.0 / 7.0);
  EXPECT_EQ(cfg.bistab_I, (std::vector<double>{10.0, 1e6}));
}

TEST(LoadConfig, MissingFile) { EXPECT_THROW(load_config("/nonexistent/run.cfg"), ConfigError); }

TEST(Serialize, RoundTripIsIdentical)
{
  auto cfg = parse_config(minimal_config());
  cfg.init_S = 123.5;
  cfg.quad.tau_cut = 600.0;
  const auto once = serialize(cfg);
  const auto back = parse_config(once);
  EXPECT_EQ(serialize(back), once);
  EXPECT_EQ(back.params.u, cfg.params.u);
  EXPECT_EQ(back.params.bar_beta, cfg.params.bar_beta);
  EXPECT_EQ(back.init_S, cfg.init_S);
  EXPECT_EQ(back.quad.tau_cut, cfg.quad.tau_cut);
  EXPECT_EQ(back.sim.t_end, cfg.sim.t_end);

  auto tab = cfg;
  tab.params.kernel = ImmunityKernel::tabulated({0, 30, 90, 250}, {0.4, 0.55, 0.9, 1.0});
  tab.quad.tau_cut.reset();
  const auto t1 = serialize(tab);
  EXPECT_EQ(serialize(parse_config(t1)), t1);
  EXPECT_TRUE(parse_config(t1).params.kernel.is_tabulated());
}

TEST(RunCommand, SummaryReparsesToInMemoryValues)
{
  const auto cfg = load_config(kConfigs + "backward.cfg");
  CommandOptions opt;
  opt.out_dir = scratch("summary");
  std::ostringstream out;
  run_command("summary", cfg, opt, out);

  std::map<std::string, std::string> kv;
  std::istringstream in(out.str());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  const auto s = classify(cfg.params);
  EXPECT_LT(std::abs(std::stod(kv["a"]) - s.a_coeff) / s.a_coeff, 1e-11);
  EXPECT_LT(std::abs(std::stod(kv["a_ls"]) - s.a_coeff) / s.a_coeff, 1e-6);
  EXPECT_LT(std::abs(std::stod(kv["bar_beta_star"]) - s.beta_star) / s.beta_star, 1e-11);
  EXPECT_LT(std::abs(std::stod(kv["R0"]) - s.r0_value), 1e-11);
  EXPECT_EQ(kv["criticality"], "Backward");

  const auto j = nlohmann::json::parse(slurp(opt.out_dir / "summary.json"));
  EXPECT_EQ(j["criticality"], "Backward");
  EXPECT_LT(std::abs(j["a"].get<double>() - s.a_coeff) / s.a_coeff, 1e-11);
}

TEST(RunCommand, BranchFilesHaveContractHeadersAndAreDeterministic)
{
  const auto cfg = load_config(kConfigs + "backward.cfg");
  CommandOptions a, b;
  a.out_dir = scratch("branch_a");
  b.out_dir = scratch("branch_b");
  std::ostringstream sink;
  run_command("branch", cfg, a, sink);
  run_command("branch", cfg, b, sink);

  const auto rows = read_csv(a.out_dir / "branch.csv");
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(slurp(a.out_dir / "branch.csv").substr(0, 52),
            "bar_beta,R0,lambda,S,E,A,I,R_total,N,stability\n0.116");
  EXPECT_EQ(read_csv(a.out_dir / "branch.folds.csv").front(), (std::vector<std::string>{"R0", "lambda", "I"}));
  EXPECT_EQ(slurp(a.out_dir / "branch.csv"), slurp(b.out_dir / "branch.csv"));
  EXPECT_EQ(slurp(a.out_dir / "branch.folds.csv"), slurp(b.out_dir / "branch.folds.csv"));

  // every row re-parses to the traced values
  ContinuationOptions co;
  const auto br = trace_branch(cfg.params, cfg.r0_lo, cfg.r0_hi, default_steps(cfg.r0_lo, cfg.r0_hi), co);
  ASSERT_EQ(rows.size(), br.points.size() + 1);
  for (std::size_t i = 0; i < br.points.size(); ++i) {
    const auto& pt = br.points[i];
    const auto& r = rows[i + 1];
    ASSERT_EQ(r.size(), 10u);
    for (auto [col, want] : {std::pair{0, pt.bar_beta}, {2, pt.eq.lam}, {6, pt.eq.I}, {8, pt.eq.N}})
      EXPECT_LT(std::abs(std::stod(r[col]) - want) / std::abs(want), 1e-11);
    EXPECT_EQ(r[9], "unknown");
  }
  const auto folds = read_csv(a.out_dir / "branch.folds.csv");
  ASSERT_EQ(folds.size(), br.folds.size() + 1);
}

TEST(RunCommand, SimulateFromDiseaseFreeIsConstant)
{
  auto cfg = load_config(kConfigs + "backward.cfg");
  cfg.init_I = 0.0;
  cfg.sim.t_end = 2000.0;
  cfg.sim.output_stride = 400;
  CommandOptions opt;
  opt.out_dir = scratch("simulate");
  std::ostringstream sink;
  run_command("simulate", cfg, opt, sink);
  const auto rows = read_csv(opt.out_dir / "trajectory.csv");
  ASSERT_EQ(rows.front(), (std::vector<std::string>{"t", "S", "E", "A", "I", "R_total", "N"}));
  ASSERT_EQ(rows.size(), 2u + 2000 / (0.5 * 400));
  for (std::size_t i = 2; i < rows.size(); ++i)
    for (int col : {1, 5, 6})
      EXPECT_LT(std::abs(std::stod(rows[i][col]) / std::stod(rows[1][col]) - 1.0), 1e-6);
}

TEST(RunCommand, EquilibriaListsSolverOutput)
{
  auto cfg = load_config(kConfigs + "backward.cfg");
  const auto line = reproduction_line(cfg.params);
  cfg.params.bar_beta = (0.997 - line.intercept) / line.slope;
  CommandOptions opt;
  opt.out_dir = scratch("equilibria");
  std::ostringstream out;
  run_command("equilibria", cfg, opt, out);
  const auto rows = read_csv(opt.out_dir / "equilibria.csv");
  const auto eqs = find_equilibria(cfg.params, cfg.params.bar_beta);
  ASSERT_EQ(rows.size(), eqs.size() + 1);
  for (std::size_t i = 0; i < eqs.size(); ++i)
    EXPECT_LT(std::abs(std::stod(rows[i + 1][6]) - eqs[i].I) / eqs[i].I, 1e-11);
  EXPECT_EQ(out.str(), slurp(opt.out_dir / "equilibria.csv"));
}

TEST(RunCommand, UnknownCommandAndUnwritableOutput)
{
  const auto cfg = load_config(kConfigs + "backward.cfg");
  std::ostringstream sink;
  EXPECT_THROW(run_command("plot", cfg, {}, sink), Error);
  EXPECT_THROW(write_file("/nonexistent/dir/x.csv", "x"), Error);
}
