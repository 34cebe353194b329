#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "minlor/cli.hpp"

using namespace minlor;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = fs::path(MINLOR_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "minlor_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_config(const fs::path& dir, const std::string& name, const json& cfg) {
  const fs::path p = dir / name;
  std::ofstream(p) << cfg.dump(2);
  return p;
}

json config(const std::string& name) { return read_json(kConfigs / name); }

/// Runs the installed binary; returns its exit status.
int run_binary(const std::string& args) {
  const std::string cmd = std::string("\"") + MINLOR_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct InProcess {
  int code;
  std::string log;
  std::string err;
};

InProcess run_in_process(const std::string& command, const fs::path& cfg, const fs::path& out,
                         cli::Format format = cli::Format::csv, std::optional<double> threshold = {}) {
  cli::Options opt;
  opt.command = command;
  opt.config = cfg;
  opt.out = out;
  opt.format = format;
  opt.threshold = threshold;
  std::ostringstream log, err;
  const int code = cli::run(opt, log, err);
  return {code, log.str(), err.str()};
}

}  // namespace

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(cli::exit_code_for(ErrorKind::io), 1);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::blow_up), 1);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::non_finite), 1);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::config), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::syntax), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::not_isothermal), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::validation_failed), 2);
}

TEST(Config, ParseErrorReportsLineAndColumn) {
  try {
    cli::parse_config_text("{\n  \"a\": 1,\n  \"b\": ]\n}", "job.json");
    ADD_FAILURE() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("job.json"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 8"), std::string::npos) << msg;
  }
}

TEST(Config, MissingFile) {
  const auto r = run_in_process("analyze", "/nonexistent/job.json", scratch("missing"));
  EXPECT_EQ(r.code, 2);
}

TEST(Analyze, ReferenceSurface) {
  const fs::path out = scratch("analyze");
  const auto r = run_in_process("analyze", kConfigs / "analyze_example.json", out);
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = read_json(out / "analyze_summary.json");
  EXPECT_EQ(s["class_histogram"]["general_type"], 121);
  EXPECT_EQ(s["class_histogram"]["third_class"], 0);
  EXPECT_NEAR(s["centre"]["K"].get<double>(), 5.0, 1e-5);
  EXPECT_NEAR(s["centre"]["kappa"].get<double>(), -4.0, 1e-5);
  EXPECT_NEAR(s["canonical"]["constant_c"].get<double>(), 1.0, 1e-6);
  EXPECT_TRUE(s["canonical"]["is_canonical"].get<bool>());
  EXPECT_LE(s["minimality_residual"].get<double>(), 1e-4);
  const std::string csv = slurp(out / "analyze.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "u,v,E,F,G,K,kappa,mu,nu,epsilon,class");
}

TEST(Analyze, NonCanonicalParameters) {
  const fs::path out = scratch("analyze_ts");
  const auto r = run_in_process("analyze", kConfigs / "analyze_example_ts.json", out);
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = read_json(out / "analyze_summary.json");
  EXPECT_FALSE(s["canonical"]["is_canonical"].get<bool>());
  EXPECT_NEAR(s["canonical"]["constant_c"].get<double>(), std::pow(3.0, 0.25), 1e-5);
}

TEST(Analyze, PlaneIsDegenerate) {
  const fs::path out = scratch("plane");
  const auto r = run_in_process("analyze", kConfigs / "analyze_plane.json", out);
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = read_json(out / "analyze_summary.json");
  EXPECT_EQ(s["class_histogram"]["degenerate_point"], 81);
  EXPECT_TRUE(s["canonical"].is_null());
}

TEST(Analyze, BadExpressionNamesTheField) {
  const fs::path out = scratch("bad_expr");
  json cfg = config("analyze_plane.json");
  cfg["surface"]["components"][2] = "v*(";
  const auto r = run_in_process("analyze", write_config(out, "job.json", cfg), out);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("components"), std::string::npos) << r.err;
}

TEST(Analyze, UnknownIdentifier) {
  const fs::path out = scratch("bad_ident");
  json cfg = config("analyze_plane.json");
  cfg["surface"]["components"][0] = "w";
  const auto r = run_in_process("analyze", write_config(out, "job.json", cfg), out);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("w"), std::string::npos) << r.err;
}

TEST(Analyze, NonLorentzianSurface) {
  const fs::path out = scratch("riemannian");
  json cfg = config("analyze_plane.json");
  cfg["surface"]["components"] = {"u", "v", "0", "0"};
  EXPECT_EQ(run_in_process("analyze", write_config(out, "job.json", cfg), out).code, 2);
}

TEST(Synthesize, MissingEpsilon) {
  const fs::path out = scratch("no_eps");
  json cfg = config("synthesize_constant.json");
  cfg.erase("epsilon");
  const auto r = run_in_process("synthesize", write_config(out, "job.json", cfg), out);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("epsilon"), std::string::npos) << r.err;
}

TEST(Synthesize, GateRejectsConstantFields) {
  const fs::path out = scratch("gate");
  const auto r = run_in_process("synthesize", kConfigs / "synthesize_constant.json", out);
  EXPECT_EQ(r.code, 3);
  const json s = read_json(out / "synthesis.json");
  EXPECT_GE(s["gate"]["defect"].get<double>(), 0.5);
  EXPECT_FALSE(s["gate"]["passed"].get<bool>());
  EXPECT_FALSE(fs::exists(out / "mesh.csv"));
}

TEST(Synthesize, ReferenceFields) {
  const fs::path out = scratch("synth");
  json cfg = config("synthesize_example.json");
  cfg["grid"]["nu"] = 40;
  cfg["grid"]["nv"] = 40;
  const auto r = run_in_process("synthesize", write_config(out, "job.json", cfg), out);
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = read_json(out / "synthesis.json");
  EXPECT_LE(s["defects"]["orthonormality_drift"].get<double>(), 1e-8);
  EXPECT_TRUE(s["validation"]["passed"].get<bool>());
  const std::string csv = slurp(out / "mesh.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 40 * 40);
}

TEST(Synthesize, CsvIsReproducible) {
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  json cfg = config("synthesize_example.json");
  cfg["grid"]["nu"] = 20;
  cfg["grid"]["nv"] = 20;
  const fs::path job = write_config(a, "job.json", cfg);
  ASSERT_EQ(run_in_process("synthesize", job, a).code, 0);
  ASSERT_EQ(run_in_process("synthesize", job, b).code, 0);
  EXPECT_EQ(slurp(a / "mesh.csv"), slurp(b / "mesh.csv"));
}

TEST(Synthesize, JsonFormatEmbedsTable) {
  const fs::path out = scratch("synth_json");
  json cfg = config("synthesize_example.json");
  cfg["grid"]["nu"] = 6;
  cfg["grid"]["nv"] = 6;
  const auto r = run_in_process("synthesize", write_config(out, "job.json", cfg), out, cli::Format::json);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(out / "mesh.csv"));
  const json m = read_json(out / "synthesis.json");
  EXPECT_EQ(m["data"]["columns"].size(), 6u);
  EXPECT_EQ(m["data"]["rows"].size(), 36u);
}

TEST(Verify, ReferenceFields) {
  const fs::path out = scratch("verify");
  const auto r = run_in_process("verify", kConfigs / "verify_example.json", out);
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = read_json(out / "residuals_summary.json");
  EXPECT_LE(s["r1_max"].get<double>(), 1e-3);
  EXPECT_EQ(s["points"], 225);
}

TEST(Verify, WrongSign) {
  const fs::path out = scratch("verify_sign");
  EXPECT_EQ(run_in_process("verify", kConfigs / "verify_example_wrong_sign.json", out).code, 4);
  EXPECT_FALSE(read_json(out / "residuals_summary.json")["passed"].get<bool>());
}

TEST(Verify, CurvatureSystem) {
  const fs::path out = scratch("verify_k");
  const auto r = run_in_process("verify", kConfigs / "verify_example_K_kappa.json", out);
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Verify, ThresholdOverride) {
  const fs::path out = scratch("verify_thr");
  EXPECT_EQ(run_in_process("verify", kConfigs / "verify_example.json", out, cli::Format::csv, 1e-12).code, 4);
}

TEST(NullCurve, ReferencePair) {
  const fs::path out = scratch("null");
  const auto r = run_in_process("null-curve", kConfigs / "null_curve_example.json", out);
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = read_json(out / "null_curve.json");
  EXPECT_TRUE(s["pair"]["passed"].get<bool>());
  EXPECT_LE(s["chart"]["minimality_residual"].get<double>(), 1e-6);
}

TEST(NullCurve, RejectedPair) {
  const fs::path out = scratch("null_bad");
  json cfg = config("null_curve_example.json");
  cfg["alpha"]["components"] = {"p", "0", "0", "0"};
  EXPECT_EQ(run_in_process("null-curve", write_config(out, "job.json", cfg), out).code, 2);
  EXPECT_FALSE(read_json(out / "null_curve.json")["pair"]["passed"].get<bool>());
}

TEST(Binary, ExampleDefault) {
  const fs::path out = scratch("example");
  EXPECT_EQ(run_binary("example --out " + out.string()), 0);
  const json v = read_json(out / "example_verdict.json");
  EXPECT_TRUE(v["passed"].get<bool>());
}

TEST(Binary, ExampleCoarseStepFailsResiduals) {
  const fs::path out = scratch("example_coarse");
  EXPECT_EQ(run_binary("example --fd-step 0.1 --out " + out.string()), 4);
}

TEST(Binary, UnwritableOutput) {
  const fs::path dir = scratch("unwritable");
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run_binary("example --out " + (dir / "file" / "sub").string()), 1);
}

TEST(Binary, Configs) {
  const fs::path out = scratch("binary");
  auto job = [&](const std::string& cmd, const std::string& name) {
    return run_binary(cmd + " --config " + (kConfigs / name).string() + " --out " + out.string());
  };
  EXPECT_EQ(job("analyze", "analyze_example.json"), 0);
  EXPECT_EQ(job("analyze", "analyze_plane.json"), 0);
  EXPECT_EQ(job("synthesize", "synthesize_constant.json"), 3);
  EXPECT_EQ(job("verify", "verify_example.json"), 0);
  EXPECT_EQ(job("verify", "verify_example_wrong_sign.json"), 4);
  EXPECT_EQ(job("null-curve", "null_curve_example.json"), 0);
}

TEST(Binary, UsageErrors) {
  EXPECT_EQ(run_binary(""), 2);
  EXPECT_EQ(run_binary("analyze"), 2);
  EXPECT_EQ(run_binary("analyze --config /nonexistent.json"), 2);
  EXPECT_EQ(run_binary("frobnicate"), 2);
  EXPECT_EQ(run_binary("verify --config " + (kConfigs / "verify_example.json").string() + " --format xml"), 2);
  EXPECT_EQ(run_binary("--help"), 0);
}
