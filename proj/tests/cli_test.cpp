#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "fiid/cli/commands.hpp"

using namespace fiid;
using namespace fiid::cli;
using nlohmann::json;

namespace {

// Message of the InputError thrown by `fn`, or "" if none was thrown.
template <class F>
std::string input_error(F&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& message, const std::string& field) {
  return message.find(field) != std::string::npos;
}

class ScratchDir {
 public:
  ScratchDir() {
    path_ = std::filesystem::temp_directory_path() / ("fiid_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FIID_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Small parameter sets, one per command.
std::vector<std::pair<std::string, json>> small_runs() {
  return {
      {"density", {{"factor", "lw:p=0.1,k=8"}, {"trials", 300}}},
      {"density", {{"factor", "threshold"}, {"host", "config:n=200,d=3"}, {"trials", 5}, {"workers", 2}}},
      {"density", {{"factor", "threshold"}, {"host", "er:n=100,lambda=2"}, {"trials", 5}}},
      {"scan-p", {{"factor", "threshold"}, {"k", 3}, {"grid", "0,0.5,1"}, {"trials", 200}}},
      {"scan-p",
       {{"factor", "threshold"}, {"k", 2}, {"grid", "0.5"}, {"trials", 50}, {"stability", true}, {"inner_trials", 10}}},
      {"stability", {{"factor", "threshold"}, {"trials", 200}, {"inner_trials", 20}, {"format", "json"}}},
      {"bounds", {{"rho", R"({"k": 2, "rho": {"0": 1, "1": 0.5, "2": 0.5, "3": 0.25}})"}, {"n", 4}, {"d", 2},
                  {"lambda", 1.5}, {"self_test", true}}},
      {"bounds", {{"alpha", "1,0.5"}, {"d", 100}}},
      {"oracle-check", json::object()},
      {"pgw-transfer", {{"factor", "lw:p=0.2,k=2"}, {"lambda", 4.0}, {"d", 6}, {"trials", 200}}},
  };
}

}  // namespace

TEST(ParseFactor, KindsAndErrors) {
  EXPECT_EQ(parse_factor("lw:p=0.02,k=250").radius(), 251);
  EXPECT_EQ(parse_factor("threshold").kind(), FactorKind::greedy_threshold);
  EXPECT_EQ(parse_factor("zero").radius(), 0);
  EXPECT_TRUE(mentions(input_error([] { parse_factor("lw:p=1.5,k=3"); }), "factor.p"));
  EXPECT_TRUE(mentions(input_error([] { parse_factor("lw:p=0.1,k=0"); }), "factor.k"));
  EXPECT_TRUE(mentions(input_error([] { parse_factor("lw:p=0.1"); }), "factor.k"));
  EXPECT_TRUE(mentions(input_error([] { parse_factor("lw:p=0.1,k=2.5"); }), "factor.k"));
  EXPECT_TRUE(mentions(input_error([] { parse_factor("lw:p=abc,k=2"); }), "factor.p"));
  EXPECT_TRUE(mentions(input_error([] { parse_factor("lw:p=0.1,k=2,q=1"); }), "factor.q"));
  EXPECT_TRUE(mentions(input_error([] { parse_factor("threshold:x=1"); }), "factor.x"));
  EXPECT_TRUE(mentions(input_error([] { parse_factor("mystery"); }), "factor"));
  EXPECT_TRUE(mentions(input_error([] { parse_factor(""); }), "factor"));
}

TEST(ParseHost, KindsAndErrors) {
  EXPECT_TRUE(parse_host("tree:d=3").is_tree());
  EXPECT_TRUE(parse_host("pgw:lambda=2.5").is_tree());
  EXPECT_FALSE(parse_host("config:n=10,d=3").is_tree());
  EXPECT_FALSE(parse_host("er:n=10,lambda=2").is_tree());
  EXPECT_TRUE(mentions(input_error([] { parse_host("tree:d=1"); }), "host.d"));
  EXPECT_TRUE(mentions(input_error([] { parse_host("config:n=5,d=3"); }), "host"));
  EXPECT_TRUE(mentions(input_error([] { parse_host("er:n=10,lambda=11"); }), "host.lambda"));
  EXPECT_TRUE(mentions(input_error([] { parse_host("pgw:lambda=-1"); }), "host.lambda"));
  EXPECT_TRUE(mentions(input_error([] { parse_host("config:n=10"); }), "host.d"));
  EXPECT_TRUE(mentions(input_error([] { parse_host("tree:d"); }), "host"));
  EXPECT_TRUE(mentions(input_error([] { parse_host("grid:n=3"); }), "host"));
}

TEST(ParseList, NumbersAndErrors) {
  EXPECT_EQ(parse_list("0,0.5,1", "grid"), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_TRUE(mentions(input_error([] { parse_list("0,x", "grid"); }), "grid"));
  EXPECT_TRUE(mentions(input_error([] { parse_list("", "grid"); }), "grid"));
}

TEST(NormalizeParams, DefaultsAndTypeChecks) {
  const Command& cmd = find_command("density");
  const json all = normalize_params(cmd, json::object());
  EXPECT_EQ(all.at("trials").get<std::uint64_t>(), 1000u);
  EXPECT_EQ(all.at("factor").get<std::string>(), "lw:p=0.02,k=250");
  EXPECT_TRUE(mentions(input_error([&] { normalize_params(cmd, {{"trails", 3}}); }), "trails"));
  EXPECT_TRUE(mentions(input_error([&] { normalize_params(cmd, {{"trials", "3"}}); }), "trials"));
  EXPECT_TRUE(mentions(input_error([&] { normalize_params(cmd, {{"trials", -3}}); }), "trials"));
  EXPECT_TRUE(mentions(input_error([&] { normalize_params(cmd, {{"trials", 2.5}}); }), "trials"));
  EXPECT_TRUE(mentions(input_error([&] { normalize_params(cmd, json::array()); }), "object"));
  const json lambda = normalize_params(find_command("pgw-transfer"), {{"lambda", 10}});
  EXPECT_TRUE(lambda.at("lambda").is_number_float());
  EXPECT_THROW(find_command("nope"), InputError);
}

TEST(RunCommand, RejectsBadValues) {
  EXPECT_TRUE(mentions(input_error([] { run_command("density", {{"format", "xml"}}); }), "format"));
  EXPECT_TRUE(mentions(input_error([] { run_command("density", {{"trials", 0}}); }), "trials"));
  EXPECT_TRUE(mentions(input_error([] { run_command("density", {{"workers", 0}}); }), "workers"));
  EXPECT_TRUE(mentions(input_error([] { run_command("scan-p", {{"grid", "0,2"}}); }), "grid"));
  EXPECT_TRUE(mentions(input_error([] { run_command("stability", {{"p", 1.5}}); }), "p"));
  EXPECT_TRUE(mentions(input_error([] { run_command("bounds", json::object()); }), "rho"));
  EXPECT_TRUE(mentions(input_error([] { run_command("bounds", {{"rho", "{"}}); }), "rho"));
  EXPECT_TRUE(mentions(input_error([] { run_command("oracle-check", {{"cases", "8:2"}}); }), "cases"));
  EXPECT_TRUE(mentions(input_error([] { run_command("pgw-transfer", {{"d", 2}}); }), "d"));
}

TEST(RunCommand, NumericalGuardSurfaces) {
  // The zero factor never selects the root, so nothing can be conditioned on.
  EXPECT_THROW(run_command("stability", {{"factor", "zero"}, {"trials", 20}, {"inner_trials", 5}}), NumericalError);
}

TEST(RunCommand, DeterministicAndWorkerInvariant) {
  const json params{{"factor", "lw:p=0.1,k=8"}, {"trials", 500}};
  const auto a = run_command("density", params);
  const auto b = run_command("density", params);
  json three = params;
  three["workers"] = 3;
  const auto c = run_command("density", three);
  EXPECT_EQ(a.output, b.output);
  // Only the workers column of the parameters differs; the table does not record it.
  EXPECT_EQ(a.output, c.output);
}

TEST(RunCommand, ManifestRecordsTheFullParameterSet) {
  const auto r = run_command("density", {{"trials", 10}, {"factor", "threshold"}});
  const json& m = r.manifest;
  EXPECT_EQ(m.at("command"), "density");
  EXPECT_EQ(m.at("params").size(), find_command("density").defaults.size());
  EXPECT_EQ(m.at("seed"), 1u);
  EXPECT_EQ(m.at("trials"), 10u);
  EXPECT_EQ(m.at("tool_version"), kToolVersion);
  EXPECT_TRUE(m.contains("seed_scheme"));
  EXPECT_TRUE(m.contains("wall_clock_seconds"));
  EXPECT_EQ(m.at("rows"), 1u);
}

TEST(RunCommand, OracleCheckCoversEverySetSize) {
  const auto r = run_command("oracle-check", json::object());
  const auto rows = std::count(r.output.begin(), r.output.end(), '\n') - 1;
  EXPECT_EQ(rows, 3 + 5 + 5 + 7);
  EXPECT_EQ(r.output.find(",false"), std::string::npos);
}

TEST(RunCommand, JsonFormatIsAnArrayOfRows) {
  const auto r = run_command("bounds", {{"alpha", "1,0.5"}, {"d", 50}, {"format", "json"}});
  const json rows = json::parse(r.output);
  ASSERT_TRUE(rows.is_array());
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].at("description"), "binomial sum");
  // C(2,1) * 1 - C(2,2) * (1 - (1 - 0.5)^2) = 1.25.
  EXPECT_DOUBLE_EQ(rows[0].at("value").get<double>(), 1.25);
}

TEST(Replay, EveryCommandReproducesItsOutputExactly) {
  for (const auto& [name, params] : small_runs()) {
    const auto first = run_command(name, params);
    const auto again = replay(json::parse(first.manifest.dump()));
    EXPECT_EQ(first.output, again.output) << name << " " << params.dump();
    EXPECT_EQ(first.manifest.at("params"), again.manifest.at("params"));
  }
}

TEST(Replay, OverridesTheOutputPath) {
  const auto first = run_command("density", {{"trials", 10}, {"out", "a.csv"}});
  const auto again = replay(first.manifest, std::string("b.csv"));
  EXPECT_EQ(again.manifest.at("params").at("out"), "b.csv");
  EXPECT_EQ(again.output, first.output);
  EXPECT_THROW(replay(json::object()), InputError);
}

TEST(Output, CsvQuotingAndDoubles) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125}) EXPECT_EQ(std::stod(format_double(x)), x);
  Table t{{"a", "b"}, {}};
  t.add({std::string("x,y"), std::monostate{}});
  EXPECT_EQ(to_csv(t), "a,b\n\"x,y\",\n");
  EXPECT_THROW(t.add({1.0}), InputError);
}

TEST(Output, WriteOutcomeWritesFileAndManifest) {
  ScratchDir dir;
  const std::string out = dir.file("density.csv");
  const auto r = run_command("density", {{"trials", 10}, {"out", out}});
  std::string printed;
  write_outcome(r, "", [&](const std::string& s) { printed += s; });
  EXPECT_TRUE(printed.empty());
  EXPECT_EQ(read_file(out), r.output);
  EXPECT_EQ(json::parse(read_file(manifest_path_for(out))).at("command"), "density");
}

TEST(Binary, ExitCodesAndReplayCheck) {
  ScratchDir dir;
  const std::string out = dir.file("run.csv");
  EXPECT_EQ(run_cli("density --factor threshold --trials 50 --out " + out), 0);
  const std::string manifest = manifest_path_for(out);
  ASSERT_TRUE(std::filesystem::exists(manifest));
  EXPECT_EQ(run_cli("replay " + manifest + " --check"), 0);

  const std::string copy = dir.file("copy.csv");
  EXPECT_EQ(run_cli("replay " + manifest + " --out " + copy), 0);
  EXPECT_EQ(read_file(copy), read_file(out));

  write_file(out, read_file(out) + "tampered\n");
  EXPECT_EQ(run_cli("replay " + manifest + " --check"), 1);

  EXPECT_EQ(run_cli("density --no-such-flag 1"), 2);
  EXPECT_EQ(run_cli("density --factor lw:p=2,k=3"), 2);
  EXPECT_EQ(run_cli("density --trials -4"), 2);
  EXPECT_EQ(run_cli("scan-p --inner-trials 0"), 2);
  EXPECT_EQ(run_cli("replay " + dir.file("missing.json")), 2);
  EXPECT_EQ(run_cli("stability --factor zero --trials 20 --inner-trials 5"), 3);
}
