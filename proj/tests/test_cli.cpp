#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "patchwork/cli.hpp"

using namespace patchwork;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("patchwork_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& path, const Json& j) { std::ofstream(path) << j.dump(2) << "\n"; }

CliOptions with(long prime = 3, long precision = 64) {
  CliOptions o;
  o.prime = prime;
  o.precision = precision;
  return o;
}

/// Runs the command, then replays its result as a certificate.
Json replay(const std::string& command, Json payload, const CliOptions& opts) {
  CliResponse first = dispatch(command, payload, opts);
  EXPECT_EQ(first.exit_code, 0) << first.body.dump(2);
  payload["certificate"] = first.body.at("result");
  CliOptions v = opts;
  v.verify = true;
  return dispatch(command, payload, v).body;
}

Json mat(const char* a, const char* b, const char* c, const char* d) {
  return Json::array({Json::array({a, b}), Json::array({c, d})});
}

Json disc(const std::string& c, const std::string& rat, const std::string& irr) {
  return {{"outer", {{"center", c}, {"log_radius", {{"rat", rat}, {"irr", irr}}}}}, {"holes", Json::array()}};
}

int run_binary(const std::string& args, const std::string& stdin_text, std::string& out) {
  fs::path in = scratch_dir("bin") / "in.json";
  std::ofstream(in) << stdin_text;
  std::string cmd = std::string(PATCHWORK_CLI) + " " + args + " < " + in.string() + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  out.clear();
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Dispatch, Examples) {
  auto r = dispatch("ubound", {{"n", 1}, {"free", true}, {"residue_us", 2}}, with());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.body["result"], (Json{{"field", 4}, {"function_field", 8}, {"equality", true}}));

  r = dispatch("classify", {{"center", "0"}, {"log_radius", {{"rat", "1"}, {"irr", "0"}}}}, with());
  EXPECT_EQ(r.body["result"]["type"], 2);

  r = dispatch("split", "t^-1 + 5 + t", with());
  EXPECT_EQ(r.body["result"]["plus"]["text"], "5 + t");
  EXPECT_EQ(r.body["result"]["minus"]["text"], "t^-1");
  EXPECT_EQ(r.body["result"]["minus"]["terms"], (Json{{"-1", "1"}}));
}

TEST(Dispatch, ExitCodes) {
  EXPECT_EQ(dispatch("nope", Json::object(), with()).exit_code, 2);
  EXPECT_EQ(dispatch("ubound", {{"free", true}}, with()).exit_code, 2);
  EXPECT_EQ(dispatch("isotropy", {{"coeffs", {"1", "x/2"}}}, with()).exit_code, 2);
  EXPECT_EQ(dispatch("isotropy", {{"coeffs", {"1", "1/0"}}}, with()).exit_code, 2);
  EXPECT_EQ(dispatch("split", {{"series", {{"terms", {{"a", "1"}}}}}}, with()).exit_code, 2);
  EXPECT_EQ(dispatch("factor", {{"matrix", {"1", "0"}}}, with()).exit_code, 2);
  // domain errors
  EXPECT_EQ(dispatch("isotropy", {{"coeffs", {"1", "1"}}}, with(4)).exit_code, 1);
  EXPECT_EQ(dispatch("ubound", {{"n", 1}, {"residue_us", 0}}, with()).exit_code, 1);
  EXPECT_EQ(dispatch("approximate", {{"chart", "gl1"}, {"a", {"1"}}}, with()).exit_code, 1);
  auto r = dispatch("cover-with-s",
                    {{"domain", disc("0", "-3", "0")}, {"points", {{{"center", "0"}, {"log_radius", {{"rat", "1"}, {"irr", "0"}}}}}}},
                    with());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.body["status"], "error");
  EXPECT_EQ(r.body["result"]["kind"], "precondition");
}

TEST(Dispatch, Deterministic) {
  Json payload{{"coeffs", {"1", "3", "-6", "5/3", "7", "2/9"}}};
  auto a = dispatch("isotropy", payload, with()), b = dispatch("isotropy", payload, with());
  EXPECT_EQ(a.body.dump(), b.body.dump());
  Json gl{{"chart", "gl1"}, {"a", {"27*t^-2 + 27 + 9*t^3"}}};
  EXPECT_EQ(dispatch("approximate", gl, with(3, 32)).body.dump(), dispatch("approximate", gl, with(3, 32)).body.dump());
}

TEST(Verify, ReplaysEveryCertificate) {
  // p-adic and local isotropy
  EXPECT_TRUE(replay("isotropy", {{"coeffs", {"1", "3", "-6", "5/3"}}}, with())["result"]["verified"]);
  Json local{{"coeffs", {"1", "2", "T", "3*T"}}, {"point", {{"center", "0"}, {"log_radius", {{"rat", "0"}, {"irr", "1/2"}}}}}};
  EXPECT_TRUE(replay("isotropy", local, with())["result"]["verified"]);
  // decompositions
  EXPECT_TRUE(replay("decompose", {{"coeffs", {"3", "6", "9/2", "5", "1/27"}}}, with())["result"]["verified"]);
  Json mono{{"n", 2},
            {"coeffs", {{{"unit", "1"}, {"value", {"1/2", "0"}}}, {{"unit", "-1"}, {"value", {"1", "1"}}},
                        {{"unit", "2"}, {"value", {"0", "1/3"}}}}}};
  CliOptions general = with();
  general.mode = DecompositionMode::general;
  EXPECT_TRUE(replay("decompose", mono, general)["result"]["verified"]);
  // covers
  Json domains{{"domains", {disc("0", "0", "1/2"), disc("1", "-1", "1/2")}}};
  EXPECT_TRUE(replay("refine", domains, with())["result"]["verified"]);
  Json s{{"domain", disc("0", "-3", "1/5")},
         {"points", {{{"center", "0"}, {"log_radius", {{"rat", "-2"}, {"irr", "1/3"}}}}}}};
  EXPECT_TRUE(replay("cover-with-s", s, with())["result"]["verified"]);
  // series
  EXPECT_TRUE(replay("split", {{"series", "9*t^-2 + 1/3 + 27*t^3"}}, with())["result"]["verified"]);
  EXPECT_TRUE(replay("approximate", {{"chart", "gl1"}, {"a", {"27*t^-2 + 27 + 9*t^3"}}}, with(3, 32))["result"]["verified"]);
  Json m{{"matrix", mat("1 + 243*t^2 + 2187", "9*t + 81*t^-1", "27*t", "1")},
         {"log_radius", {{"rat", "1/2"}, {"irr", "1/2"}}}};
  EXPECT_TRUE(replay("factor", m, with(3, 32))["result"]["verified"]);
}

TEST(Verify, RejectsTamperedCertificates) {
  CliOptions v = with();
  v.verify = true;
  auto r = dispatch("isotropy",
                    {{"coeffs", {"1", "1"}}, {"certificate", {{"verdict", "isotropic"}, {"witness", {"1", "1"}}}}}, v);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_FALSE(r.body["result"]["verified"]);

  Json split{{"series", "t^-1 + 5 + t"},
             {"certificate", {{"plus", "5 + t + t^-1"}, {"minus", "0"}}}};
  EXPECT_EQ(dispatch("split", split, v).exit_code, 1);

  Json m{{"matrix", mat("1", "9*t + 81*t^-1", "0", "1")}};
  CliResponse f = dispatch("factor", m, with(3, 32));
  ASSERT_EQ(f.exit_code, 0) << f.body.dump(2);
  Json cert = f.body["result"];
  cert["g1"][0][1] = "9*t + 3";
  m["certificate"] = cert;
  CliOptions v32 = with(3, 32);
  v32.verify = true;
  EXPECT_FALSE(dispatch("factor", m, v32).body["result"]["verified"]);

  Json parity{{"elements", {disc("0", "0", "1/2"), {{"outer", nullptr}, {"holes", {disc("0", "0", "1/2")["outer"]}}}}},
              {"certificate", {{"parity", {0, 0}}}}};
  EXPECT_FALSE(dispatch("parity", parity, v).body["result"]["verified"]);

  EXPECT_EQ(dispatch("ubound", {{"n", 1}}, v).exit_code, 0);  // no certificate: recomputed
}

TEST(Verify, PatchRoundTripAndTamper) {
  Json l{{"rat", "1/2"}, {"irr", "1/2"}};
  Json payload{
      {"cover",
       {{"elements",
         {{{"outer", {{"center", "0"}, {"log_radius", l}}}, {"holes", Json::array()}},
          {{"outer", nullptr}, {"holes", {{{"center", "0"}, {"log_radius", l}}}}}}}}},
      {"transitions", Json::array({mat("1 + 243*t^2 + 2187", "9*t + 81*t^-1", "27*t", "1")})}};
  CliResponse r = dispatch("patch", payload, with(3, 32));
  ASSERT_EQ(r.exit_code, 0) << r.body.dump(2);
  EXPECT_TRUE(r.body["result"]["verified"]);
  payload["certificate"] = {{"elements", r.body["result"]["elements"]}};
  CliOptions v = with(3, 32);
  v.verify = true;
  EXPECT_TRUE(dispatch("patch", payload, v).body["result"]["verified"]);
  payload["certificate"]["elements"][1]["factors"][0]["matrix"][1][0] = "1/3";
  EXPECT_EQ(dispatch("patch", payload, v).exit_code, 1);
}

TEST(Suite, GoldenFixturesPass) {
  SuiteReport r = run_suite(PATCHWORK_FIXTURES);
  EXPECT_GE(r.cases.size(), 20u);
  EXPECT_TRUE(r.ok()) << to_string(r);
}

TEST(Suite, EmptyDirectoryHasNoCases) {
  SuiteReport r = run_suite(scratch_dir("empty"));
  EXPECT_EQ(r.cases.size(), 0u);
  EXPECT_TRUE(r.ok());
}

TEST(Suite, OnePassingAndOneStaleFixture) {
  fs::path d = scratch_dir("stale");
  Json req{{"command", "ubound"}, {"payload", {{"n", 1}, {"free", true}, {"residue_us", 2}}}};
  write(d / "a.request.json", req);
  CliResponse good = run_request(req);
  write(d / "a.expected.json", {{"exit_code", good.exit_code}, {"response", good.body}});
  SuiteReport one = run_suite(d);
  ASSERT_EQ(one.cases.size(), 1u);
  EXPECT_TRUE(one.ok());
  EXPECT_NE(to_string(one).find("1/1"), std::string::npos);

  Json stale = good.body;
  stale["result"]["field"] = 5;
  write(d / "b.request.json", req);
  write(d / "b.expected.json", {{"exit_code", 0}, {"response", stale}});
  SuiteReport two = run_suite(d);
  EXPECT_FALSE(two.ok());
  EXPECT_EQ(two.passed(), 1u);
  EXPECT_NE(two.cases[1].diff.find("/response/result/field"), std::string::npos);
}

TEST(Suite, MissingExpectedFileIsAnError) {
  fs::path d = scratch_dir("missing");
  write(d / "a.request.json", {{"command", "ubound"}, {"payload", {{"n", 1}}}});
  EXPECT_THROW(run_suite(d), std::runtime_error);
}

TEST(Binary, StdinFlagsAndExitCodes) {
  std::string out;
  EXPECT_EQ(run_binary("ubound", R"({"n":1,"free":true,"residue_us":2})", out), 0);
  EXPECT_EQ(Json::parse(out)["result"]["function_field"], 8);
  EXPECT_EQ(run_binary("--prime 5 isotropy", R"({"coeffs":["1","1"]})", out), 0);
  EXPECT_EQ(Json::parse(out)["result"]["verdict"], "isotropic");
  EXPECT_EQ(run_binary("--prime 3 isotropy", R"({"coeffs":["1","1"]})", out), 0);
  EXPECT_EQ(Json::parse(out)["result"]["verdict"], "anisotropic");
  EXPECT_EQ(run_binary("--prime 9 isotropy", R"({"coeffs":["1","1"]})", out), 1);
  EXPECT_EQ(run_binary("isotropy", "{not json", out), 2);
  EXPECT_EQ(run_binary("--mode sideways decompose", "{}", out), 2);
  EXPECT_EQ(run_binary("frobnicate", "{}", out), 2);
  EXPECT_EQ(run_binary(std::string("suite ") + PATCHWORK_FIXTURES, "", out), 0);
  EXPECT_NE(out.find("cases passed"), std::string::npos);
}
