#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>

#include "patchwork/cli.hpp"

int main(int argc, char** argv) {
  using namespace patchwork;
  CLI::App app{"Exact quadratic-form, Berkovich-line and patching engines over JSON"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string mode = "free";
  bool json_out = true;
  app.add_option("--prime,-p", opts.prime, "odd prime p")->capture_default_str();
  app.add_option("--precision,-N", opts.precision, "series precision N")->capture_default_str();
  app.add_option("--seed", opts.seed, "seed for randomized routines")->capture_default_str();
  app.add_option("--mode", mode, "decomposition mode")->check(CLI::IsMember({"free", "general"}))->capture_default_str();
  app.add_flag("--verify", opts.verify, "replay the certificate in the payload instead of searching");
  app.add_flag("--json", json_out, "JSON output (default)");
  app.add_flag("--trace", opts.trace, "include traces and print iteration lines on stderr");

  std::string input;
  for (const auto& name : cli::command_names()) {
    auto* sub = app.add_subcommand(name, "run " + name + " on a JSON payload");
    sub->add_option("input", input, "payload file (stdin when omitted)");
  }
  std::string suite_dir;
  auto* suite = app.add_subcommand("suite", "run request/expected fixture pairs");
  suite->add_option("dir", suite_dir, "fixture directory")->required();
  bool update = false;
  suite->add_flag("--update", update, "rewrite expected files from the current output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opts.mode = mode == "free" ? DecompositionMode::free : DecompositionMode::general;

  if (suite->parsed()) {
    try {
      SuiteReport r = run_suite(suite_dir, update);
      std::cout << to_string(r);
      return r.ok() ? 0 : 1;
    } catch (const std::exception& e) {
      std::cerr << "suite: " << e.what() << "\n";
      return 2;
    }
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::string text;
  if (input.empty() || input == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), {});
  } else {
    std::ifstream in(input);
    if (!in) {
      std::cerr << "cannot read " << input << "\n";
      return 2;
    }
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  CliResponse r;
  try {
    r = dispatch(command, Json::parse(text), opts);
  } catch (const Json::parse_error& e) {
    r = cli::error_response(2, "schema", e.what());
  }
  for (const auto& line : r.trace_lines)
    if (opts.trace) std::cerr << line << "\n";
  std::cout << r.body.dump(2) << "\n";
  return r.exit_code;
}
