#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "chern/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prescribed Chern scalar curvature experiments"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Run one experiment config");
  std::string config;
  std::string out;
  int jobs = 1;
  bool plot = false;
  run->add_option("config", config, "JSON experiment config")->required();
  run->add_option("--out", out, "Output directory (default: config 'output' or ./out)");
  run->add_option("--jobs", jobs, "Concurrent sweep children")->check(CLI::PositiveNumber);
  run->add_flag("--plot", plot, "Also write plot.svg");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << "ERR:4:usage: " << e.what() << '\n';
    return code == 0 ? 0 : 4;
  }

  chern::RunContext ctx;
  ctx.out = out;
  ctx.jobs = jobs;
  ctx.plot = plot;
  const chern::RunOutcome r = chern::run_config_file(config, ctx);
  if (r.exit_code != 0) {
    std::cerr << r.message << '\n';
    return r.exit_code;
  }
  for (const auto& [k, v] : r.summary.metrics) std::printf("%s=%s\n", k.c_str(), chern::fmt(v).c_str());
  return 0;
}
