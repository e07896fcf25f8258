// Command line front end: run experiments, aggregate summaries, draw art.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "curio/art.hpp"
#include "curio/errors.hpp"
#include "curio/experiment.hpp"

namespace {

enum Exit { ok = 0, bad_config = 2, io_failure = 3 };

int run_command(const std::string& config_path, const std::string& output_dir) {
  curio::ExperimentConfig config;
  try {
    config = curio::load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (auto errors = curio::validate(config); !errors.empty()) throw curio::ConfigError(errors);
  } catch (const curio::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return bad_config;
  }
  try {
    const auto result = curio::run_experiment(config);
    std::cout << "wrote " << result.seeds.size() << " seed run(s) to " << result.directory.string() << '\n';
    for (const auto& s : result.seeds) {
      if (s.incomplete) std::cerr << "warning: seed " << s.seed << " aborted early (environment fault)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io_failure;
  }
  return ok;
}

int report_command(const std::vector<std::string>& files, const std::string& out_path) {
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  std::vector<curio::ColumnStats> stats;
  try {
    stats = curio::aggregate_summaries(paths);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_config;
  }
  if (out_path.empty()) {
    curio::write_report_csv(std::cout, stats);
    return ok;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << out_path << '\n';
    return io_failure;
  }
  curio::write_report_csv(out, stats);
  return ok;
}

int art_command(const std::string& procedure, unsigned depth, const std::string& mask_path,
                const std::string& svg_path, std::string report_path) {
  namespace art = curio::art;
  art::Drawing d;
  try {
    d = procedure == "face_grid" ? art::face_grid(depth) : art::fractal_circles(depth);
    if (!mask_path.empty()) {
      std::ifstream in(mask_path);
      if (!in) throw std::runtime_error("cannot read mask " + mask_path);
      d = art::apply_selection(d, art::parse_selection_mask(in, d.primitives.size()));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_config;
  }
  if (report_path.empty()) report_path = std::filesystem::path(svg_path).replace_extension(".json").string();
  std::ofstream svg(svg_path, std::ios::binary), rep(report_path, std::ios::binary);
  if (!svg || !rep) {
    std::cerr << "error: cannot write " << (svg ? report_path : svg_path) << '\n';
    return io_failure;
  }
  art::write_svg(d, svg);
  art::write_report_json(d, rep);
  const auto enc = art::encoding_report(d);
  std::cout << procedure << " depth " << depth << ": " << d.primitives.size() << " primitives, naive "
            << enc.naive_bits << " bits, programmatic " << enc.programmatic_bits.value_or(-1) << " bits\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curio: curiosity-driven agents rewarded by compression progress"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  auto* run = app.add_subcommand("run", "run every seed of an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "override the config's output_dir");

  std::vector<std::string> summaries;
  std::string report_out;
  auto* report = app.add_subcommand("report", "aggregate summary.csv files across seeds");
  report->add_option("summaries", summaries, "summary files")->required()->check(CLI::ExistingFile);
  report->add_option("-o,--out", report_out, "write the table here instead of stdout");

  std::string procedure = "fractal_circles", mask, svg_path = "drawing.svg", art_report;
  unsigned depth = 0;
  auto* art_cmd = app.add_subcommand("art", "emit a construction scaffold as SVG plus a bit report");
  art_cmd->add_option("-p,--procedure", procedure, "face_grid or fractal_circles")
      ->check(CLI::IsMember({"face_grid", "fractal_circles"}));
  art_cmd->add_option("-d,--depth", depth, "bisection rounds or circle recursion depth");
  art_cmd->add_option("-m,--mask", mask, "selection mask file")->check(CLI::ExistingFile);
  art_cmd->add_option("-o,--out", svg_path, "SVG output path");
  art_cmd->add_option("-r,--report", art_report, "JSON report path (default: next to the SVG)");

  CLI11_PARSE(app, argc, argv);

  if (*run) return run_command(config_path, output_dir);
  if (*report) return report_command(summaries, report_out);
  return art_command(procedure, depth, mask, svg_path, art_report);
}
