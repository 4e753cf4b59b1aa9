// effort_bench: command line front end for the effort-estimation benchmark.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "effort/bench.hpp"
#include "effort/error.hpp"

using namespace effort;

namespace {

struct Options {
  std::string registry = default_registry_path().string();
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  int jobs = 1;
  double tolerance = 0.0;
  std::string dataset;
  std::string config;
  std::string report;
  std::string emit_report;
};

int cmd_list(const Options& o) {
  const auto reg = Registry::load(o.registry);
  fmt::print("datasets ({}):\n", o.registry);
  for (const auto& e : reg.entries()) {
    fmt::print("  {:<11} {:<9} {} features  {}\n", e.id, e.vendored() ? "vendored" : "missing",
               e.schema.size(), e.title);
  }
  fmt::print("learners:\n");
  for (auto k : benchmark_kinds()) {
    const auto g = default_grid(k);
    fmt::print("  {:<5} {} candidates  {}\n", kind_name(k), g.size(), grid_to_json(g).dump());
  }
  return kExitOk;
}

int cmd_profile(const Options& o) {
  const auto reg = Registry::load(o.registry);
  const auto& entry = reg.at(o.dataset);
  const auto d = load_dataset(entry);
  const auto stats = compute_profile(d);
  const auto report = validate_profile(stats, entry.expected_profile, o.tolerance, entry.waivers);

  fmt::print("{} ({} rows, sha256 {})\n", entry.title, d.rows(), d.source_checksum);
  fmt::print("{:<16} {:>5} {:>16} {:>16}  {}\n", "column", "stat", "computed", "expected",
             "verdict");
  for (const auto& c : report.cells) {
    const char* verdict = c.pass ? "pass" : (c.waiver ? "WAIVED" : "FAIL");
    fmt::print("{:<16} {:>5} {:>16.{}f} {:>16.{}f}  {}{}\n", c.column, c.stat, c.computed,
               c.expected.decimals + 1, c.expected.value, c.expected.decimals, verdict,
               c.waiver ? " (" + *c.waiver + ")" : "");
  }
  fmt::print("{} cells, {} failed, {} waived: {}\n", report.cells.size(), report.failures(),
             report.waived(), report.ok() ? "PASS" : "FAIL");
  return report.ok() ? kExitOk : kExitVerification;
}

int cmd_run(const Options& o) {
  std::string text;
  try {
    text = read_file(o.config);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  if (o.seed) {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_object()) {
      doc["seed"] = *o.seed;
      text = doc.dump();
    }
  }
  const auto cfg = parse_config(text);
  const auto reg = Registry::load(o.registry);
  validate_config(cfg, reg);
  const auto report = run_benchmark(cfg, reg, o.jobs, [](const CellResult& c) {
    if (c.error) {
      fmt::print(stderr, "  {:<5} {:<11} FAILED: {}\n", c.learner, c.dataset, *c.error);
    } else {
      fmt::print(stderr, "  {:<5} {:<11} RMSE {}\n", c.learner, c.dataset,
                 format_value(c.rmse->value));
    }
  });
  const auto paths = write_report(report, o.out);
  if (report.rmse) {
    fmt::print("{}", report_markdown(*report.rmse, "RMSE"));
  }
  fmt::print("wrote {}, {}, {}\n", paths.json.string(), paths.markdown.string(),
             paths.chart.string());
  if (!report.complete()) {
    fmt::print(stderr, "{} cell(s) failed; manifest in {}\n", report.failures().size(),
               paths.failures.string());
    return kExitComputation;
  }
  return kExitOk;
}

int cmd_verify(const Options& o) {
  const auto verdict = verify_published(published_rmse_table());
  fmt::print("{}", render_verdict(verdict));
  if (!o.emit_report.empty()) {
    std::ofstream(o.emit_report) << published_as_report().dump(2) << "\n";
  }
  return verdict.ok() ? kExitOk : kExitVerification;
}

int cmd_compare(const Options& o) {
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(read_file(o.report));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("compare: unreadable report '" + o.report + "': " + e.what());
  }
  const auto doc = render_comparison(compare_report(report, published_rmse_table()));
  fmt::print("{}", doc);
  if (!o.out.empty() && o.out != "results") {
    std::filesystem::create_directories(o.out);
    std::ofstream(std::filesystem::path(o.out) / "comparison.md") << doc;
  }
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Software effort estimation benchmark (LOOCV with nested tuning)"};
  Options o;
  app.require_subcommand(1);
  app.add_option("--registry", o.registry, "Dataset registry JSON");
  app.add_option("--seed", o.seed, "Override the config seed");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--jobs", o.jobs, "Threads for the fold loop")->check(CLI::PositiveNumber);

  app.fallthrough();
  auto* list = app.add_subcommand("list", "List datasets and learners");
  auto* profile = app.add_subcommand("profile", "Profile a dataset against its published table");
  profile->add_option("id", o.dataset)->required();
  profile->add_option("--tolerance", o.tolerance, "Relative tolerance (default: last printed digit)");
  auto* run = app.add_subcommand("run", "Run a benchmark config");
  run->add_option("config", o.config)->required();
  auto* verify = app.add_subcommand("verify-paper", "Check the published table's Avg and Rank");
  verify->add_option("--emit-report", o.emit_report, "Write the table as a report JSON");
  auto* compare = app.add_subcommand("compare", "Compare a report with the published table");
  compare->add_option("report", o.report)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (list->parsed()) return cmd_list(o);
    if (profile->parsed()) return cmd_profile(o);
    if (run->parsed()) return cmd_run(o);
    if (verify->parsed()) return cmd_verify(o);
    if (compare->parsed()) return cmd_compare(o);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitComputation;
  }
  return kExitConfig;
}
