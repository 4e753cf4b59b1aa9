#include <fstream>

#include <fmt/format.h>

#include "effort/bench.hpp"
#include "effort/error.hpp"

namespace effort {

using ojson = nlohmann::ordered_json;

std::string format_value(double v) { return fmt::format("{:.4f}", v); }

bool BenchReport::complete() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return !c.error; });
}

std::vector<const CellResult*> BenchReport::failures() const {
  std::vector<const CellResult*> out;
  for (const auto& c : cells) {
    if (c.error) {
      out.push_back(&c);
    }
  }
  return out;
}

BenchReport run_benchmark(const RunConfig& config, const Registry& registry, int jobs,
                          const ProgressFn& progress) {
  validate_config(config, registry);
  std::vector<Dataset> datasets;
  for (const auto& id : config.datasets) {
    datasets.push_back(load_dataset(registry.at(id)));
  }
  return run_benchmark(config, datasets, jobs, progress);
}

BenchReport run_benchmark(const RunConfig& config, const std::vector<Dataset>& datasets, int jobs,
                          const ProgressFn& progress) {
  BenchReport report;
  report.config = config;
  for (const auto& d : datasets) {
    report.datasets.push_back(DatasetInfo{d.id, d.source_checksum, d.rows(), d.feature_names()});
  }
  const RngStream base(config.seed);
  const LoocvOptions options{config.inner_folds, jobs};

  CellMap rmse_cells, mmre_cells, mae_cells;
  bool mmre_complete = config.wants("MMRE");
  for (const auto& learner : config.learners) {
    const auto lname = std::string(kind_name(learner.kind));
    for (const auto& d : datasets) {
      CellResult cell{lname, d.id, {}, {}, {}, {}, {}, {}};
      try {
        cell.records = loocv_run(d, learner.grid, base, options);
        cell.rmse = rmse(cell.records);
        cell.mae = mean_fold_error(cell.records);
        rmse_cells[{lname, d.id}] = cell.rmse->value;
        mae_cells[{lname, d.id}] = cell.mae->value;
        if (config.wants("MMRE")) {
          try {
            cell.mmre = mmre(cell.records);
            mmre_cells[{lname, d.id}] = cell.mmre->value;
          } catch (const MetricError& e) {
            cell.mmre_error = e.what();
            mmre_complete = false;
          }
        }
      } catch (const ComputationError& e) {
        cell.error = e.what();
      }
      if (progress) {
        progress(cell);
      }
      report.cells.push_back(std::move(cell));
    }
  }

  if (report.complete()) {
    std::vector<std::string> learners, ids;
    for (const auto& l : config.learners) {
      learners.emplace_back(kind_name(l.kind));
    }
    for (const auto& d : datasets) {
      ids.push_back(d.id);
    }
    report.rmse = aggregate(learners, ids, rmse_cells);
    report.mae = aggregate(learners, ids, mae_cells);
    if (mmre_complete) {
      report.mmre = aggregate(learners, ids, mmre_cells);
    }
  }
  return report;
}

namespace {

ojson param_json(const Params& params) {
  ojson j = ojson::object();
  for (const auto& [k, v] : params) {
    if (const auto* d = std::get_if<double>(&v)) {
      j[k] = *d;
    } else {
      j[k] = std::get<std::string>(v);
    }
  }
  return j;
}

ojson table_json(const SummaryTable& t) {
  ojson j;
  ojson cells = ojson::object();
  ojson avg = ojson::object();
  ojson rank = ojson::object();
  for (std::size_t l = 0; l < t.learners.size(); ++l) {
    ojson row = ojson::object();
    for (std::size_t d = 0; d < t.datasets.size(); ++d) {
      row[t.datasets[d]] = t.cells[l][d];
    }
    cells[t.learners[l]] = std::move(row);
    avg[t.learners[l]] = t.averages[l];
    rank[t.learners[l]] = t.ranks[l];
  }
  j["cells"] = std::move(cells);
  j["average"] = std::move(avg);
  j["rank"] = std::move(rank);
  return j;
}

// Partial matrix for an incomplete run: only cells that finished.
ojson partial_json(const BenchReport& r, const std::optional<MetricValue> CellResult::*field) {
  ojson cells = ojson::object();
  for (const auto& c : r.cells) {
    if (c.*field) {
      cells[c.learner][c.dataset] = (c.*field)->value;
    }
  }
  return ojson{{"cells", std::move(cells)}};
}

} // namespace

ojson report_to_json(const BenchReport& report) {
  const auto& cfg = report.config;
  ojson j;
  j["format"] = "effort-bench-report/1";

  ojson prov;
  prov["config_sha256"] = sha256_hex(cfg.canonical);
  prov["config"] = ojson::parse(cfg.canonical);
  prov["seed"] = cfg.seed;
  prov["inner_folds"] = cfg.inner_folds;
  prov["rng"] = "splitmix64-counter; fold stream = split(seed, [dataset, learner, fold])";
  ojson ds = ojson::object();
  for (const auto& d : report.datasets) {
    ds[d.id] = {{"sha256", d.sha256}, {"rows", d.rows}, {"schema", d.schema}};
  }
  prov["datasets"] = std::move(ds);
  ojson grids = ojson::object();
  for (const auto& l : cfg.learners) {
    grids[std::string(kind_name(l.kind))] = grid_to_json(l.grid);
  }
  prov["grids"] = std::move(grids);
  j["provenance"] = std::move(prov);

  std::vector<std::string> learners, datasets;
  for (const auto& l : cfg.learners) {
    learners.emplace_back(kind_name(l.kind));
  }
  for (const auto& d : report.datasets) {
    datasets.push_back(d.id);
  }
  j["learners"] = learners;
  j["datasets"] = datasets;

  ojson metrics;
  metrics["RMSE"] = report.rmse ? table_json(*report.rmse) : partial_json(report, &CellResult::rmse);
  metrics["MAE"] = report.mae ? table_json(*report.mae) : partial_json(report, &CellResult::mae);
  if (cfg.wants("MMRE")) {
    metrics["MMRE"] =
        report.mmre ? table_json(*report.mmre) : partial_json(report, &CellResult::mmre);
  }
  j["metrics"] = std::move(metrics);

  ojson records = ojson::object();
  for (const auto& c : report.cells) {
    ojson arr = ojson::array();
    for (const auto& r : c.records) {
      arr.push_back({{"fold", r.fold_index},
                     {"predicted", r.predicted},
                     {"actual", r.actual},
                     {"params", param_json(r.chosen_params)}});
    }
    records[c.learner][c.dataset] = std::move(arr);
  }
  j["records"] = std::move(records);

  ojson notes = ojson::array();
  ojson failures = ojson::array();
  for (const auto& c : report.cells) {
    if (c.error) {
      failures.push_back({{"learner", c.learner}, {"dataset", c.dataset}, {"error", *c.error}});
    }
    if (c.mmre_error) {
      notes.push_back({{"learner", c.learner}, {"dataset", c.dataset}, {"mmre", *c.mmre_error}});
    }
  }
  j["failures"] = std::move(failures);
  j["notes"] = std::move(notes);
  return j;
}

std::string report_markdown(const SummaryTable& t, const std::string& metric) {
  std::string out = fmt::format("Summary of {} values of all datasets\n\n| Tech / Datasets |", metric);
  for (const auto& d : t.datasets) {
    out += " " + d + " |";
  }
  out += " Avg | Rank |\n|---|";
  for (std::size_t d = 0; d < t.datasets.size() + 2; ++d) {
    out += "---:|";
  }
  out += '\n';
  for (std::size_t l = 0; l < t.learners.size(); ++l) {
    out += "| " + t.learners[l] + " |";
    for (double v : t.cells[l]) {
      out += " " + format_value(v) + " |";
    }
    out += " " + format_value(t.averages[l]) + " | " + std::to_string(t.ranks[l]) + " |\n";
  }
  return out;
}

std::string chart_csv(const BenchReport& report) {
  std::string out = "learner,dataset,rmse\n";
  for (const auto& c : report.cells) {
    if (c.rmse) {
      out += fmt::format("{},{},{}\n", c.learner, c.dataset, format_value(c.rmse->value));
    }
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + path.string() + "'");
  }
  out << text;
}

} // namespace

ReportPaths write_report(const BenchReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  ReportPaths paths{out_dir / "report.json", out_dir / "report.md", out_dir / "chart.csv", {}};
  write_text(paths.json, report_to_json(report).dump(2) + "\n");

  std::string md;
  if (report.rmse) {
    md = report_markdown(*report.rmse, "RMSE");
    if (report.mmre) {
      md += "\n" + report_markdown(*report.mmre, "MMRE");
    }
    if (report.mae) {
      md += "\n" + report_markdown(*report.mae, "mean per-fold absolute error");
    }
  } else {
    md = "Run incomplete; see failures.json.\n";
  }
  write_text(paths.markdown, md);
  write_text(paths.chart, chart_csv(report));

  const auto failures = report.failures();
  if (!failures.empty()) {
    paths.failures = out_dir / "failures.json";
    ojson f = ojson::array();
    for (const auto* c : failures) {
      f.push_back({{"learner", c->learner}, {"dataset", c->dataset}, {"error", *c->error}});
    }
    write_text(paths.failures, f.dump(2) + "\n");
  }
  return paths;
}

} // namespace effort
