#include <limits>

#include <fmt/format.h>

#include "effort/bench.hpp"
#include "effort/error.hpp"

namespace effort {

Comparison compare_report(const nlohmann::json& report, const PublishedTable& table) {
  if (!report.contains("metrics") || !report["metrics"].contains("RMSE") ||
      !report["metrics"]["RMSE"].contains("cells")) {
    throw DataError("compare: report has no RMSE cells");
  }
  const auto& cells = report["metrics"]["RMSE"]["cells"];
  Comparison c;
  for (std::size_t d = 0; d < table.dataset_ids.size(); ++d) {
    const auto& id = table.dataset_ids[d];
    DatasetAgreement agreement{table.datasets[d], "", "", false};
    double our_best = std::numeric_limits<double>::infinity();
    double published_best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t l = 0; l < table.learners.size(); ++l) {
      const auto& learner = table.learners[l];
      if (!cells.contains(learner) || !cells[learner].contains(id) ||
          !cells[learner][id].is_number()) {
        continue;
      }
      any = true;
      const double ours = cells[learner][id].get<double>();
      const double published = table.cells[l][d].value;
      const double ratio = ours / published;
      c.cells.push_back(CellComparison{learner, table.datasets[d], ours, published, ratio,
                                       ratio > 3.0 || ratio < 1.0 / 3.0});
      if (ours < our_best) {
        our_best = ours;
        agreement.our_best = learner;
      }
      if (published < published_best) {
        published_best = published;
        agreement.published_best = learner;
      }
    }
    if (!any) {
      c.not_compared.push_back(table.datasets[d]);
      continue;
    }
    agreement.agree = agreement.our_best == agreement.published_best;
    c.agreement.push_back(std::move(agreement));
  }
  return c;
}

std::string render_comparison(const Comparison& c) {
  std::string out = "# RMSE comparison against the published table\n\n";
  out += "Informational only: seeds, grids and preprocessing of the published runs are unknown.\n\n";
  out += "| Tech | Dataset | ours | published | ratio | >3x |\n|---|---|---:|---:|---:|:---:|\n";
  std::size_t flagged = 0;
  for (const auto& cell : c.cells) {
    out += fmt::format("| {} | {} | {} | {} | {:.3f} | {} |\n", cell.learner, cell.dataset,
                       format_value(cell.ours), format_value(cell.published), cell.ratio,
                       cell.flagged ? "FLAG" : "");
    flagged += cell.flagged ? 1 : 0;
  }
  out += fmt::format("\n{} of {} cells deviate by more than 3x.\n\n", flagged, c.cells.size());
  out += "| Dataset | our best | published best | agree |\n|---|---|---|:---:|\n";
  for (const auto& a : c.agreement) {
    out += fmt::format("| {} | {} | {} | {} |\n", a.dataset, a.our_best, a.published_best,
                       a.agree ? "yes" : "no");
  }
  for (const auto& d : c.not_compared) {
    out += fmt::format("| {} | - | - | not compared |\n", d);
  }
  return out;
}

} // namespace effort
