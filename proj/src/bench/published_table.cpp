#include <array>
#include <cmath>

#include <fmt/format.h>

#include "effort/bench.hpp"

namespace effort {

namespace {

PublishedTable build_published() {
  PublishedTable t;
  t.datasets = {"Albrecht", "UCP", "China", "Kemerer", "Kitchenham", "Maxwell", "Desharnais",
                "Nasa_v1"};
  t.dataset_ids = {"albrecht", "ucp",    "china",      "kemerer",
                   "kitchenham", "maxwell", "desharnais", "nasa_v1"};
  // Cells exactly as printed, so each keeps its printed precision.
  struct Row {
    const char* learner;
    std::array<const char*, 8> cells;
    const char* avg;
    int rank;
  };
  const Row rows[] = {
      {"ELM", {"16.6331", "629.94", "1093.894", "235.6355", "2128.626", "5620.87", "3220.64", "266.4382"}, "1651.585", 2},
      {"LM", {"15.8045", "164.958", "1054.242", "278.3396", "153645.8", "7029.67", "3421.006", "3194.315"}, "21100.52", 9},
      {"CART", {"22.1157", "240.049", "3547.825", "272.2882", "9162.325", "8037.73", "4064.736", "385.1687"}, "3216.53", 8},
      {"RF", {"12.7009", "44.8934", "1384.26", "234.8798", "8462.33", "6498.34", "3182.199", "309.9302"}, "2516.192", 6},
      {"PLS", {"10.4974", "154.077", "1074.498", "237.1944", "1980.67", "5655.74", "3260.64", "246.7667"}, "1577.51", 1},
      {"GP", {"14.6588", "164.425", "1004.784", "248.9476", "2183.005", "6745.83", "3244.425", "281.2831"}, "1735.92", 4},
      {"LRBS", {"17.5739", "150.628", "5954.227", "251.5505", "9635.872", "5823.03", "3033.109", "512.3311"}, "3172.29", 7},
      {"BGLM", {"15.8513", "164.958", "1054.205", "278.0983", "2148.409", "7014.36", "3375.378", "421.6358"}, "1809.112", 5},
      {"MARS", {"12.1336", "48.2936", "1133.382", "278.0625", "1815.024", "6558.64", "3749.41", "243.2443"}, "1729.774", 3},
  };
  for (const auto& r : rows) {
    t.learners.emplace_back(r.learner);
    std::vector<PrintedValue> cells;
    for (const char* c : r.cells) {
      cells.push_back(PrintedValue::parse(c));
    }
    t.cells.push_back(std::move(cells));
    t.printed_avg.push_back(PrintedValue::parse(r.avg));
    t.printed_rank.push_back(r.rank);
  }
  return t;
}

} // namespace

const PublishedTable& published_rmse_table() {
  static const PublishedTable table = build_published();
  return table;
}

bool TableVerdict::ok() const {
  for (const auto& r : rows) {
    if (!r.avg_ok || !r.rank_ok) {
      return false;
    }
  }
  return !rows.empty();
}

TableVerdict verify_published(const PublishedTable& table) {
  const auto& reference = published_rmse_table();
  TableVerdict v;
  std::vector<double> averages;
  for (const auto& row : table.cells) {
    double sum = 0;
    for (const auto& c : row) {
      sum += c.value;
    }
    averages.push_back(sum / static_cast<double>(row.size()));
  }
  const auto ranks = competition_ranks(averages);
  for (std::size_t l = 0; l < table.learners.size(); ++l) {
    PublishedRowCheck r;
    r.learner = table.learners[l];
    r.recomputed_avg = averages[l];
    r.printed_avg = table.printed_avg[l].value;
    r.recomputed_rank = ranks[l];
    r.printed_rank = table.printed_rank[l];
    r.avg_ok = std::abs(r.recomputed_avg - r.printed_avg) <= 0.01;
    r.rank_ok = r.recomputed_rank == r.printed_rank;
    if (&table != &reference && l < reference.cells.size()) {
      for (std::size_t d = 0; d < table.cells[l].size() && d < reference.cells[l].size(); ++d) {
        if (table.cells[l][d].value != reference.cells[l][d].value) {
          r.differing_cells.push_back(fmt::format("({}, {})", r.learner, table.datasets[d]));
        }
      }
    }
    v.rows.push_back(std::move(r));
  }
  return v;
}

std::string render_verdict(const TableVerdict& verdict) {
  std::string out = fmt::format("{:<6} {:>14} {:>14} {:>10} {:>6} {:>6}  {}\n", "Tech",
                                "recomputed", "printed", "|diff|", "rank", "print", "verdict");
  for (const auto& r : verdict.rows) {
    const bool ok = r.avg_ok && r.rank_ok;
    out += fmt::format("{:<6} {:>14.4f} {:>14.4f} {:>10.4f} {:>6} {:>6}  {}", r.learner,
                       r.recomputed_avg, r.printed_avg, std::abs(r.recomputed_avg - r.printed_avg),
                       r.recomputed_rank, r.printed_rank, ok ? "PASS" : "FAIL");
    if (!r.avg_ok) {
      out += " (Avg off by more than 0.01)";
    }
    if (!r.rank_ok) {
      out += " (rank mismatch)";
    }
    for (const auto& c : r.differing_cells) {
      out += " cell " + c + " differs from the printed table";
    }
    out += '\n';
  }
  out += fmt::format("overall: {}\n", verdict.ok() ? "PASS" : "FAIL");
  return out;
}

nlohmann::ordered_json published_as_report() {
  const auto& t = published_rmse_table();
  nlohmann::ordered_json j;
  j["format"] = "effort-bench-report/1";
  j["learners"] = t.learners;
  j["datasets"] = t.dataset_ids;
  nlohmann::ordered_json cells = nlohmann::ordered_json::object();
  for (std::size_t l = 0; l < t.learners.size(); ++l) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (std::size_t d = 0; d < t.dataset_ids.size(); ++d) {
      row[t.dataset_ids[d]] = t.cells[l][d].value;
    }
    cells[t.learners[l]] = std::move(row);
  }
  j["metrics"]["RMSE"]["cells"] = std::move(cells);
  return j;
}

} // namespace effort
