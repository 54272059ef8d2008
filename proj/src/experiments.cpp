#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "bvm/errors.hpp"
#include "bvm/experiments.hpp"
#include "bvm/kernels.hpp"
#include "bvm/replication.hpp"

namespace bvm {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json table_json(const CoverageTable& t) {
  return json{{"reps", t.reps},
              {"coverage", t.coverage},
              {"coverage_se", t.coverage_se},
              {"mean_sd_ratio", t.mean_sd_ratio},
              {"median_ks", t.median_ks},
              {"median_w1", t.median_w1}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

ScenarioResult run_scenario(ScenarioConfig config, const fs::path& dir, const RunOptions& options) {
  if (options.seed) config.master_seed = *options.seed;
  if (options.pilot_reuse) config.pilot.reuse = *options.pilot_reuse;
  validate(config);
  fs::create_directories(dir);
  const fs::path marker = dir / "results.incomplete";
  write_text(marker, "");
  write_text(dir / "config.txt", serialize(config));

  const auto start = std::chrono::steady_clock::now();
  const ScenarioContext context(config);
  const auto reps = static_cast<std::size_t>(config.reps);
  const bool with_density = config.density_prior.enabled && config.posterior == PosteriorMode::kMcmc;

  std::ofstream csv(dir / "results.csv", std::ios::binary | std::ios::trunc);
  std::ofstream density_csv;
  if (with_density) density_csv.open(dir / "results_density.csv", std::ios::binary | std::ios::trunc);
  if (!csv || (with_density && !density_csv)) throw std::runtime_error("cannot open results in " + dir.string());
  csv << result_csv_header() << std::flush;
  if (with_density) density_csv << result_csv_header() << std::flush;

  std::vector<std::optional<ReplicationOutcome>> outcomes(reps);
  std::mutex mutex;
  std::size_t written = 0;
  parallel_for(reps, options.jobs, [&](std::size_t i) {
    ReplicationOutcome o = run_replication(context, static_cast<int>(i));
    std::lock_guard<std::mutex> lock(mutex);
    outcomes[i] = std::move(o);
    while (written < reps && outcomes[written]) {
      csv << result_csv_line(outcomes[written]->row);
      if (with_density) density_csv << result_csv_line(*outcomes[written]->density_row);
      ++written;
    }
    csv.flush();
    if (with_density) density_csv.flush();
  });
  csv.close();
  if (with_density) density_csv.close();

  ScenarioResult result;
  std::vector<ResultRow> rows;
  std::vector<double> rep_ms;
  for (const auto& o : outcomes) {
    rows.push_back(o->row);
    rep_ms.push_back(o->row.runtime_ms);
  }
  result.table = summarize(std::move(rows));
  if (with_density) {
    std::vector<ResultRow> f_rows;
    DensityComparison cmp;
    double a_sum = 0.0, b_sum = 0.0, not_worse = 0.0;
    for (const auto& o : outcomes) {
      f_rows.push_back(*o->density_row);
      const double a = std::fabs(o->row.post_mean - o->row.chi_true);
      const double b = std::fabs(o->density_row->post_mean - o->density_row->chi_true);
      a_sum += a;
      b_sum += b;
      not_worse += a <= b ? 1.0 : 0.0;
    }
    const double m = static_cast<double>(reps);
    cmp.dp = result.table;
    cmp.density = summarize(std::move(f_rows));
    cmp.dp_mean_abs_bias = a_sum / m;
    cmp.density_mean_abs_bias = b_sum / m;
    cmp.dp_not_worse_share = not_worse / m;
    result.density = std::move(cmp);
  }
  result.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  json summary = table_json(result.table);
  summary["schema"] = 1;
  summary["chi_true"] = context.truth().chi();
  summary["var_eff"] = context.truth().summary().var_eff;
  summary["ci_level"] = config.ci_level;
  summary["center_kind"] = to_string(config.center_kind);
  summary["prior"] = to_string(config.prior.kind);
  if (result.density) {
    summary["density"] = table_json(result.density->density);
    summary["density"]["dp_mean_abs_bias"] = result.density->dp_mean_abs_bias;
    summary["density"]["density_mean_abs_bias"] = result.density->density_mean_abs_bias;
    summary["density"]["dp_not_worse_share"] = result.density->dp_not_worse_share;
  }
  summary["metadata"] = json{{"runtime_ms", result.runtime_ms},
                             {"replication_runtime_ms", rep_ms},
                             {"isa", std::string(kernels::isa_name(kernels::active_isa()))},
                             {"jobs", options.jobs}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  fs::remove(marker);
  return result;
}

PlotsReport emit_plots_data(const fs::path& dir) {
  PlotsReport report;
  std::vector<fs::path> cells;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory()) cells.push_back(entry.path());
    }
  }
  std::sort(cells.begin(), cells.end());
  std::ostringstream out;
  out << "x,y,metric,value\n";
  for (const auto& cell : cells) {
    const std::string name = cell.filename().string();
    if (fs::exists(cell / "results.incomplete") || !fs::exists(cell / "summary.json")) {
      report.skipped.push_back(name);
      continue;
    }
    json summary;
    json coords = json{{"x", 0.0}, {"y", 0.0}};
    try {
      std::ifstream in(cell / "summary.json");
      summary = json::parse(in);
      if (fs::exists(cell / "cell.json")) {
        std::ifstream cin(cell / "cell.json");
        coords = json::parse(cin);
      }
    } catch (const std::exception&) {
      report.skipped.push_back(name);
      continue;
    }
    const std::string x = format_double(coords.value("x", 0.0));
    const std::string y = format_double(coords.value("y", 0.0));
    const std::string label = coords.value("label", std::string());
    const std::string prefix = label.empty() ? "" : label + ":";
    for (const char* metric : {"coverage", "mean_sd_ratio", "median_ks", "median_w1"}) {
      if (!summary.contains(metric)) continue;
      out << x << ',' << y << ',' << prefix << metric << ',' << format_double(summary[metric].get<double>())
          << '\n';
      ++report.rows;
    }
    if (summary.contains("density")) {
      for (const char* metric : {"coverage", "dp_mean_abs_bias", "density_mean_abs_bias", "dp_not_worse_share"}) {
        out << x << ',' << y << ',' << prefix << "density_" << metric << ','
            << format_double(summary["density"][metric].get<double>()) << '\n';
        ++report.rows;
      }
    }
  }
  fs::create_directories(dir);
  write_text(dir / "plots.csv", out.str());
  return report;
}

}  // namespace bvm
