#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bvm/errors.hpp"
#include "bvm/experiments.hpp"

namespace bvm {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Defaults shared by the suites: the smooth regime of the coverage runs.
ScenarioConfig base_config() {
  ScenarioConfig c;
  c.n = 1000;
  c.reps = 200;
  c.truth.alpha = 2.0;
  c.truth.beta = 2.0;
  c.truth.amp_a = 1.0;
  c.truth.amp_b = 1.0;
  c.prior.kind = PriorKind::kSeries;
  c.prior.betabar = 2.0;
  return c;
}

// Rough propensity, smooth regression, aligned fine structure: the cells
// where the product prior's bias term does not vanish fast enough.
ScenarioConfig robustness_config(double alpha, double beta) {
  ScenarioConfig c = base_config();
  c.truth.alpha = alpha;
  c.truth.beta = beta;
  c.truth.amp_a = 4.0;
  c.truth.amp_b = 4.0;
  c.truth.offset_a = 0.0;
  c.truth.shared_multipliers = true;
  c.prior.betabar = beta;
  c.center_kind = CenterKind::kAipw;
  const auto n_pilot = static_cast<double>(c.n) * c.pilot.split_fraction;
  c.pilot.bins = static_cast<int>(std::ceil(std::pow(n_pilot, 1.0 / (2.0 * alpha + 1.0))));
  return c;
}

ScenarioConfig density_config() {
  ScenarioConfig c = base_config();
  c.n = 2000;
  c.reps = 100;
  c.truth.beta = 0.5;
  c.truth.gamma = 0.3;
  c.truth.amp_b = 2.0;
  c.truth.amp_f = 2.0;
  c.truth.synthesized_density = true;
  c.truth.shared_multipliers = true;
  c.prior.betabar = 0.5;
  c.density_prior.enabled = true;
  c.density_prior.gammabar = 3.0;
  return c;
}

void apply(ScenarioConfig& c, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override must be key=value");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    set_config_value(c, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
}

std::string num(double x) {
  std::string s = format_double(x);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"smoothness-grid", "single-robustness", "dp-vs-density", "dp-laplace"};
}

std::string smoothness_flag(double alpha, double beta, int d) {
  const double lhs = alpha / (2.0 * alpha + d) + beta / (2.0 * beta + d);
  if (std::fabs(lhs - 0.5) <= 1e-12) return "at-threshold";
  return lhs > 0.5 ? "above" : "below";
}

std::vector<SuiteCell> expand_suite(const std::string& name, const std::vector<std::string>& overrides) {
  std::vector<SuiteCell> cells;
  if (name == "smoothness-grid") {
    const double grid[] = {0.25, 0.5, 1.0, 2.0};
    for (double a : grid) {
      for (double b : grid) {
        SuiteCell cell;
        cell.config = base_config();
        cell.config.truth.alpha = a;
        cell.config.truth.beta = b;
        cell.config.prior.betabar = b;
        apply(cell.config, overrides);
        cell.x = a;
        cell.y = b;
        cell.label = smoothness_flag(a, b, cell.config.d);
        cell.name = "alpha" + num(a) + "_beta" + num(b);
        cells.push_back(std::move(cell));
      }
    }
  } else if (name == "single-robustness") {
    const std::pair<double, double> grid[] = {{0.3, 2.0}, {0.3, 1.0}, {0.5, 1.0}};
    for (const auto& [a, b] : grid) {
      for (PriorKind kind : {PriorKind::kSeries, PriorKind::kPropensityDependent}) {
        SuiteCell cell;
        cell.config = robustness_config(a, b);
        cell.config.prior.kind = kind;
        apply(cell.config, overrides);
        cell.x = a;
        cell.y = b;
        cell.label = to_string(kind);
        cell.name = "alpha" + num(a) + "_beta" + num(b) + "_" + cell.label;
        cells.push_back(std::move(cell));
      }
    }
  } else if (name == "dp-vs-density") {
    SuiteCell cell;
    cell.config = density_config();
    apply(cell.config, overrides);
    cell.x = cell.config.truth.gamma;
    cell.y = cell.config.density_prior.gammabar;
    cell.label = "dp-vs-density";
    cell.name = "gamma" + num(cell.x) + "_gammabar" + num(cell.y);
    cells.push_back(std::move(cell));
  } else if (name == "dp-laplace") {
    SuiteCell cell;
    cell.config = base_config();
    cell.config.n = 2000;
    cell.config.reps = 100000;
    apply(cell.config, overrides);
    cell.label = "dp-laplace";
    cell.name = "laplace";
    cells.push_back(std::move(cell));
  } else {
    throw ArgumentError("unknown suite '" + name + "'");
  }
  for (const auto& cell : cells) validate(cell.config);
  return cells;
}

SuiteReport run_suite(const std::string& name, const std::vector<std::string>& overrides,
                      const fs::path& dir, const RunOptions& options) {
  const std::vector<SuiteCell> cells = expand_suite(name, overrides);
  fs::create_directories(dir);
  SuiteReport report;

  if (name == "dp-laplace") {
    ScenarioConfig c = cells.front().config;
    if (options.seed) c.master_seed = *options.seed;
    const GridFunction f0 = GridFunction::constant(1, 14, 1.0);
    const auto rows = dp_laplace_check(f0, [](const Point& z) { return z[0]; }, c.n, {-1.0, -0.5, 0.0, 0.5, 1.0},
                                       static_cast<std::size_t>(c.reps), c.master_seed, c.dp);
    std::ostringstream out;
    out << "t,estimate,analytic,ratio,mc_se\n";
    for (const auto& r : rows) {
      out << format_double(r.t) << ',' << format_double(r.estimate) << ',' << format_double(r.analytic) << ','
          << format_double(r.ratio) << ',' << format_double(r.mc_se) << '\n';
    }
    write_text(dir / "laplace.csv", out.str());
    report.completed = 1;
    return report;
  }

  std::ostringstream summary;
  summary << "cell,x,y,label,reps,coverage,coverage_se,mean_sd_ratio,median_ks,median_w1,"
             "density_coverage,dp_not_worse_share\n";
  for (const auto& cell : cells) {
    const fs::path cell_dir = dir / cell.name;
    try {
      fs::create_directories(cell_dir);
      write_text(cell_dir / "cell.json",
                 json{{"x", cell.x}, {"y", cell.y}, {"label", cell.label}, {"suite", name}}.dump(2) + "\n");
      const ScenarioResult r = run_scenario(cell.config, cell_dir, options);
      const CoverageTable& t = r.table;
      summary << cell.name << ',' << num(cell.x) << ',' << num(cell.y) << ',' << cell.label << ',' << t.reps
              << ',' << num(t.coverage) << ',' << num(t.coverage_se) << ',' << num(t.mean_sd_ratio) << ','
              << num(t.median_ks) << ',' << num(t.median_w1) << ',';
      if (r.density) {
        summary << num(r.density->density.coverage) << ',' << num(r.density->dp_not_worse_share);
      } else {
        summary << ',';
      }
      summary << '\n';
      ++report.completed;
    } catch (const std::exception& e) {
      report.failures.emplace_back(cell.name, e.what());
    }
  }
  write_text(dir / "suite_summary.csv", summary.str());
  return report;
}

}  // namespace bvm
