#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "bvm/errors.hpp"
#include "bvm/scenario.hpp"

namespace bvm {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  return x;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

template <typename Int>
std::string int_str(Int x) {
  return std::to_string(x);
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

template <typename F>
auto enum_value(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const ArgumentError& e) {
    throw ConfigError(key, e.what());
  }
}

struct Field {
  const char* key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const std::string&)> set;
};

#define BVM_DOUBLE(KEY, MEMBER)                                                        \
  Field {                                                                              \
    KEY, [](const ScenarioConfig& c) { return format_double(c.MEMBER); },              \
        [](ScenarioConfig& c, const std::string& v) { c.MEMBER = to_double(KEY, v); } \
  }
#define BVM_INT(KEY, MEMBER)                                                                      \
  Field {                                                                                         \
    KEY, [](const ScenarioConfig& c) { return int_str(c.MEMBER); },                               \
        [](ScenarioConfig& c, const std::string& v) { c.MEMBER = to_int<decltype(c.MEMBER)>(KEY, v); } \
  }
#define BVM_BOOL(KEY, MEMBER)                                                        \
  Field {                                                                            \
    KEY, [](const ScenarioConfig& c) { return bool_str(c.MEMBER); },                 \
        [](ScenarioConfig& c, const std::string& v) { c.MEMBER = to_bool(KEY, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      BVM_INT("n", n),
      BVM_INT("d", d),
      BVM_INT("reps", reps),
      BVM_INT("master_seed", master_seed),
      Field{"center_kind", [](const ScenarioConfig& c) { return to_string(c.center_kind); },
            [](ScenarioConfig& c, const std::string& v) {
              if (v == "oracle") {
                c.center_kind = CenterKind::kOracle;
              } else if (v == "aipw") {
                c.center_kind = CenterKind::kAipw;
              } else {
                throw ConfigError("center_kind", "expected oracle or aipw, got '" + v + "'");
              }
            }},
      BVM_DOUBLE("ci_level", ci_level),
      Field{"out_path", [](const ScenarioConfig& c) { return c.out_path; },
            [](ScenarioConfig& c, const std::string& v) { c.out_path = v; }},
      Field{"posterior", [](const ScenarioConfig& c) { return to_string(c.posterior); },
            [](ScenarioConfig& c, const std::string& v) {
              if (v == "mcmc") {
                c.posterior = PosteriorMode::kMcmc;
              } else if (v == "exact-normal") {
                c.posterior = PosteriorMode::kExactNormal;
              } else {
                throw ConfigError("posterior", "expected mcmc or exact-normal, got '" + v + "'");
              }
            }},
      BVM_DOUBLE("truth.alpha", truth.alpha),
      BVM_DOUBLE("truth.beta", truth.beta),
      BVM_DOUBLE("truth.gamma", truth.gamma),
      BVM_INT("truth.seed_a", truth.seed_a),
      BVM_INT("truth.seed_b", truth.seed_b),
      BVM_INT("truth.seed_f", truth.seed_f),
      BVM_DOUBLE("truth.amp_a", truth.amp_a),
      BVM_DOUBLE("truth.amp_b", truth.amp_b),
      BVM_DOUBLE("truth.amp_f", truth.amp_f),
      BVM_DOUBLE("truth.offset_a", truth.offset_a),
      BVM_DOUBLE("truth.offset_b", truth.offset_b),
      BVM_DOUBLE("truth.margin", truth.margin),
      Field{"truth.density",
            [](const ScenarioConfig& c) {
              return std::string(c.truth.synthesized_density ? "synthesized" : "uniform");
            },
            [](ScenarioConfig& c, const std::string& v) {
              if (v != "uniform" && v != "synthesized") {
                throw ConfigError("truth.density", "expected uniform or synthesized, got '" + v + "'");
              }
              c.truth.synthesized_density = v == "synthesized";
            }},
      BVM_BOOL("truth.shared_multipliers", truth.shared_multipliers),
      BVM_DOUBLE("truth.density_log_bound", truth.density_log_bound),
      BVM_INT("truth.max_level", truth.max_level),
      BVM_INT("truth.grid_level", truth.grid_level),
      Field{"truth.family", [](const ScenarioConfig& c) { return to_string(c.truth.family); },
            [](ScenarioConfig& c, const std::string& v) {
              c.truth.family = enum_value("truth.family", [&] { return wavelet_family_from_string(v); });
            }},
      Field{"prior.kind", [](const ScenarioConfig& c) { return to_string(c.prior.kind); },
            [](ScenarioConfig& c, const std::string& v) {
              c.prior.kind = enum_value("prior.kind", [&] { return prior_kind_from_string(v); });
            }},
      BVM_DOUBLE("prior.betabar", prior.betabar),
      BVM_DOUBLE("prior.r", prior.r),
      BVM_DOUBLE("prior.sigma_lambda", prior.sigma_lambda),
      BVM_INT("prior.grid_level", prior.grid_level),
      Field{"prior.family", [](const ScenarioConfig& c) { return to_string(c.prior.family); },
            [](ScenarioConfig& c, const std::string& v) {
              c.prior.family = enum_value("prior.family", [&] { return wavelet_family_from_string(v); });
            }},
      Field{"pilot.kind", [](const ScenarioConfig& c) { return to_string(c.pilot.kind); },
            [](ScenarioConfig& c, const std::string& v) {
              c.pilot.kind = enum_value("pilot.kind", [&] { return pilot_kind_from_string(v); });
            }},
      BVM_INT("pilot.bins", pilot.bins),
      BVM_INT("pilot.level", pilot.level),
      BVM_DOUBLE("pilot.split_fraction", pilot.split_fraction),
      BVM_DOUBLE("pilot.clip", pilot.clip),
      BVM_BOOL("pilot.reuse", pilot.reuse),
      BVM_DOUBLE("dp.base_mass", dp.base_mass),
      BVM_INT("dp.stick_truncation", dp.stick_truncation),
      BVM_INT("sampler.burnin", sampler.burnin),
      BVM_INT("sampler.draws", sampler.draws),
      BVM_INT("sampler.thin", sampler.thin),
      BVM_INT("sampler.chains", sampler.chains),
      BVM_BOOL("density_prior.enabled", density_prior.enabled),
      BVM_DOUBLE("density_prior.gammabar", density_prior.gammabar),
      BVM_DOUBLE("density_prior.r", density_prior.r),
  };
  return table;
}

#undef BVM_DOUBLE
#undef BVM_INT
#undef BVM_BOOL

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

std::string to_string(CenterKind kind) { return kind == CenterKind::kOracle ? "oracle" : "aipw"; }

std::string to_string(PosteriorMode mode) {
  return mode == PosteriorMode::kMcmc ? "mcmc" : "exact-normal";
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

bool ScenarioConfig::operator==(const ScenarioConfig& other) const {
  return serialize(*this) == serialize(other);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

void set_config_value(ScenarioConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    set_config_value(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  validate(config);
  return config;
}

ScenarioConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

std::string serialize(const ScenarioConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

void validate(const ScenarioConfig& c) {
  require(c.n >= 4, "n", "must be at least 4");
  require(c.d >= 1 && c.d <= kMaxDim, "d", "must be 1 or 2");
  require(c.reps >= 1, "reps", "must be at least 1");
  require(c.ci_level > 0.0 && c.ci_level < 1.0, "ci_level", "must be in (0,1)");
  require(!c.out_path.empty(), "out_path", "must not be empty");
  require(c.truth.alpha > 0.0, "truth.alpha", "must be positive");
  require(c.truth.beta > 0.0, "truth.beta", "must be positive");
  require(c.truth.gamma > 0.0, "truth.gamma", "must be positive");
  require(c.truth.margin > 0.0 && c.truth.margin < 0.5, "truth.margin", "must be in (0, 0.5)");
  require(c.truth.density_log_bound > 0.0, "truth.density_log_bound", "must be positive");
  require(c.truth.max_level >= 0, "truth.max_level", "must be >= 0");
  require(c.truth.grid_level > c.truth.max_level && c.truth.grid_level * c.d <= 24, "truth.grid_level",
          "must exceed truth.max_level and keep the grid below 2^24 cells");
  require(c.prior.betabar > 0.0, "prior.betabar", "must be positive");
  require(c.prior.r >= 0.0, "prior.r", "must be >= 0");
  require(c.prior.sigma_lambda >= 0.0, "prior.sigma_lambda", "must be >= 0");
  require(c.prior.grid_level >= 1 && c.prior.grid_level <= 16, "prior.grid_level", "must be in [1,16]");
  require(c.prior.kind != PriorKind::kExpDensity, "prior.kind", "exp-density is not a prior on b");
  require(c.prior.kind != PriorKind::kRiemannLiouville || c.d == 1, "prior.kind",
          "the Riemann-Liouville prior is one-dimensional");
  require(c.pilot.bins >= 0, "pilot.bins", "must be >= 0");
  require(c.pilot.level >= 0 && c.pilot.level <= 10, "pilot.level", "must be in [0,10]");
  require(c.pilot.split_fraction > 0.0 && c.pilot.split_fraction < 1.0, "pilot.split_fraction",
          "must be in (0,1)");
  require(c.pilot.clip > 0.0 && c.pilot.clip < 0.5, "pilot.clip", "must be in (0, 0.5)");
  require(c.dp.base_mass >= 0.0, "dp.base_mass", "must be >= 0");
  require(c.dp.stick_truncation >= 1, "dp.stick_truncation", "must be >= 1");
  require(c.sampler.burnin >= 0, "sampler.burnin", "must be >= 0");
  require(c.sampler.draws >= 100, "sampler.draws", "must be at least 100");
  require(c.sampler.thin >= 1, "sampler.thin", "must be >= 1");
  require(c.sampler.chains >= 1, "sampler.chains", "must be >= 1");
  require(static_cast<double>(c.sampler.draws) * c.sampler.chains >= 2.0 / (1.0 - c.ci_level),
          "sampler.draws", "too few draws for ci_level");
  require(c.density_prior.gammabar > 0.0, "density_prior.gammabar", "must be positive");
  require(c.density_prior.r >= 0.0, "density_prior.r", "must be >= 0");
}

TruthSpec truth_spec(const ScenarioConfig& config) {
  TruthSpec t = config.truth;
  t.dim = config.d;
  return t;
}

std::string result_csv_header() {
  return "rep_id,seed,chi_true,chi_hat,post_mean,post_sd,ci_lo,ci_hi,covered,ks_dist,w1_dist\n";
}

std::string result_csv_line(const ResultRow& r) {
  std::string s = std::to_string(r.rep_id) + ',' + std::to_string(r.seed);
  for (double v : {r.chi_true, r.chi_hat, r.post_mean, r.post_sd, r.ci_lo, r.ci_hi}) {
    s += ',' + format_double(v);
  }
  s += r.covered ? ",1" : ",0";
  s += ',' + format_double(r.ks_dist) + ',' + format_double(r.w1_dist) + '\n';
  return s;
}

}  // namespace bvm
