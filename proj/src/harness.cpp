#include "sbmlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sbmlab/graph_io.hpp"
#include "sbmlab/rng.hpp"
#include "sbmlab/version.hpp"

namespace sbmlab {
namespace {

using ordered_json = nlohmann::ordered_json;

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

Graph two_cliques(const LabelVector& labels) {
  std::vector<Edge> edges;
  const auto n = static_cast<NodeId>(labels.size());
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (labels[i] == labels[j]) edges.push_back({i, j});
    }
  }
  return Graph::from_edges(n, std::move(edges));
}

// Reduces outcomes in trial order so floating sums never depend on the
// schedule.
TrialStats aggregate(const Cell& cell, const ExperimentConfig& config, std::uint64_t seed,
                     const std::vector<TrialOutcome>& outcomes) {
  TrialStats s;
  s.n = cell.n;
  s.a = cell.a;
  s.b = cell.b;
  s.model = to_string(cell.side.kind);
  s.regime_params = cell.side.regime_params();
  s.trials = outcomes.size();
  s.seed = seed;
  double mismatch = 0.0;
  double pre = 0.0;
  double stage1 = 0.0;
  std::size_t valid = 0;
  for (const auto& o : outcomes) {
    if (o.error) {
      ++s.errors;
      continue;
    }
    ++valid;
    s.successes += o.success ? 1 : 0;
    s.rollbacks += o.rolled_back ? 1 : 0;
    mismatch += o.mismatch_fraction;
    pre += o.pre_rollback_fraction;
    stage1 += o.stage1_agreement;
  }
  s.rate = s.trials ? static_cast<double>(s.successes) / static_cast<double>(s.trials) : 0.0;
  const auto ci = wilson_interval(s.successes, s.trials);
  s.ci_lo = ci.lo;
  s.ci_hi = ci.hi;
  if (valid > 0) {
    const auto v = static_cast<double>(valid);
    s.mean_mismatch = mismatch / v;
    if (config.detector == DetectorKind::two_step) {
      s.stage1_agreement = stage1 / v;
      s.pre_rollback_mismatch = pre / v;
    }
  }
  return s;
}

std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("csv: unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> opt_parse(const std::string& v) {
  if (v.empty()) return std::nullopt;
  return parse_double(v);
}

std::size_t parse_count(const std::string& v) { return static_cast<std::size_t>(parse_u64(v)); }

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> opt_from_json(const ordered_json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

const char* to_string(SideKind k) {
  switch (k) {
    case SideKind::none:
      return "none";
    case SideKind::noisy:
      return "noisy";
    case SideKind::erasure:
      return "erasure";
    case SideKind::features:
      return "features";
  }
  return "unknown";
}

SideKind parse_side_kind(std::string_view name) {
  if (name == "none") return SideKind::none;
  if (name == "noisy") return SideKind::noisy;
  if (name == "erasure") return SideKind::erasure;
  if (name == "features") return SideKind::features;
  throw std::invalid_argument("unknown side-information model '" + std::string(name) + "'");
}

SideInfoModel SideInfoSpec::instantiate(std::uint32_t n) const {
  const double v = beta ? std::pow(static_cast<double>(n), -*beta) : value;
  SideInfoModel model;
  switch (kind) {
    case SideKind::none:
      model = uninformative_features();
      break;
    case SideKind::noisy:
      model = NoisyLabels{v};
      break;
    case SideKind::erasure:
      model = Erasure{v};
      break;
    case SideKind::features:
      model = features;
      break;
  }
  validate(model);
  return model;
}

std::string SideInfoSpec::regime_params() const {
  switch (kind) {
    case SideKind::none:
      return "";
    case SideKind::noisy:
      return beta ? "beta=" + format_double(*beta) : "alpha=" + format_double(value);
    case SideKind::erasure:
      return beta ? "beta=" + format_double(*beta) : "epsilon=" + format_double(value);
    case SideKind::features:
      return "K=" + std::to_string(features.laws.size());
  }
  return "";
}

bool SideInfoSpec::operator==(const SideInfoSpec& other) const {
  auto laws_equal = [](const Features& x, const Features& y) {
    if (x.laws.size() != y.laws.size()) return false;
    for (std::size_t k = 0; k < x.laws.size(); ++k) {
      if (x.laws[k].plus != y.laws[k].plus || x.laws[k].minus != y.laws[k].minus) return false;
    }
    return true;
  };
  return kind == other.kind && beta == other.beta && value == other.value &&
         laws_equal(features, other.features);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SBMLAB_THREADS")) {
    try {
      const auto v = parse_u64(env);
      if (v > 0 && v <= 4096) return static_cast<unsigned>(v);
    } catch (const ParseError&) {
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

TrialOutcome run_trial(const Cell& cell, const ExperimentConfig& config, std::uint64_t trial_seed) {
  TrialOutcome out;
  try {
    const auto params = SbmParams::make(cell.n, cell.a, cell.b);
    const auto labels =
        sample_labels(params, LabelMode::balanced, derive_seed(trial_seed, streams::kLabels));
    LabeledGraph g = config.generator == Generator::sbm
                         ? sample_graph(labels, params, derive_seed(trial_seed, streams::kGraph))
                         : LabeledGraph{params, labels, two_cliques(labels), trial_seed};
    const auto model = cell.side.instantiate(cell.n);
    const auto side = sample_side_info(labels, model, derive_seed(trial_seed, streams::kSideInfo));
    const double n = cell.n;
    if (config.detector == DetectorKind::two_step) {
      const auto r = two_step_detect(g, side, model, config.two_step,
                                     derive_seed(trial_seed, streams::kDetect));
      out.success = r.success;
      out.mismatch_fraction = static_cast<double>(r.mismatches) / n;
      out.pre_rollback_fraction = static_cast<double>(r.pre_rollback_mismatches) / n;
      out.stage1_agreement = r.stage1_agreement;
      out.rolled_back = r.rolled_back;
    } else {
      const auto r = ml_exact(g.graph, side, model, params, config.ml_mode);
      const auto miss = mismatch_count(r.best_labels.values(), labels, is_sign_symmetric(model));
      out.success = miss == 0;
      out.mismatch_fraction = static_cast<double>(miss) / n;
    }
  } catch (const std::exception& e) {
    out = TrialOutcome{};
    out.error = true;
    out.error_message = e.what();
  }
  return out;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

std::uint64_t cell_seed(std::uint64_t root_seed, std::size_t index) {
  return derive_seed(derive_seed(root_seed, "cell"), static_cast<std::uint64_t>(index));
}

TrialStats run_cell(const Cell& cell, const ExperimentConfig& config, std::uint64_t seed) {
  if (config.trials < 1) throw std::invalid_argument("run_cell: trials must be >= 1");
  std::vector<TrialOutcome> outcomes(config.trials);
  parallel_for(config.trials, resolve_threads(config.threads), [&](std::size_t t) {
    outcomes[t] = run_trial(cell, config, derive_seed(seed, static_cast<std::uint64_t>(t)));
  });
  return aggregate(cell, config, seed, outcomes);
}

Table sweep(const ExperimentConfig& config) {
  if (config.cells.empty()) throw std::invalid_argument("sweep: empty grid");
  if (config.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  // One flat job list so small cells do not leave workers idle.
  const std::size_t per = config.trials;
  std::vector<std::vector<TrialOutcome>> outcomes(config.cells.size(),
                                                  std::vector<TrialOutcome>(per));
  parallel_for(config.cells.size() * per, resolve_threads(config.threads), [&](std::size_t job) {
    const std::size_t c = job / per;
    const std::size_t t = job % per;
    outcomes[c][t] = run_trial(config.cells[c], config,
                               derive_seed(cell_seed(config.root_seed, c), static_cast<std::uint64_t>(t)));
  });
  Table table;
  for (std::size_t c = 0; c < config.cells.size(); ++c) {
    table.push_back(aggregate(config.cells[c], config, cell_seed(config.root_seed, c), outcomes[c]));
  }
  return table;
}

ExponentFit fit_exponent(std::span<const std::pair<double, double>> n_and_rate) {
  std::vector<double> distinct;
  for (const auto& [n, rate] : n_and_rate) {
    if (!(n > 1.0)) throw std::invalid_argument("fit_exponent: n must be > 1");
    if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("fit_exponent: rate outside [0, 1]");
    if (std::find(distinct.begin(), distinct.end(), n) == distinct.end()) distinct.push_back(n);
  }
  if (distinct.size() < 3) throw std::invalid_argument("fit_exponent: need at least 3 distinct n");

  ExponentFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [n, rate] : n_and_rate) {
    if (rate > 0.0) {
      fit.used_n.push_back(n);
      xs.push_back(std::log(n));
      ys.push_back(-std::log(rate));
    } else {
      fit.excluded_n.push_back(n);
    }
  }
  fit.flagged = !fit.excluded_n.empty();
  if (xs.size() < 2) throw std::domain_error("fit_exponent: fewer than two cells with errors");

  const double m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::domain_error("fit_exponent: cells with errors share one n");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::vector<std::pair<double, double>> exponent_points(const Table& table) {
  std::vector<std::pair<double, double>> out;
  for (const auto& row : table) {
    const auto& rate = row.pre_rollback_mismatch ? row.pre_rollback_mismatch : row.mean_mismatch;
    if (rate) out.emplace_back(static_cast<double>(row.n), *rate);
  }
  return out;
}

std::string csv_header() {
  return "n,a,b,model,regime-params,trials,successes,rate,ci_lo,ci_hi,mean_mismatch,seed,"
         "errors,rollbacks,stage1_agreement,pre_rollback_mismatch";
}

void emit_csv(std::ostream& out, const Table& table) {
  out << csv_header() << '\n';
  for (const auto& r : table) {
    out << r.n << ',' << format_double(r.a) << ',' << format_double(r.b) << ','
        << csv_field(r.model) << ',' << csv_field(r.regime_params) << ',' << r.trials << ','
        << r.successes << ',' << format_double(r.rate) << ',' << format_double(r.ci_lo) << ','
        << format_double(r.ci_hi) << ',' << opt_text(r.mean_mismatch) << ',' << r.seed << ','
        << r.errors << ',' << r.rollbacks << ',' << opt_text(r.stage1_agreement) << ','
        << opt_text(r.pre_rollback_mismatch) << '\n';
  }
}

Table read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw ParseError("csv: unexpected header");
  Table table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 16) throw ParseError("csv: expected 16 fields");
    TrialStats r;
    const auto n = parse_u64(f[0]);
    if (n > 0xffffffffULL) throw ParseError("csv: n out of range");
    r.n = static_cast<std::uint32_t>(n);
    r.a = parse_double(f[1]);
    r.b = parse_double(f[2]);
    r.model = f[3];
    r.regime_params = f[4];
    r.trials = parse_count(f[5]);
    r.successes = parse_count(f[6]);
    r.rate = parse_double(f[7]);
    r.ci_lo = parse_double(f[8]);
    r.ci_hi = parse_double(f[9]);
    r.mean_mismatch = opt_parse(f[10]);
    r.seed = parse_u64(f[11]);
    r.errors = parse_count(f[12]);
    r.rollbacks = parse_count(f[13]);
    r.stage1_agreement = opt_parse(f[14]);
    r.pre_rollback_mismatch = opt_parse(f[15]);
    table.push_back(std::move(r));
  }
  return table;
}

void emit_json(std::ostream& out, const Table& table) {
  ordered_json doc;
  doc["version"] = kVersion;
  doc["exponent_error_column"] = "pre_rollback_mismatch";
  doc["rows"] = ordered_json::array();
  for (const auto& r : table) {
    ordered_json row;
    row["n"] = r.n;
    row["a"] = r.a;
    row["b"] = r.b;
    row["model"] = r.model;
    row["regime-params"] = r.regime_params;
    row["trials"] = r.trials;
    row["successes"] = r.successes;
    row["rate"] = r.rate;
    row["ci_lo"] = r.ci_lo;
    row["ci_hi"] = r.ci_hi;
    row["mean_mismatch"] = opt_json(r.mean_mismatch);
    row["seed"] = r.seed;
    row["errors"] = r.errors;
    row["rollbacks"] = r.rollbacks;
    row["stage1_agreement"] = opt_json(r.stage1_agreement);
    row["pre_rollback_mismatch"] = opt_json(r.pre_rollback_mismatch);
    doc["rows"].push_back(std::move(row));
  }
  out << doc.dump(2) << '\n';
}

Table read_json(std::istream& in) {
  Table table;
  try {
    const auto doc = ordered_json::parse(in);
    for (const auto& row : doc.at("rows")) {
      TrialStats r;
      r.n = row.at("n").get<std::uint32_t>();
      r.a = row.at("a").get<double>();
      r.b = row.at("b").get<double>();
      r.model = row.at("model").get<std::string>();
      r.regime_params = row.at("regime-params").get<std::string>();
      r.trials = row.at("trials").get<std::size_t>();
      r.successes = row.at("successes").get<std::size_t>();
      r.rate = row.at("rate").get<double>();
      r.ci_lo = row.at("ci_lo").get<double>();
      r.ci_hi = row.at("ci_hi").get<double>();
      r.mean_mismatch = opt_from_json(row.at("mean_mismatch"));
      r.seed = row.at("seed").get<std::uint64_t>();
      r.errors = row.at("errors").get<std::size_t>();
      r.rollbacks = row.at("rollbacks").get<std::size_t>();
      r.stage1_agreement = opt_from_json(row.at("stage1_agreement"));
      r.pre_rollback_mismatch = opt_from_json(row.at("pre_rollback_mismatch"));
      table.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("json: ") + e.what());
  }
  return table;
}

}  // namespace sbmlab
