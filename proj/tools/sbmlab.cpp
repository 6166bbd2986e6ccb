// sbmlab command-line entry point. Data goes to stdout only after a command
// has fully succeeded; diagnostics go to stderr.
//
// Exit status: 0 ok, 2 usage error, 3 domain error, 4 I/O error.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbmlab/config.hpp"
#include "sbmlab/deviation_bounds.hpp"
#include "sbmlab/graph_io.hpp"
#include "sbmlab/harness.hpp"
#include "sbmlab/likelihood.hpp"
#include "sbmlab/rng.hpp"
#include "sbmlab/thresholds.hpp"
#include "sbmlab/two_step.hpp"
#include "sbmlab/version.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace sbmlab;

constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitIo = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json envelope(const std::string& command) {
  json j;
  j["version"] = kVersion;
  j["command"] = command;
  return j;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Instance source shared by generate, detect and ml: either a graph file or
// the generator flags.
struct InstanceFlags {
  std::string input;
  std::uint32_t n = 0;
  double a = 0.0;
  double b = 0.0;
  std::optional<std::uint64_t> seed;
  std::string model = "none";
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<double> beta;
  std::string feature_laws;
  std::string label_mode = "balanced";
};

void add_generator_flags(CLI::App* cmd, InstanceFlags& f, bool with_input) {
  if (with_input) {
    cmd->add_option("--input", f.input, "Graph file to read instead of generating one");
  }
  cmd->add_option("--n", f.n, "Number of nodes");
  cmd->add_option("--a", f.a, "Intra-community coefficient (p = a log n / n)");
  cmd->add_option("--b", f.b, "Inter-community coefficient (q = b log n / n)");
  cmd->add_option("--seed", f.seed, "Root seed; generated and echoed when omitted");
  cmd->add_option("--model", f.model, "Side information: none, noisy, erasure, features")
      ->check(CLI::IsMember({"none", "noisy", "erasure", "features"}));
  cmd->add_option("--alpha", f.alpha, "Noisy-label flip probability");
  cmd->add_option("--epsilon", f.epsilon, "Erasure probability");
  cmd->add_option("--beta", f.beta, "Set alpha or epsilon to n^-beta");
  cmd->add_option("--feature-laws", f.feature_laws,
                  "Feature laws plus:minus per feature, '|' between features, e.g. 0.8,0.2:0.2,0.8");
  cmd->add_option("--label-mode", f.label_mode, "Label prior: balanced or iid")
      ->check(CLI::IsMember({"balanced", "iid"}));
}

struct Instance {
  LabeledGraph graph;
  SideInfoModel model;
  SideInfoObservation side;
  bool has_side_section = false;
  std::uint64_t seed = 0;
};

SideInfoModel model_from_flags(const InstanceFlags& f) {
  auto param = [&](const std::optional<double>& direct, const char* name) {
    if (direct && f.beta) throw UsageError(std::string("give --") + name + " or --beta, not both");
    if (direct) return *direct;
    if (f.beta) return std::pow(static_cast<double>(f.n), -*f.beta);
    throw UsageError(std::string("model needs --") + name + " or --beta");
  };
  SideInfoModel m;
  if (f.model == "none") {
    m = uninformative_features();
  } else if (f.model == "noisy") {
    m = NoisyLabels{param(f.alpha, "alpha")};
  } else if (f.model == "erasure") {
    m = Erasure{param(f.epsilon, "epsilon")};
  } else {
    if (f.feature_laws.empty()) throw UsageError("model features needs --feature-laws");
    m = parse_feature_laws(f.feature_laws);
  }
  validate(m);
  return m;
}

Instance make_instance(const InstanceFlags& f) {
  if (!f.input.empty()) {
    auto file = load_graph_file(f.input);
    const std::uint64_t seed = file.graph.seed;
    if (file.model) {
      return {std::move(file.graph), *file.model, *file.side, true, seed};
    }
    auto model = SideInfoModel{uninformative_features()};
    auto side = sample_side_info(file.graph.labels, model, 0);
    return {std::move(file.graph), model, std::move(side), false, seed};
  }
  if (f.n == 0 || f.a == 0.0 || f.b == 0.0) throw UsageError("give --input or all of --n, --a, --b");
  const std::uint64_t seed = f.seed.value_or(fresh_seed());
  const auto params = SbmParams::make(f.n, f.a, f.b);
  const auto mode = f.label_mode == "iid" ? LabelMode::iid : LabelMode::balanced;
  const auto labels = sample_labels(params, mode, derive_seed(seed, streams::kLabels));
  auto graph = sample_graph(labels, params, derive_seed(seed, streams::kGraph));
  graph.seed = seed;
  auto model = model_from_flags(f);
  auto side = sample_side_info(labels, model, derive_seed(seed, streams::kSideInfo));
  return {std::move(graph), std::move(model), std::move(side), f.model != "none", seed};
}

json labels_json(std::span<const std::int8_t> x) {
  json arr = json::array();
  for (auto v : x) arr.push_back(static_cast<int>(v));
  return arr;
}

// ---- threshold ----

struct ThresholdFlags {
  double a = 0.0;
  double b = 0.0;
  std::string model;
  std::optional<double> beta;
  std::vector<std::string> sequences;
  std::string k_growth = "sublog";
  std::string format = "json";
};

FeatureSequence parse_sequence(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(parse_double(item));
  if (v.size() != 3) throw UsageError("--sequence takes f1,f2,f3");
  return {v[0], v[1], v[2]};
}

std::string run_threshold(const ThresholdFlags& f) {
  RegimeDescriptor regime;
  if (f.model == "noisy") {
    regime = NoisyRegime{f.beta};
  } else if (f.model == "erasure") {
    regime = ErasureRegime{f.beta};
  } else if (f.model == "features") {
    if (f.sequences.empty()) throw UsageError("model features needs at least one --sequence");
    FeaturesRegime fr;
    for (const auto& s : f.sequences) fr.sequences.push_back(parse_sequence(s));
    regime = fr;
  } else {
    regime = FeaturesIidRegime{f.k_growth == "log_order" ? KGrowth::log_order : KGrowth::sublog};
  }
  const auto report = recovery_predicate(f.a, f.b, regime);
  const auto tg = t_gamma(f.a, f.b, f.beta.value_or(0.0));

  if (f.format == "table") {
    std::ostringstream out;
    out << std::left;
    auto row = [&](const std::string& k, const std::string& v) {
      out << std::setw(16) << k << v << '\n';
    };
    row("model", f.model);
    row("a", format_double(f.a));
    row("b", format_double(f.b));
    row("T", format_double(tg.t));
    row("condition", format_double(report.condition_value) + " vs " + format_double(report.threshold));
    row("achievable", to_string(report.achievable));
    row("exponent", format_double(report.exponent));
    row("critical_beta", report.critical_beta ? format_double(*report.critical_beta) : "-");
    row("case", report.binding_case);
    return out.str();
  }
  json j = envelope("threshold");
  j["a"] = f.a;
  j["b"] = f.b;
  j["model"] = f.model;
  j["beta"] = optional_number(f.beta);
  j["T"] = tg.t;
  j["gamma"] = tg.gamma;
  j["condition_value"] = report.condition_value;
  j["threshold"] = report.threshold;
  j["achievable"] = to_string(report.achievable);
  j["exponent"] = report.exponent;
  j["critical_beta"] = optional_number(report.critical_beta);
  j["binding_case"] = report.binding_case;
  return j.dump(2) + "\n";
}

// ---- generate ----

std::string run_generate(const InstanceFlags& f) {
  const auto inst = make_instance(f);
  std::ostringstream out;
  if (inst.has_side_section) {
    write_graph_file(out, inst.graph, &inst.model, &inst.side);
  } else {
    write_graph_file(out, inst.graph);
  }
  return out.str();
}

// ---- detect ----

struct DetectFlags {
  std::optional<double> d_split;
  int passes = 1;
  bool sequential = false;
  bool print_labels = false;
  double tolerance = 1e-6;
  int max_iterations = 1000;
  double trim = 3.0;
};

std::string run_detect(const InstanceFlags& f, const DetectFlags& d) {
  const auto inst = make_instance(f);
  TwoStepConfig cfg;
  cfg.d_split = d.d_split;
  cfg.improvement_passes = d.passes;
  cfg.sequential = d.sequential;
  cfg.weak.tolerance = d.tolerance;
  cfg.weak.max_iterations = d.max_iterations;
  cfg.weak.trim_multiplier = d.trim;
  const auto r = two_step_detect(inst.graph, inst.side, inst.model, cfg,
                                 derive_seed(inst.seed, streams::kDetect));
  json j = envelope("detect");
  j["seed"] = inst.seed;
  j["n"] = inst.graph.params.n();
  j["a"] = inst.graph.params.a();
  j["b"] = inst.graph.params.b();
  j["model"] = model_tag(inst.model);
  j["d_split"] = r.d_split;
  j["stage1"] = {{"agreement", r.stage1_agreement},
                 {"converged", r.weak_converged},
                 {"degenerate", r.weak_degenerate}};
  j["improvement"] = {{"flips_a_to_b", r.flips_a_to_b},
                      {"flips_b_to_a", r.flips_b_to_a},
                      {"rolled_back", r.rolled_back},
                      {"pre_rollback_mismatches", r.pre_rollback_mismatches}};
  j["result"] = {{"mismatches", r.mismatches},
                 {"success", r.success},
                 {"up_to_flip", r.up_to_flip}};
  if (d.print_labels) j["labels"] = labels_json(r.labels);
  return j.dump(2) + "\n";
}

// ---- ml ----

struct MlFlags {
  std::string mode = "exact";
  std::uint32_t cap = kDefaultMlCap;
};

std::string run_ml(const InstanceFlags& f, const MlFlags& m) {
  // Refuse before sampling a graph that could never be enumerated.
  if (f.input.empty() && f.n > m.cap) {
    throw EnumerationCapExceeded("ml: n=" + std::to_string(f.n) + " exceeds enumeration cap " +
                                 std::to_string(m.cap));
  }
  const auto inst = make_instance(f);
  const auto mode = m.mode == "asymptotic" ? LikelihoodMode::asymptotic : LikelihoodMode::exact;
  const auto r = ml_exact(inst.graph.graph, inst.side, inst.model, inst.graph.params, mode, m.cap);
  json j = envelope("ml");
  j["seed"] = inst.seed;
  j["n"] = inst.graph.params.n();
  j["mode"] = m.mode;
  j["best_labels"] = labels_json(r.best_labels.values());
  j["score"] = r.best_score.impossible ? json("-inf") : json(r.best_score.value);
  j["tie_count"] = r.tie_count;
  j["mismatches"] = mismatch_count(r.best_labels.values(), inst.graph.labels,
                                   is_sign_symmetric(inst.model));
  return j.dump(2) + "\n";
}

// ---- sweep ----

struct SweepFlags {
  std::string config;
  std::optional<unsigned> threads;
  std::string format;
  std::string output;
};

std::string render_table(const Table& table) {
  std::ostringstream out;
  out << std::left << std::setw(7) << "n" << std::setw(7) << "a" << std::setw(7) << "b"
      << std::setw(10) << "model" << std::setw(16) << "params" << std::setw(12) << "success"
      << std::setw(20) << "ci95" << "mismatch\n";
  for (const auto& r : table) {
    std::ostringstream ci;
    ci << std::fixed << std::setprecision(3) << '[' << r.ci_lo << ", " << r.ci_hi << ']';
    out << std::setw(7) << r.n << std::setw(7) << format_double(r.a) << std::setw(7)
        << format_double(r.b) << std::setw(10) << r.model << std::setw(16) << r.regime_params
        << std::setw(12) << (std::to_string(r.successes) + "/" + std::to_string(r.trials))
        << std::setw(20) << ci.str() << (r.mean_mismatch ? format_double(*r.mean_mismatch) : "")
        << '\n';
  }
  return out.str();
}

std::string run_sweep(const SweepFlags& s, bool& wrote_file) {
  auto cfg = load_config(s.config);
  if (s.threads) cfg.threads = *s.threads;
  const std::string format = s.format.empty() ? cfg.format : s.format;
  const std::string output = s.output.empty() ? cfg.output : s.output;
  const auto table = sweep(cfg);
  std::ostringstream out;
  if (format == "json") {
    emit_json(out, table);
  } else if (format == "table") {
    out << render_table(table);
  } else {
    emit_csv(out, table);
  }
  if (output.empty() || output == "-") return out.str();
  std::ofstream file(output, std::ios::binary);
  if (!file) throw IoError("cannot open '" + output + "' for writing");
  file << out.str();
  if (!file) throw IoError("write to '" + output + "' failed");
  wrote_file = true;
  return {};
}

// ---- bound ----

struct BoundFlags {
  std::string kind = "chernoff";
  double a = 0.0;
  double b = 0.0;
  double beta = 0.0;
  std::string branch = "plus";
  double c = 0.0;
  double n = 0.0;
  double delta = 0.0;
  double d_split = 2.0;
  std::size_t n_terms = 0;
  double p = 0.0;
  double q = 0.0;
  double scale = 0.0;
  double target = 0.0;
  double eps = 0.0;
};

std::string run_bound(const BoundFlags& f) {
  json j = envelope("bound");
  j["kind"] = f.kind;
  if (f.kind == "tstar") {
    const auto branch = f.branch == "minus" ? Branch::minus : Branch::plus;
    j["a"] = f.a;
    j["b"] = f.b;
    j["beta"] = f.beta;
    j["branch"] = f.branch;
    j["t_star"] = optimal_t(f.a, f.b, f.beta, branch);
    j["eta"] = eta(f.a, f.b, f.beta);
  } else if (f.kind == "cramer") {
    BernDiffSum sum{f.n_terms, f.p, f.q, f.scale};
    const auto r = cramer_lower_bound(sum, f.target, f.eps);
    j["n_terms"] = f.n_terms;
    j["t_star"] = r.t_star;
    j["exponent"] = r.exponent_term;
    j["correction"] = r.correction;
    j["bound"] = r.bound;
    j["tilted_mean"] = r.tilted_mean;
    j["tilted_variance"] = r.tilted_variance;
    j["vacuous"] = r.vacuous;
  } else {
    const auto r = chernoff_upper_bound_pe(f.a, f.b, f.c, f.n, f.delta, f.d_split);
    j["a"] = f.a;
    j["b"] = f.b;
    j["c"] = f.c;
    j["n"] = f.n;
    j["psi"] = r.psi;
    j["alpha"] = r.alpha;
    j["t1"] = r.t1;
    j["t2"] = r.t2;
    j["t1_clamped"] = r.t1_clamped;
    j["t2_clamped"] = r.t2_clamped;
    j["term_agree"] = r.term_agree;
    j["term_disagree"] = r.term_disagree;
    j["spill"] = r.spill;
    j["total"] = r.total;
  }
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community detection on the two-community SBM with side information", "sbmlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  ThresholdFlags tf;
  auto* threshold = app.add_subcommand("threshold", "Recovery condition, error exponent and critical beta");
  threshold->add_option("--a", tf.a, "Intra-community coefficient")->required();
  threshold->add_option("--b", tf.b, "Inter-community coefficient")->required();
  threshold->add_option("--model", tf.model, "noisy, erasure, features or features_iid")
      ->required()
      ->check(CLI::IsMember({"noisy", "erasure", "features", "features_iid"}));
  threshold->add_option("--beta", tf.beta, "Side-information exponent; omit for the sublog case");
  threshold->add_option("--sequence", tf.sequences,
                        "Feature outcome sequence as f1,f2,f3 coefficients (repeatable)");
  threshold->add_option("--k-growth", tf.k_growth, "features_iid: sublog or log_order")
      ->check(CLI::IsMember({"sublog", "log_order"}));
  threshold->add_option("--format", tf.format, "json or table")->check(CLI::IsMember({"json", "table"}));

  InstanceFlags gen_flags;
  auto* generate = app.add_subcommand("generate", "Sample an SBM instance and write a graph file");
  add_generator_flags(generate, gen_flags, false);
  std::string gen_output;
  generate->add_option("--output", gen_output, "Output path (default stdout)");

  InstanceFlags det_flags;
  DetectFlags df;
  auto* detect = app.add_subcommand("detect", "Run the two-step detector and report per-stage diagnostics");
  add_generator_flags(detect, det_flags, true);
  detect->add_option("--d-split", df.d_split, "Splitting parameter D (default max(2, ceil(log log n)))");
  detect->add_option("--passes", df.passes, "Local improvement passes")->check(CLI::PositiveNumber);
  detect->add_flag("--sequential", df.sequential, "Update the partition node by node");
  detect->add_option("--tolerance", df.tolerance, "Power-iteration tolerance");
  detect->add_option("--max-iterations", df.max_iterations, "Power-iteration cap");
  detect->add_option("--trim", df.trim, "Degree-trim multiplier");
  detect->add_flag("--labels", df.print_labels, "Include predicted labels");

  InstanceFlags ml_flags;
  MlFlags mf;
  auto* ml = app.add_subcommand("ml", "Exhaustive maximum-likelihood detection on a small instance");
  add_generator_flags(ml, ml_flags, true);
  ml->add_option("--mode", mf.mode, "exact or asymptotic edge weight")
      ->check(CLI::IsMember({"exact", "asymptotic"}));
  ml->add_option("--cap", mf.cap, "Largest n to enumerate (at most 26)");

  SweepFlags sf;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a Monte Carlo grid from a config file");
  sweep_cmd->add_option("--config", sf.config, "Config file (sbmlab-config v1)")->required();
  sweep_cmd->add_option("--threads", sf.threads, "Worker threads (overrides SBMLAB_THREADS)");
  sweep_cmd->add_option("--format", sf.format, "csv, json or table")
      ->check(CLI::IsMember({"csv", "json", "table"}));
  sweep_cmd->add_option("--output", sf.output, "Output path (default from config, else stdout)");

  BoundFlags bf;
  auto* bound = app.add_subcommand("bound", "Large-deviation bound components");
  bound->add_option("--kind", bf.kind, "chernoff, cramer or tstar")
      ->check(CLI::IsMember({"chernoff", "cramer", "tstar"}));
  bound->add_option("--a", bf.a, "Intra-community coefficient");
  bound->add_option("--b", bf.b, "Inter-community coefficient");
  bound->add_option("--beta", bf.beta, "tstar: side-information exponent");
  bound->add_option("--branch", bf.branch, "tstar: plus or minus")->check(CLI::IsMember({"plus", "minus"}));
  bound->add_option("--c", bf.c, "chernoff: LLR magnitude c");
  bound->add_option("--n", bf.n, "chernoff: number of nodes");
  bound->add_option("--delta", bf.delta, "chernoff: stage-one error fraction");
  bound->add_option("--d-split", bf.d_split, "chernoff: splitting parameter D");
  bound->add_option("--n-terms", bf.n_terms, "cramer: number of summands");
  bound->add_option("--p", bf.p, "cramer: W ~ Bern(p)");
  bound->add_option("--q", bf.q, "cramer: Z ~ Bern(q)");
  bound->add_option("--scale", bf.scale, "cramer: T in X = T(Z - W)");
  bound->add_option("--target", bf.target, "cramer: level a");
  bound->add_option("--eps", bf.eps, "cramer: slack epsilon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    std::string data;
    if (threshold->parsed()) {
      data = run_threshold(tf);
    } else if (generate->parsed()) {
      data = run_generate(gen_flags);
      if (!gen_output.empty()) {
        std::ofstream file(gen_output, std::ios::binary);
        if (!file) throw IoError("cannot open '" + gen_output + "' for writing");
        file << data;
        if (!file) throw IoError("write to '" + gen_output + "' failed");
        data.clear();
      }
    } else if (detect->parsed()) {
      data = run_detect(det_flags, df);
    } else if (ml->parsed()) {
      data = run_ml(ml_flags, mf);
    } else if (sweep_cmd->parsed()) {
      bool wrote = false;
      data = run_sweep(sf, wrote);
    } else if (bound->parsed()) {
      data = run_bound(bf);
    }
    std::cout << data;
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
