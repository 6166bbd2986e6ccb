#include "sbmlab/config.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <vector>

#include "sbmlab/graph_io.hpp"

namespace sbmlab {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<double> number_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) {
    try {
      out.push_back(parse_double(item));
    } catch (const ParseError&) {
      throw std::invalid_argument("config: " + key + ": bad number '" + item + "'");
    }
  }
  return out;
}

std::uint64_t whole(const std::string& key, const std::string& v) {
  try {
    return parse_u64(v);
  } catch (const ParseError&) {
    throw std::invalid_argument("config: " + key + ": expected a nonnegative integer");
  }
}

bool boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: " + key + ": expected true or false");
}

}  // namespace

Features parse_feature_laws(const std::string& v) {
  Features f;
  for (const auto& feature : split(v, '|')) {
    const auto sides = split(feature, ':');
    if (sides.size() != 2) throw std::invalid_argument("config: feature_laws: need plus:minus");
    f.laws.push_back({number_list("feature_laws", sides[0]), number_list("feature_laws", sides[1])});
  }
  return f;
}

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != kConfigHeader) {
        throw std::invalid_argument(std::string("config: first line must be '") + kConfigHeader + "'");
      }
      header = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: expected key = value: " + line);
    const auto key = trim(line.substr(0, eq));
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) {
      throw std::invalid_argument("config: repeated key '" + key + "'");
    }
  }
  if (!header) throw std::invalid_argument("config: empty file");

  ExperimentConfig cfg;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };

  const auto n_text = take("n");
  const auto a_text = take("a");
  const auto b_text = take("b");
  if (!n_text || !a_text || !b_text) throw std::invalid_argument("config: n, a and b are required");

  SideInfoSpec base;
  if (auto v = take("model")) base.kind = parse_side_kind(*v);
  if (auto v = take("feature_laws")) base.features = parse_feature_laws(*v);
  const auto beta = take("beta");
  const auto alpha = take("alpha");
  const auto epsilon = take("epsilon");
  if (static_cast<int>(beta.has_value()) + alpha.has_value() + epsilon.has_value() > 1) {
    throw std::invalid_argument("config: give at most one of beta, alpha, epsilon");
  }
  if (alpha && base.kind != SideKind::noisy) throw std::invalid_argument("config: alpha needs model = noisy");
  if (epsilon && base.kind != SideKind::erasure) {
    throw std::invalid_argument("config: epsilon needs model = erasure");
  }
  const bool needs_param = base.kind == SideKind::noisy || base.kind == SideKind::erasure;
  if (needs_param != (beta || alpha || epsilon)) {
    throw std::invalid_argument("config: noisy and erasure models take exactly one of beta, alpha, epsilon");
  }
  if (base.kind == SideKind::features && base.features.laws.empty()) {
    throw std::invalid_argument("config: model = features needs feature_laws");
  }

  std::vector<SideInfoSpec> sides;
  if (beta) {
    for (double v : number_list("beta", *beta)) {
      auto s = base;
      s.beta = v;
      sides.push_back(s);
    }
  } else if (alpha || epsilon) {
    for (double v : number_list(alpha ? "alpha" : "epsilon", alpha ? *alpha : *epsilon)) {
      auto s = base;
      s.value = v;
      sides.push_back(s);
    }
  } else {
    sides.push_back(base);
  }

  for (double n : number_list("n", *n_text)) {
    if (!(n >= 2 && n <= 4294967295.0 && n == std::floor(n))) {
      throw std::invalid_argument("config: n must be an integer >= 2");
    }
    for (double a : number_list("a", *a_text)) {
      for (double b : number_list("b", *b_text)) {
        SbmParams::make(static_cast<std::uint32_t>(n), a, b);
        for (const auto& s : sides) cfg.cells.push_back({static_cast<std::uint32_t>(n), a, b, s});
      }
    }
  }

  if (auto v = take("trials")) cfg.trials = whole("trials", *v);
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (auto v = take("seed")) cfg.root_seed = whole("seed", *v);
  if (auto v = take("threads")) cfg.threads = static_cast<unsigned>(whole("threads", *v));
  if (auto v = take("detector")) {
    if (*v == "two_step") {
      cfg.detector = DetectorKind::two_step;
    } else if (*v == "ml_exact") {
      cfg.detector = DetectorKind::ml_exact;
    } else {
      throw std::invalid_argument("config: detector must be two_step or ml_exact");
    }
  }
  if (auto v = take("ml_mode")) {
    if (*v != "exact" && *v != "asymptotic") throw std::invalid_argument("config: bad ml_mode");
    cfg.ml_mode = *v == "exact" ? LikelihoodMode::exact : LikelihoodMode::asymptotic;
  }
  if (auto v = take("generator")) {
    if (*v != "sbm" && *v != "disjoint_cliques") throw std::invalid_argument("config: bad generator");
    cfg.generator = *v == "sbm" ? Generator::sbm : Generator::disjoint_cliques;
  }
  if (auto v = take("d_split")) cfg.two_step.d_split = number_list("d_split", *v).at(0);
  if (auto v = take("passes")) cfg.two_step.improvement_passes = static_cast<int>(whole("passes", *v));
  if (auto v = take("sequential")) cfg.two_step.sequential = boolean("sequential", *v);
  if (auto v = take("tolerance")) cfg.two_step.weak.tolerance = number_list("tolerance", *v).at(0);
  if (auto v = take("max_iterations")) {
    cfg.two_step.weak.max_iterations = static_cast<int>(whole("max_iterations", *v));
  }
  if (auto v = take("trim")) cfg.two_step.weak.trim_multiplier = number_list("trim", *v).at(0);
  if (auto v = take("output")) cfg.output = *v;
  if (auto v = take("format")) {
    if (*v != "csv" && *v != "json") throw std::invalid_argument("config: format must be csv or json");
    cfg.format = *v;
  }
  if (cfg.detector == DetectorKind::ml_exact) {
    for (const auto& c : cfg.cells) {
      if (c.n > kDefaultMlCap) throw std::invalid_argument("config: ml_exact needs n <= 16");
    }
  }
  if (!kv.empty()) throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_config(in);
}

}  // namespace sbmlab
