#include "sbmlab/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace sbmlab {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

long parse_long(std::string_view text) {
  long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("not an integer: '" + std::string(text) + "'");
  return v;
}

void write_distribution(std::ostream& out, const std::vector<double>& dist) {
  for (double v : dist) out << ' ' << format_double(v);
}

std::string params_text(const SideInfoModel& model) {
  std::ostringstream out;
  if (const auto* m = std::get_if<NoisyLabels>(&model)) {
    out << format_double(m->alpha);
  } else if (const auto* m = std::get_if<Erasure>(&model)) {
    out << format_double(m->epsilon);
  } else {
    const auto& laws = std::get<Features>(model).laws;
    out << laws.size();
    for (const auto& law : laws) {
      out << ' ' << law.plus.size();
      write_distribution(out, law.plus);
      write_distribution(out, law.minus);
    }
  }
  return out.str();
}

SideInfoModel parse_model(const std::vector<std::string>& tok) {
  // tok[0] == "SIDEINFO"
  if (tok.size() < 3) throw ParseError("SIDEINFO line needs a tag and parameters");
  const auto& tag = tok[1];
  SideInfoModel model;
  if (tag == "noisy" || tag == "erasure") {
    if (tok.size() != 3) throw ParseError("SIDEINFO " + tag + " takes one parameter");
    const double v = parse_double(tok[2]);
    model = tag == "noisy" ? SideInfoModel(NoisyLabels{v}) : SideInfoModel(Erasure{v});
  } else if (tag == "features") {
    std::size_t pos = 2;
    auto next = [&]() -> const std::string& {
      if (pos >= tok.size()) throw ParseError("SIDEINFO features: truncated parameters");
      return tok[pos++];
    };
    const long k = parse_long(next());
    if (k < 1) throw ParseError("SIDEINFO features: K must be >= 1");
    Features f;
    for (long i = 0; i < k; ++i) {
      const long m = parse_long(next());
      if (m < 1) throw ParseError("SIDEINFO features: M must be >= 1");
      FeatureLaw law;
      for (long j = 0; j < m; ++j) law.plus.push_back(parse_double(next()));
      for (long j = 0; j < m; ++j) law.minus.push_back(parse_double(next()));
      f.laws.push_back(std::move(law));
    }
    if (pos != tok.size()) throw ParseError("SIDEINFO features: trailing parameters");
    model = std::move(f);
  } else {
    throw ParseError("unknown SIDEINFO tag '" + tag + "'");
  }
  try {
    validate(model);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("SIDEINFO: ") + e.what());
  }
  return model;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("not a number: '" + std::string(text) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("not an unsigned integer: '" + std::string(text) + "'");
  }
  return v;
}

void write_graph_file(std::ostream& out, const LabeledGraph& g, const SideInfoModel* model,
                      const SideInfoObservation* side) {
  const auto& p = g.params;
  out << p.n() << ' ' << format_double(p.a()) << ' ' << format_double(p.b()) << ' ' << g.seed
      << '\n';
  for (const auto& e : g.graph.edges()) out << e.u << ' ' << e.v << '\n';
  for (std::size_t i = 0; i < g.labels.size(); ++i) {
    out << (i ? " " : "") << static_cast<int>(g.labels[i]);
  }
  out << '\n';
  if ((model == nullptr) != (side == nullptr)) {
    throw std::invalid_argument("write_graph_file: model and observation go together");
  }
  if (model == nullptr) return;
  if (side->size() != p.n()) throw std::invalid_argument("write_graph_file: side info length != n");
  out << "SIDEINFO " << model_tag(*model) << ' ' << params_text(*model) << '\n';
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (side->num_features == 0) {
      out << static_cast<int>(side->y[i]) << '\n';
    } else {
      for (std::size_t k = 0; k < side->num_features; ++k) {
        out << (k ? " " : "") << side->outcome(i, k);
      }
      out << '\n';
    }
  }
}

GraphFile read_graph_file(std::istream& in) {
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto tok = split_ws(line);
    if (!tok.empty()) lines.push_back(std::move(tok));
  }
  if (lines.size() < 2) throw ParseError("graph file: need a header and a labels line");

  const auto& head = lines[0];
  if (head.size() != 4) throw ParseError("graph file: header must be 'n a b seed'");
  const long n_raw = parse_long(head[0]);
  if (n_raw < 2 || n_raw > 0xffffffffL) throw ParseError("graph file: bad n");
  const auto n = static_cast<std::uint32_t>(n_raw);

  std::size_t side_at = lines.size();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i][0] == "SIDEINFO") {
      side_at = i;
      break;
    }
  }
  if (side_at < 2) throw ParseError("graph file: missing labels line");

  try {
    GraphFile out{LabeledGraph{SbmParams::make(n, parse_double(head[1]), parse_double(head[2])),
                               {}, {}, parse_u64(head[3])},
                  std::nullopt, std::nullopt};
    std::vector<Edge> edges;
    for (std::size_t i = 1; i + 1 < side_at; ++i) {
      const auto& t = lines[i];
      if (t.size() != 2) throw ParseError("graph file: edge line must be 'i j'");
      const long u = parse_long(t[0]);
      const long v = parse_long(t[1]);
      if (u < 0 || v < 0 || u >= n_raw || v >= n_raw) throw ParseError("graph file: node out of range");
      edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
    out.graph.graph = Graph::from_edges(n, std::move(edges));

    const auto& lab = lines[side_at - 1];
    if (lab.size() != n) throw ParseError("graph file: labels line must have n entries");
    std::vector<std::int8_t> labels;
    for (const auto& t : lab) labels.push_back(static_cast<std::int8_t>(parse_long(t)));
    out.graph.labels = LabelVector(std::move(labels));

    if (side_at < lines.size()) {
      auto model = parse_model(lines[side_at]);
      if (lines.size() - side_at - 1 != n) {
        throw ParseError("graph file: SIDEINFO section must have n node lines");
      }
      SideInfoObservation obs;
      const auto* features = std::get_if<Features>(&model);
      obs.num_features = features ? features->laws.size() : 0;
      for (std::size_t i = side_at + 1; i < lines.size(); ++i) {
        const auto& t = lines[i];
        if (features == nullptr) {
          if (t.size() != 1) throw ParseError("graph file: side info line must hold one value");
          const long y = parse_long(t[0]);
          if (y < -1 || y > 1) throw ParseError("graph file: side info value out of range");
          obs.y.push_back(static_cast<std::int8_t>(y));
        } else {
          if (t.size() != obs.num_features) throw ParseError("graph file: need K outcome indices");
          for (std::size_t k = 0; k < t.size(); ++k) {
            const long o = parse_long(t[k]);
            if (o < 0 || static_cast<std::size_t>(o) >= features->laws[k].plus.size()) {
              throw ParseError("graph file: outcome index out of range");
            }
            obs.outcomes.push_back(static_cast<std::uint32_t>(o));
          }
        }
      }
      out.model = std::move(model);
      out.side = std::move(obs);
    }
    return out;
  } catch (const ParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("graph file: ") + e.what());
  }
}

void save_graph_file(const std::string& path, const LabeledGraph& g, const SideInfoModel* model,
                     const SideInfoObservation* side) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_graph_file(out, g, model, side);
  if (!out) throw IoError("write to '" + path + "' failed");
}

GraphFile load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_graph_file(in);
}

}  // namespace sbmlab
