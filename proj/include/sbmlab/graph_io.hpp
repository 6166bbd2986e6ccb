#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sbmlab/model_core.hpp"
#include "sbmlab/side_info.hpp"

namespace sbmlab {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a whole token; throws ParseError.
double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

struct GraphFile {
  LabeledGraph graph;
  std::optional<SideInfoModel> model;
  std::optional<SideInfoObservation> side;
};

// Layout:
//   n a b seed
//   i j            one line per edge, i < j, canonical order
//   x_0 ... x_n-1  labels, +1 written as 1
//   SIDEINFO <tag> <params>       optional
//   <per-node line>               n lines: y_i, or K outcome indices
// Feature params are K, then per feature M, the M plus-probabilities and the
// M minus-probabilities.
void write_graph_file(std::ostream& out, const LabeledGraph& g,
                      const SideInfoModel* model = nullptr,
                      const SideInfoObservation* side = nullptr);
GraphFile read_graph_file(std::istream& in);

void save_graph_file(const std::string& path, const LabeledGraph& g,
                     const SideInfoModel* model = nullptr,
                     const SideInfoObservation* side = nullptr);
GraphFile load_graph_file(const std::string& path);

}  // namespace sbmlab
