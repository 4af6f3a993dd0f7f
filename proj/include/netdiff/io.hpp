#pragma once

#include "netdiff/exogenous.hpp"
#include "netdiff/graph.hpp"
#include "netdiff/trajectory.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace netdiff::io {

using nlohmann::json;

struct GraphFile {
  WeightedDigraph graph;
  std::optional<Protocol> protocol;
};

/// {"n": int, "protocol": "P1"|"P2", "edges": [{"from", "to", "c", "r"}]},
/// node ids 1-based. Throws BadConfig on schema violations, IoFailure on
/// unreadable files, graph errors for invalid edges.
GraphFile graph_from_json(const json& j);
GraphFile read_graph(const std::filesystem::path& path);
json graph_to_json(const WeightedDigraph& g, std::optional<Protocol> protocol = std::nullopt);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
json vector_to_json(const Vector& v);
json complex_vector_to_json(const CVector& v);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

/// CSV with header t,<prefix>1..<prefix>N.
std::string trajectory_csv(const Trajectory& t, const std::string& prefix = "node");
/// Quasi-state CSV; imaginary columns are added only when some entry is complex.
std::string quasi_csv(const std::vector<double>& times, const CMatrix& quasi);

/// "1,0,1,0" or "[1, 0, 1, 0]".
Vector parse_vector(std::string_view text);

/// const:[...], impulse:[...] or pw:FILE.csv (rows t,u1..un, header optional).
InputSignal parse_input_spec(std::string_view text, const std::filesystem::path& base_dir = {});

/// "3=1.0,5=0.2" with 1-based agents; returns 0-based indices and values.
std::pair<std::vector<Index>, Vector> parse_stubborn(std::string_view text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
json read_json(const std::filesystem::path& path);

}  // namespace netdiff::io
