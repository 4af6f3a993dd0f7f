#include "netdiff/io.hpp"

#include "netdiff/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace netdiff::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s) {
  s = trim(s);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(Errc::BadConfig, "cannot parse number '" + std::string(s) + "'");
  return x;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= s.size(); ++k)
    if (k == s.size() || s[k] == sep) {
      out.push_back(s.substr(start, k - start));
      start = k + 1;
    }
  return out;
}

template <class T>
T field(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw Error(Errc::BadConfig, std::string(where) + " is missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::BadConfig, std::string(where) + " field '" + key + "' has the wrong type");
  }
}

}  // namespace

GraphFile graph_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::BadConfig, "graph file must hold a JSON object");
  const auto n = field<long long>(j, "n", "graph");
  if (n <= 0) throw Error(Errc::BadConfig, "graph field 'n' must be positive");
  GraphFile out;
  if (j.contains("protocol")) out.protocol = parse_protocol(field<std::string>(j, "protocol", "graph"));
  std::vector<Edge> edges;
  if (j.contains("edges")) {
    if (!j.at("edges").is_array()) throw Error(Errc::BadConfig, "graph field 'edges' must be an array");
    std::size_t k = 0;
    for (const auto& e : j.at("edges")) {
      ++k;
      std::string where = "edge " + std::to_string(k);
      Edge edge;
      edge.from = static_cast<Index>(field<long long>(e, "from", where.c_str())) - 1;
      edge.to = static_cast<Index>(field<long long>(e, "to", where.c_str())) - 1;
      edge.confidence = e.contains("c") ? field<double>(e, "c", where.c_str()) : 1.0;
      edge.rate = e.contains("r") ? field<double>(e, "r", where.c_str()) : 1.0;
      edges.push_back(edge);
    }
  }
  out.graph = WeightedDigraph(static_cast<Index>(n), std::move(edges));
  return out;
}

GraphFile read_graph(const std::filesystem::path& path) { return graph_from_json(read_json(path)); }

json graph_to_json(const WeightedDigraph& g, std::optional<Protocol> protocol) {
  json j;
  j["n"] = g.size();
  if (protocol) j["protocol"] = std::string(to_string(*protocol));
  j["edges"] = json::array();
  for (const auto& e : g.edges())
    j["edges"].push_back({{"from", e.from + 1}, {"to", e.to + 1}, {"c", e.confidence}, {"r", e.rate}});
  return j;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) throw Error(Errc::BadConfig, "matrix must be an array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw Error(Errc::BadConfig, "matrix rows differ in length");
    for (Index k = 0; k < cols; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) throw Error(Errc::BadConfig, "matrix entries must be numbers");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json complex_vector_to_json(const CVector& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back({{"re", v(k).real()}, {"im", v(k).imag()}});
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string trajectory_csv(const Trajectory& t, const std::string& prefix) {
  std::string out = "t";
  for (Index j = 0; j < t.nodes(); ++j) out += "," + prefix + std::to_string(j + 1);
  out += '\n';
  for (Index k = 0; k < t.samples(); ++k) {
    out += format_double(t.times[static_cast<std::size_t>(k)]);
    for (Index j = 0; j < t.nodes(); ++j) out += "," + format_double(t.values(k, j));
    out += '\n';
  }
  return out;
}

std::string quasi_csv(const std::vector<double>& times, const CMatrix& quasi) {
  const bool complex = quasi.size() && quasi.imag().cwiseAbs().maxCoeff() > 0.0;
  std::string out = "t";
  for (Index j = 0; j < quasi.cols(); ++j) {
    out += ",mode" + std::to_string(j + 1);
    if (complex) out += ",mode" + std::to_string(j + 1) + "_im";
  }
  out += '\n';
  for (Index k = 0; k < quasi.rows(); ++k) {
    out += format_double(times[static_cast<std::size_t>(k)]);
    for (Index j = 0; j < quasi.cols(); ++j) {
      out += "," + format_double(quasi(k, j).real());
      if (complex) out += "," + format_double(quasi(k, j).imag());
    }
    out += '\n';
  }
  return out;
}

Vector parse_vector(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw Error(Errc::BadConfig, "unterminated vector '" + std::string(text) + "'");
    text = text.substr(1, text.size() - 2);
  }
  if (trim(text).empty()) return Vector(0);
  auto parts = split(text, ',');
  Vector v(static_cast<Index>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) v(static_cast<Index>(k)) = parse_double(parts[k]);
  return v;
}

InputSignal parse_input_spec(std::string_view text, const std::filesystem::path& base_dir) {
  text = trim(text);
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(Errc::BadConfig, "input spec must be const:[...], impulse:[...] or pw:FILE");
  auto kind = text.substr(0, colon);
  auto body = text.substr(colon + 1);
  if (kind == "const") return InputSignal::constant(parse_vector(body));
  if (kind == "impulse") return InputSignal::impulse(parse_vector(body));
  if (kind == "pw") {
    std::filesystem::path p(std::string(trim(body)));
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    std::istringstream in(read_text(p));
    std::vector<double> knots;
    std::vector<Vector> values;
    std::string line;
    while (std::getline(in, line)) {
      auto l = trim(line);
      if (l.empty() || l.front() == '#') continue;
      if (std::isalpha(static_cast<unsigned char>(l.front()))) continue;  // header
      Vector row = parse_vector(l);
      if (row.size() < 2) throw Error(Errc::BadConfig, "piecewise rows need a time and at least one value");
      knots.push_back(row(0));
      values.push_back(row.tail(row.size() - 1));
    }
    return InputSignal::piecewise(std::move(knots), std::move(values));
  }
  throw Error(Errc::BadConfig, "unknown input kind '" + std::string(kind) + "'");
}

std::pair<std::vector<Index>, Vector> parse_stubborn(std::string_view text) {
  std::vector<Index> idx;
  std::vector<double> vals;
  for (auto part : split(trim(text), ',')) {
    part = trim(part);
    if (part.empty()) continue;
    auto eq = part.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::BadConfig, "stubborn entries look like AGENT=VALUE");
    double agent = parse_double(part.substr(0, eq));
    if (agent != std::floor(agent) || agent < 1) throw Error(Errc::BadConfig, "stubborn agent ids are positive integers");
    idx.push_back(static_cast<Index>(agent) - 1);
    vals.push_back(parse_double(part.substr(eq + 1)));
  }
  return {idx, Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()))};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(Errc::IoFailure, "write to '" + path.string() + "' failed");
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::BadConfig, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace netdiff::io
