#include "spn/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "spn/errors.hpp"

namespace spn {

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::uint32_t parse_id(std::string_view token, std::size_t line, const char* what) {
  std::uint32_t value = 0;
  if (!parse_number(token, value))
    throw ParseError(line, std::string("expected non-negative integer ") + what + ", got '" + std::string(token) + "'");
  return value;
}

double parse_real(std::string_view token, std::size_t line, const char* what) {
  double value = 0;
  if (!parse_number(token, value) || !std::isfinite(value))
    throw ParseError(line, std::string("expected decimal ") + what + ", got '" + std::string(token) + "'");
  return value;
}

}  // namespace

SpnGraph parse_model(std::string_view text) {
  struct PendingEdge {
    EdgeSpec spec;
    std::size_t line;
  };
  std::map<std::uint32_t, std::pair<Node, std::size_t>> declared;
  std::vector<PendingEdge> edges;
  std::optional<std::uint32_t> vars;

  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    auto tok = tokens(strip_comment(lines[i]));
    if (tok.empty()) continue;
    if (tok[0] == "vars") {
      if (tok.size() != 2) throw ParseError(line, "expected 'vars <n>'");
      if (vars) throw ParseError(line, "duplicate 'vars' header");
      vars = parse_id(tok[1], line, "variable count");
    } else if (tok[0] == "node") {
      if (tok.size() < 3) throw ParseError(line, "expected 'node <id> sum|prod|leaf <var> <value>'");
      std::uint32_t id = parse_id(tok[1], line, "node id");
      Node node;
      if (tok[2] == "sum" && tok.size() == 3) {
        node = Node::sum();
      } else if (tok[2] == "prod" && tok.size() == 3) {
        node = Node::product();
      } else if (tok[2] == "leaf" && tok.size() == 5) {
        node = Node::leaf(parse_id(tok[3], line, "variable index"), parse_id(tok[4], line, "category value"));
      } else {
        throw ParseError(line, "malformed node declaration");
      }
      if (!declared.emplace(id, std::make_pair(node, line)).second)
        throw ParseError(line, "duplicate node id " + std::to_string(id));
    } else if (tok[0] == "edge") {
      if (tok.size() != 3 && tok.size() != 4) throw ParseError(line, "expected 'edge <parent> <child> [weight]'");
      EdgeSpec spec{parse_id(tok[1], line, "parent id"), parse_id(tok[2], line, "child id"), std::nullopt};
      if (tok.size() == 4) spec.weight = parse_real(tok[3], line, "weight");
      edges.push_back({spec, line});
    } else {
      throw ParseError(line, "unknown statement '" + std::string(tok[0]) + "'");
    }
  }

  std::vector<Node> nodes;
  nodes.reserve(declared.size());
  for (const auto& [id, entry] : declared) {
    if (id != nodes.size())
      throw ParseError(entry.second, "node ids must be dense from 0; missing id " + std::to_string(nodes.size()));
    nodes.push_back(entry.first);
  }

  std::vector<EdgeSpec> specs;
  specs.reserve(edges.size());
  std::map<std::pair<NodeId, NodeId>, std::size_t> seen;
  for (const auto& [spec, line] : edges) {
    for (NodeId id : {spec.parent, spec.child})
      if (id >= nodes.size()) throw ParseError(line, "unknown node id " + std::to_string(id));
    const Node& parent = nodes[spec.parent];
    if (parent.is_leaf()) throw ParseError(line, "leaf node " + std::to_string(spec.parent) + " cannot have children");
    if (parent.is_sum() && !spec.weight) throw ParseError(line, "missing weight on sum edge");
    if (!parent.is_sum() && spec.weight) throw ParseError(line, "weight on non-sum edge");
    if (!seen.emplace(std::make_pair(spec.parent, spec.child), line).second)
      throw ParseError(line, "parallel edge " + std::to_string(spec.parent) + " -> " + std::to_string(spec.child));
    specs.push_back(spec);
  }
  return SpnGraph(std::move(nodes), specs, vars);
}

std::string serialize_model(const SpnGraph& graph) {
  std::ostringstream os;
  if (graph.vars_declared()) os << "vars " << graph.num_vars() << '\n';
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    const Node& node = graph.node(v);
    os << "node " << v << ' ';
    switch (node.type) {
      case NodeType::Sum: os << "sum"; break;
      case NodeType::Product: os << "prod"; break;
      case NodeType::Leaf: os << "leaf " << node.var << ' ' << node.value; break;
    }
    os << '\n';
  }
  for (const EdgeSpec& e : graph.edge_specs()) {
    os << "edge " << e.parent << ' ' << e.child;
    if (e.weight) os << ' ' << format_number(*e.weight, 17);
    os << '\n';
  }
  return os.str();
}

DirichletPrior parse_prior(std::string_view text, const SpnGraph& graph) {
  DirichletPrior prior = uniform_prior(graph);
  std::vector<char> assigned(graph.num_nodes(), 0);
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    auto body = trim(strip_comment(lines[i]));
    if (body.empty()) continue;
    auto colon = body.find(':');
    if (colon == std::string_view::npos) throw ParseError(line, "expected '<sum-node-id>: a1 ... ak'");
    NodeId id = parse_id(trim(body.substr(0, colon)), line, "node id");
    if (id >= graph.num_nodes()) throw ParseError(line, "unknown node id " + std::to_string(id));
    if (!graph.node(id).is_sum()) throw ParseError(line, "node " + std::to_string(id) + " is not a sum node");
    if (assigned[id]) throw ParseError(line, "duplicate prior for node " + std::to_string(id));
    assigned[id] = 1;
    auto values = tokens(body.substr(colon + 1));
    if (values.size() != graph.num_children(id))
      throw ParseError(line, "node " + std::to_string(id) + " has " + std::to_string(graph.num_children(id)) +
                                 " children but " + std::to_string(values.size()) + " hyperparameters were given");
    for (std::size_t j = 0; j < values.size(); ++j) {
      double a = parse_real(values[j], line, "hyperparameter");
      if (!(a > 0.0)) throw ParseError(line, "non-positive hyperparameter " + std::string(values[j]));
      prior.alpha[graph.edge_begin(id) + j] = a;
    }
  }
  return prior;
}

std::string serialize_prior(const SpnGraph& graph, const DirichletPrior& prior) {
  std::ostringstream os;
  for (NodeId k : graph.sum_nodes()) {
    os << k << ':';
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) os << ' ' << format_number(prior.alpha[e], 17);
    os << '\n';
  }
  return os.str();
}

Instance parse_instance(std::string_view row, const SpnGraph& graph, std::size_t row_number) {
  Instance inst;
  inst.values.reserve(graph.num_vars());
  std::size_t start = 0;
  std::size_t column = 1;
  row = trim(row);
  while (true) {
    auto comma = row.find(',', start);
    auto cell = trim(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (column > graph.num_vars())
      throw DataError(row_number, column, "too many columns; model has " + std::to_string(graph.num_vars()) + " variables");
    if (cell == "?") {
      inst.values.push_back(Instance::kMissing);
    } else {
      std::int32_t value = 0;
      if (!parse_number(cell, value) || value < 0)
        throw DataError(row_number, column, "expected category integer or '?', got '" + std::string(cell) + "'");
      if (static_cast<std::uint32_t>(value) >= graph.arities()[column - 1])
        throw DataError(row_number, column, "category " + std::to_string(value) + " out of range for variable " +
                                                std::to_string(column - 1));
      inst.values.push_back(value);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
    ++column;
  }
  if (inst.values.size() != graph.num_vars())
    throw DataError(row_number, inst.values.size() + 1,
                    "expected " + std::to_string(graph.num_vars()) + " columns, got " + std::to_string(inst.values.size()));
  return inst;
}

std::vector<Instance> parse_data(std::string_view text, const SpnGraph& graph) {
  std::vector<Instance> out;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    out.push_back(parse_instance(lines[i], graph, i + 1));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string format_number(double value, int significant_digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
  return buf;
}

}  // namespace spn
