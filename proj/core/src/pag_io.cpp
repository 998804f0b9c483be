#include "cier/causal.hpp"

#include <json.hpp>

#include <sstream>

namespace cier::causal {

namespace {

char mark_char(EndpointMark m) {
  switch (m) {
    case EndpointMark::Tail: return '-';
    case EndpointMark::Arrow: return '>';
    case EndpointMark::Circle: return 'o';
    case EndpointMark::None: break;
  }
  return '?';
}

std::string node_name(int v, std::span<const std::string> names) {
  if (static_cast<std::size_t>(v) < names.size()) return names[static_cast<std::size_t>(v)];
  return "X" + std::to_string(v);
}

}  // namespace

std::string to_dot(const Pag& pag, std::span<const std::string> names) {
  std::ostringstream out;
  out << "digraph pag {\n";
  for (int v = 0; v < pag.size(); ++v) {
    out << "  \"" << node_name(v, names) << "\"";
    if (v == pag.outcome()) out << " [shape=box]";
    out << ";\n";
  }
  for (const PagEdge& e : pag.edges()) {
    int tail = e.a;
    int head = e.b;
    EndpointMark at_tail = e.mark_at_a;
    EndpointMark at_head = e.mark_at_b;
    // Point the dot edge along the arrow when only one end has one.
    if (at_tail == EndpointMark::Arrow && at_head != EndpointMark::Arrow) {
      std::swap(tail, head);
      std::swap(at_tail, at_head);
    }
    out << "  \"" << node_name(tail, names) << "\" -> \"" << node_name(head, names) << "\" [mark=\""
        << mark_char(at_tail) << mark_char(at_head) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string effects_to_json(const CausalEffectTable& table, std::span<const std::string> names) {
  nlohmann::json j = nlohmann::json::array();
  for (const FactorEffect& f : table.factors) {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : f.paths) {
      std::vector<std::string> named;
      for (int v : p) named.push_back(node_name(v, names));
      paths.push_back(named);
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [key, v] : table.edge_ate) {
      if (key.first == f.factor) {
        edges.push_back({{"to", node_name(key.second, names)}, {"ate", v}});
      }
    }
    j.push_back({{"factor", node_name(f.factor, names)},
                 {"id", f.factor},
                 {"strength", f.strength},
                 {"relevant", f.relevant},
                 {"paths", std::move(paths)},
                 {"out_edges", std::move(edges)}});
  }
  return j.dump(2);
}

}  // namespace cier::causal
