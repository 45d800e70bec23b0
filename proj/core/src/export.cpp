#include "lpdiag/export.hpp"

#include <functional>
#include <sstream>

#include "json_io.hpp"
#include "lpdiag/error.hpp"
#include "lpdiag/parser.hpp"

namespace lpdiag {

namespace json_io {

json answer_json(const PseudoAnswer& a) {
  json residual = json::array();
  for (const Term& r : a.residual) residual.push_back(to_string(r));
  json carried = json::array();
  for (const Term& r : a.carried) carried.push_back(to_string(r));
  return json{{"answer", format_goals(a.answer)},
              {"residual", residual},
              {"carried", carried},
              {"flags", {{"i", a.flag_i}, {"ii", a.flag_ii}}}};
}

json node_json(const DDTree& tree, const DDNode& n) {
  json j{{"node_id", n.id},
         {"parent_id", n.parent ? json(*n.parent) : json(nullptr)},
         {"depth", n.depth},
         {"children", n.children},
         {"expanded", n.expanded},
         {"clause", n.clause}};
  if (tree.kind() == TreeKind::kIncorrectness) {
    j["kind"] = "correctness";
    j["atom"] = to_string(n.atom);
    json body = json::array();
    for (const Term& b : n.body) body.push_back(to_string(b));
    j["body"] = body;
  } else {
    j["kind"] = "completeness";
    j["call"] = to_string(n.atom);
    json answers = json::array();
    for (const PseudoAnswer& a : n.answers) answers.push_back(answer_json(a));
    j["answers"] = answers;
    j["status"] = status_name(n.status);
    j["unknown_quality"] = n.unknown_quality();
    json errors = json::array();
    for (const EngineError& e : n.errors)
      errors.push_back({{"error", error_code_name(e.code)}, {"detail", e.message}});
    j["errors"] = errors;
    if (!n.probe_note.empty()) j["probe"] = n.probe_note;
  }
  return j;
}

json proof_tree_json(const ProofTree& t) {
  json nodes = json::array();
  std::function<void(const ProofTree&, std::optional<std::size_t>)> walk =
      [&](const ProofTree& n, std::optional<std::size_t> parent) {
        std::size_t id = nodes.size() + 1;
        json j{{"node_id", id},
               {"parent_id", parent ? json(*parent) : json(nullptr)},
               {"kind", n.missing ? "missing" : n.builtin ? "builtin" : "clause"},
               {"atom", to_string(n.atom)},
               {"clause", n.clause ? json(*n.clause) : json(nullptr)},
               {"missing_markers", n.missing_markers()}};
        nodes.push_back(std::move(j));
        for (const ProofTree& c : n.children) walk(c, id);
      };
  walk(t, std::nullopt);
  json doc{{"pseudo", !t.complete()}, {"nodes", nodes}};
  if (t.call) doc["call"] = to_string(*t.call);
  return doc;
}

json dd_tree_json(const DDTree& tree) {
  json nodes = json::array();
  for (const DDNode& n : tree.nodes()) nodes.push_back(node_json(tree, n));
  return json{{"kind", tree_kind_name(tree.kind())}, {"root", tree.root()}, {"nodes", nodes}};
}

}  // namespace json_io

ExportFormat parse_export_format(std::string_view name) {
  if (name == "text") return ExportFormat::kText;
  if (name == "json") return ExportFormat::kJson;
  if (name == "graph" || name == "dot") return ExportFormat::kGraph;
  throw Error(ErrorCode::kInvalidArgument, "unknown format " + std::string(name));
}

std::string export_json(const ProofTree& t) { return json_io::proof_tree_json(t).dump(2); }
std::string export_json(const DDTree& tree) { return json_io::dd_tree_json(tree).dump(2); }

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string export_dot(const ProofTree& t) {
  std::ostringstream os;
  os << "digraph proof {\n  node [shape=box, fontname=\"monospace\"];\n";
  std::size_t next = 0;
  std::function<std::size_t(const ProofTree&)> walk = [&](const ProofTree& n) {
    std::size_t id = ++next;
    std::string label = to_string(n.atom);
    if (n.clause) label += "  [" + std::to_string(*n.clause) + "]";
    os << "  n" << id << " [label=\"" << dot_escape(label) << "\"";
    if (n.missing) os << ", style=dashed";
    if (n.builtin) os << ", shape=ellipse";
    os << "];\n";
    for (const ProofTree& c : n.children) {
      std::size_t cid = walk(c);
      os << "  n" << id << " -> n" << cid << ";\n";
    }
    return id;
  };
  walk(t);
  os << "}\n";
  return os.str();
}

std::string export_dot(const DDTree& tree) {
  std::ostringstream os;
  os << "digraph dd {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (const DDNode& n : tree.nodes()) {
    std::string label = dot_escape(to_string(n.atom));
    if (tree.kind() == TreeKind::kIncompleteness) {
      if (n.answers.empty()) label += "\\nno answers";
      for (const PseudoAnswer& a : n.answers) label += "\\n" + dot_escape(format_answer(a));
    }
    os << "  n" << n.id << " [label=\"" << label << "\"";
    if (!n.expanded) os << ", style=dashed";
    os << "];\n";
  }
  for (const DDNode& n : tree.nodes())
    for (NodeId c : n.children) os << "  n" << n.id << " -> n" << c << ";\n";
  os << "}\n";
  return os.str();
}

std::string export_text(const ProofTree& t) {
  std::string out;
  std::function<void(const ProofTree&, int)> walk = [&](const ProofTree& n, int indent) {
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
    out += to_string(n.atom);
    if (n.clause) out += "  [clause " + std::to_string(*n.clause) + "]";
    if (n.builtin) out += "  [builtin]";
    if (n.missing) out += "  [missing]";
    out += '\n';
    for (const ProofTree& c : n.children) walk(c, indent + 1);
  };
  walk(t, 0);
  return out;
}

std::string export_text(const DDTree& tree) {
  std::string out;
  for (NodeId id : tree.subtree(tree.root())) {
    const DDNode& n = tree.node(id);
    std::string pad(static_cast<std::size_t>(n.depth) * 2, ' ');
    out += pad + "#" + std::to_string(n.id) + " " + to_string(n.atom);
    if (tree.kind() == TreeKind::kIncompleteness) {
      out += "  <" + std::string(status_name(n.status)) + (n.expanded ? "" : ", unexpanded") + ">\n";
      if (n.answers.empty()) out += pad + "    (no answers)\n";
      for (const PseudoAnswer& a : n.answers) out += pad + "    " + format_answer(a) + "\n";
    } else {
      out += "\n";
    }
  }
  return out;
}

std::string export_tree(const DDTree& tree, ExportFormat format) {
  switch (format) {
    case ExportFormat::kJson:
      return export_json(tree);
    case ExportFormat::kGraph:
      return export_dot(tree);
    default:
      return export_text(tree);
  }
}

std::string export_tree(const ProofTree& t, ExportFormat format) {
  switch (format) {
    case ExportFormat::kJson:
      return export_json(t);
    case ExportFormat::kGraph:
      return export_dot(t);
    default:
      return export_text(t);
  }
}

}  // namespace lpdiag
