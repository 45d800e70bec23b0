#pragma once

#include <string>

#include "lpdiag/trees.hpp"

namespace lpdiag {

enum class ExportFormat { kText, kJson, kGraph };

/// Parses "text", "json" or "graph" (also "dot"); throws Error(kInvalidArgument).
ExportFormat parse_export_format(std::string_view name);

/// Node records (node_id, parent_id, kind, content, flags) as a JSON document.
std::string export_json(const ProofTree& t);
std::string export_json(const DDTree& tree);

/// Graphviz digraph.
std::string export_dot(const ProofTree& t);
std::string export_dot(const DDTree& tree);

/// Indented outline, one node per line.
std::string export_text(const ProofTree& t);
std::string export_text(const DDTree& tree);

std::string export_tree(const DDTree& tree, ExportFormat format);
std::string export_tree(const ProofTree& t, ExportFormat format);

}  // namespace lpdiag
