#pragma once

// JSON views of library objects, shared by the exporters and the HTTP
// service. Not installed: the public API exposes documents as strings.

#include <json.hpp>

#include "lpdiag/trees.hpp"

namespace lpdiag::json_io {

using nlohmann::json;

json answer_json(const PseudoAnswer& a);
json node_json(const DDTree& tree, const DDNode& n);
json proof_tree_json(const ProofTree& t);
json dd_tree_json(const DDTree& tree);

}  // namespace lpdiag::json_io
