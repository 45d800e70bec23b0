#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lpdiag/engine.hpp"
#include "lpdiag/parser.hpp"

namespace lpdiag::testing {

inline std::string fixture_text(const std::string& name) {
  std::ifstream in(std::filesystem::path(LPDIAG_FIXTURE_DIR) / name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Program fixture(const std::string& name) { return parse_program(fixture_text(name)); }

inline std::vector<std::string> answer_strings(const Outcome& out) {
  std::vector<std::string> v;
  for (const PseudoAnswer& a : out.answers) v.push_back(format_goals(a.answer));
  return v;
}

}  // namespace lpdiag::testing
