#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "lpdiag/program.hpp"
#include "lpdiag/term.hpp"

namespace lpdiag {

/// Finite slice of the Herbrand universe: term depth and integer range.
struct Bounds {
  std::uint32_t depth = 4;
  std::int64_t int_lo = -8;
  std::int64_t int_hi = 8;

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Ground terms over a signature, materialized level by level on demand.
/// Levels larger than `max_terms` are refused, so callers can report
/// truncation instead of exhausting memory.
class TermUniverse {
 public:
  static constexpr std::size_t kDefaultMaxTerms = 400000;

  TermUniverse(Signature sig, Bounds bounds, std::size_t max_terms = kDefaultMaxTerms);

  const Signature& signature() const noexcept { return sig_; }
  const Bounds& bounds() const noexcept { return bounds_; }

  /// All ground terms of depth <= d in enumeration order, or nullptr when
  /// that set exceeds the size limit. Returned pointers stay valid for the
  /// universe's lifetime.
  const std::vector<Term>* up_to(std::uint32_t d);
  /// Integers of the range, ascending.
  const std::vector<Term>& integers() const noexcept { return ints_; }

 private:
  Signature sig_;
  Bounds bounds_;
  std::size_t max_terms_;
  std::vector<Term> ints_;
  // cumulative_[d] = terms of depth <= d. A deque, so building a deeper
  // level leaves pointers to the shallower ones valid.
  std::deque<std::vector<Term>> cumulative_;
  bool overflow_ = false;
};

/// Lazily enumerates the ground instances of a pattern whose argument depths
/// stay within the universe's depth bound, ordered by (depth, standard order)
/// of the variable assignment. Stops after `cap` instances.
class InstanceEnumerator {
 public:
  InstanceEnumerator(Term pattern, std::shared_ptr<TermUniverse> universe, std::size_t cap);

  std::optional<Term> next();
  /// True once the cap was reached or a universe level could not be built.
  bool truncated() const noexcept { return truncated_; }
  bool exhausted() const noexcept { return done_ && !truncated_; }
  std::size_t produced() const noexcept { return produced_; }

 private:
  bool start_level();
  bool advance_odometer();

  Term pattern_;
  std::shared_ptr<TermUniverse> universe_;
  std::size_t cap_;
  std::vector<Term> vars_;
  std::vector<std::uint32_t> var_limit_;  // max depth allowed per variable
  std::uint32_t level_ = 0;
  std::uint32_t max_level_ = 0;
  std::vector<const std::vector<Term>*> domains_;
  std::vector<std::size_t> index_;
  bool level_started_ = false;
  bool done_ = false;
  bool truncated_ = false;
  bool emitted_ground_ = false;
  std::size_t produced_ = 0;
  std::size_t steps_ = 0;
  static constexpr std::size_t kStepsPerInstance = 256;
};

/// Ground atoms of `pred` over the program's signature within `bounds`, in
/// (depth, lexicographic) order, without duplicates.
std::vector<Term> enumerate_ground_atoms(const Program& prog, const PredicateKey& pred,
                                         const Bounds& bounds,
                                         std::size_t cap = TermUniverse::kDefaultMaxTerms);

/// Atom depth within the bound and every integer inside the range.
bool within_bounds(const Term& atom, const Bounds& bounds);

/// Per-variable depth allowance: bound minus nesting depth of its shallowest
/// occurrence inside the atom's arguments, plus one.
std::vector<std::pair<Term, std::uint32_t>> variable_depth_limits(const Term& atom,
                                                                  std::uint32_t bound);

}  // namespace lpdiag
