#include "lpdiag/enumerate.hpp"

#include <algorithm>
#include <unordered_map>

#include "lpdiag/substitution.hpp"

namespace lpdiag {

TermUniverse::TermUniverse(Signature sig, Bounds bounds, std::size_t max_terms)
    : sig_(std::move(sig)), bounds_(bounds), max_terms_(max_terms) {
  if (sig_.uses_integers && bounds_.int_lo <= bounds_.int_hi) {
    for (std::int64_t i = bounds_.int_lo; i <= bounds_.int_hi; ++i) ints_.push_back(Term::integer(i));
  } else {
    for (const Term& c : sig_.constants)
      if (c.is_int() && c.int_value() >= bounds_.int_lo && c.int_value() <= bounds_.int_hi)
        ints_.push_back(c);
  }
  std::vector<Term> level1 = ints_;
  for (const Term& c : sig_.constants)
    if (!c.is_int()) level1.push_back(c);
  std::sort(level1.begin(), level1.end(), enumeration_less);
  cumulative_.push_back({});
  cumulative_.push_back(std::move(level1));
}

const std::vector<Term>* TermUniverse::up_to(std::uint32_t d) {
  if (d < cumulative_.size()) return &cumulative_[d];
  if (overflow_) return nullptr;
  while (cumulative_.size() <= d) {
    const std::vector<Term>& prev = cumulative_.back();
    const std::size_t prev_prev = cumulative_[cumulative_.size() - 2].size();
    const std::uint32_t target_depth = static_cast<std::uint32_t>(cumulative_.size());

    // Count before building so an oversized level is refused cheaply.
    long double estimate = static_cast<long double>(prev.size());
    for (const PredicateKey& f : sig_.functors) {
      long double all = 1, old = 1;
      for (std::uint32_t i = 0; i < f.arity; ++i) {
        all *= static_cast<long double>(prev.size());
        old *= static_cast<long double>(prev_prev);
      }
      estimate += all - old;
    }
    if (estimate > static_cast<long double>(max_terms_)) {
      overflow_ = true;
      return nullptr;
    }

    std::vector<Term> fresh;
    for (const PredicateKey& f : sig_.functors) {
      if (prev.empty()) break;
      std::vector<std::size_t> idx(f.arity, 0);
      bool more = true;
      while (more) {
        std::uint32_t max_depth = 0;
        for (std::size_t i : idx) max_depth = std::max(max_depth, prev[i].depth());
        if (max_depth + 1 == target_depth) {
          std::vector<Term> args;
          args.reserve(idx.size());
          for (std::size_t i : idx) args.push_back(prev[i]);
          fresh.push_back(Term::compound(f.name, std::move(args)));
        }
        more = false;
        for (std::size_t pos = idx.size(); pos > 0; --pos) {
          if (++idx[pos - 1] < prev.size()) {
            more = true;
            break;
          }
          idx[pos - 1] = 0;
        }
      }
    }
    std::sort(fresh.begin(), fresh.end(), enumeration_less);
    std::vector<Term> next = prev;
    next.insert(next.end(), fresh.begin(), fresh.end());
    cumulative_.push_back(std::move(next));
  }
  return &cumulative_[d];
}

namespace {

void depth_limits(const Term& t, std::uint32_t level, std::uint32_t bound,
                  std::vector<std::pair<Term, std::uint32_t>>& out) {
  if (t.ground()) return;
  if (t.is_var()) {
    std::uint32_t allowed = bound + 1 > level ? bound + 1 - level : 0;
    for (auto& [v, lim] : out) {
      if (v.var_id() == t.var_id()) {
        lim = std::min(lim, allowed);
        return;
      }
    }
    out.emplace_back(t, allowed);
    return;
  }
  for (const Term& a : t.args()) depth_limits(a, level + 1, bound, out);
}

}  // namespace

std::vector<std::pair<Term, std::uint32_t>> variable_depth_limits(const Term& atom,
                                                                  std::uint32_t bound) {
  std::vector<std::pair<Term, std::uint32_t>> out;
  if (atom.is_var()) {
    depth_limits(atom, 1, bound, out);
    return out;
  }
  for (const Term& a : atom.args()) depth_limits(a, 1, bound, out);
  return out;
}

InstanceEnumerator::InstanceEnumerator(Term pattern, std::shared_ptr<TermUniverse> universe,
                                       std::size_t cap)
    : pattern_(std::move(pattern)), universe_(std::move(universe)), cap_(cap) {
  for (auto& [v, lim] : variable_depth_limits(pattern_, universe_->bounds().depth)) {
    vars_.push_back(v);
    var_limit_.push_back(lim);
    max_level_ = std::max(max_level_, lim);
    if (lim == 0) done_ = true;  // some variable has no admissible value
  }
}

bool InstanceEnumerator::start_level() {
  domains_.assign(vars_.size(), nullptr);
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const std::vector<Term>* dom = universe_->up_to(std::min(level_, var_limit_[i]));
    if (dom == nullptr) {
      truncated_ = true;
      done_ = true;
      return false;
    }
    if (dom->empty()) return false;
    domains_[i] = dom;
  }
  index_.assign(vars_.size(), 0);
  return true;
}

bool InstanceEnumerator::advance_odometer() {
  for (std::size_t pos = index_.size(); pos > 0; --pos) {
    if (++index_[pos - 1] < domains_[pos - 1]->size()) return true;
    index_[pos - 1] = 0;
  }
  return false;
}

std::optional<Term> InstanceEnumerator::next() {
  if (done_) return std::nullopt;
  if (vars_.empty()) {
    done_ = true;
    if (emitted_ground_) return std::nullopt;
    emitted_ground_ = true;
    if (cap_ == 0) {
      truncated_ = true;
      return std::nullopt;
    }
    ++produced_;
    return pattern_;
  }
  while (true) {
    if (!level_started_) {
      ++level_;
      if (level_ > max_level_) {
        done_ = true;
        return std::nullopt;
      }
      if (!start_level()) {
        if (done_) return std::nullopt;
        continue;
      }
      level_started_ = true;
    } else if (!advance_odometer()) {
      level_started_ = false;
      continue;
    }
    // Tuples of a lower level are revisited and skipped; bound that work too.
    if (++steps_ > kStepsPerInstance * (cap_ + 1)) {
      truncated_ = true;
      done_ = true;
      return std::nullopt;
    }
    std::uint32_t max_depth = 0;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      max_depth = std::max(max_depth, (*domains_[i])[index_[i]].depth());
    if (max_depth != level_) continue;
    if (produced_ >= cap_) {
      truncated_ = true;
      done_ = true;
      return std::nullopt;
    }
    std::unordered_map<VarId, Term> theta;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      theta.emplace(vars_[i].var_id(), (*domains_[i])[index_[i]]);
    ++produced_;
    return Substitution::simultaneous(std::move(theta)).apply(pattern_);
  }
}

std::vector<Term> enumerate_ground_atoms(const Program& prog, const PredicateKey& pred,
                                         const Bounds& bounds, std::size_t cap) {
  std::vector<Term> args;
  for (std::uint32_t i = 0; i < pred.arity; ++i) args.push_back(Term::fresh_variable());
  Term pattern = Term::compound(pred.name, std::move(args));
  auto universe = std::make_shared<TermUniverse>(prog.signature(), bounds);
  InstanceEnumerator it(pattern, universe, cap);
  std::vector<Term> out;
  while (auto a = it.next()) out.push_back(std::move(*a));
  return out;
}

namespace {

bool ints_in_range(const Term& t, const Bounds& b) {
  if (t.is_int()) return t.int_value() >= b.int_lo && t.int_value() <= b.int_hi;
  for (const Term& a : t.args())
    if (!ints_in_range(a, b)) return false;
  return true;
}

}  // namespace

bool within_bounds(const Term& atom, const Bounds& bounds) {
  return atom_depth(atom) <= bounds.depth && ints_in_range(atom, bounds);
}

}  // namespace lpdiag
