#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "formula.hpp"
#include "hfset.hpp"

namespace forcelab {

namespace detail {
inline Formula theta_at(const HFSet& a, const Term& x, std::map<std::pair<std::uint32_t, std::string>, Formula>& memo) {
  std::string z = "th." + std::to_string(a.rank());
  std::vector<Formula> alts;
  for (const auto& u : a.children()) {
    auto key = std::make_pair(u.id(), z);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, theta_at(u, var(z), memo)).first;
    alts.push_back(it->second);
  }
  return f_forall({z}, f_iff(f_in(var(z), x), f_or(std::move(alts))));
}
}  // namespace detail

// theta_a(x): forall z (z in x <-> OR_{u in a} theta_u(z)); defines a in transitive structures containing it.
inline Formula theta_formula(const HFSet& a, const Term& x = var("x")) {
  std::map<std::pair<std::uint32_t, std::string>, Formula> memo;
  return detail::theta_at(a, x, memo);
}

}  // namespace forcelab
