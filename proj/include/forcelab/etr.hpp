#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bits.hpp"
#include "errors.hpp"

namespace forcelab {

// Read access to the slices strictly below the stage being computed.
class EtrView {
 public:
  EtrView(const std::vector<CondSet>& slices, std::size_t alpha) : slices_(slices), alpha_(alpha) {}

  std::size_t stage() const { return alpha_; }

  bool contains(std::size_t beta, std::size_t x) const {
    if (beta >= alpha_)
      throw DomainError("recursion step at stage " + std::to_string(alpha_) + " read slice " +
                        std::to_string(beta));
    return slices_[beta].test(x);
  }

  bool in_any_earlier(std::size_t x) const {
    for (std::size_t b = 0; b < alpha_; ++b)
      if (slices_[b].test(x)) return true;
    return false;
  }

 private:
  const std::vector<CondSet>& slices_;
  std::size_t alpha_;
};

// S is the unique class with S_alpha = {x in domain : step(x, alpha, S restricted below alpha)}.
template <class X>
struct RecursionInstance {
  std::string label;
  std::size_t length = 0;
  std::vector<X> domain;
  std::function<bool(std::size_t x, const EtrView& view)> step;
};

struct EtrSolution {
  std::vector<CondSet> slices;
  std::size_t steps = 0;

  bool contains(std::size_t alpha, std::size_t x) const { return slices[alpha].test(x); }
};

constexpr std::size_t kDefaultEtrBudget = 10'000'000;

template <class X>
EtrSolution etr_solve(const RecursionInstance<X>& inst, std::size_t budget = kDefaultEtrBudget) {
  std::size_t n = inst.domain.size();
  if (inst.length != 0 && n > budget / inst.length)
    throw ResourceError("recursion '" + inst.label + "' needs " + std::to_string(inst.length) + " x " +
                        std::to_string(n) + " steps, over the budget");
  EtrSolution sol;
  sol.slices.reserve(inst.length);
  for (std::size_t alpha = 0; alpha < inst.length; ++alpha) {
    CondSet slice(n);
    {
      EtrView view(sol.slices, alpha);
      for (std::size_t x = 0; x < n; ++x)
        if (inst.step(x, view)) slice.set(x);
    }
    sol.steps += n;
    sol.slices.push_back(std::move(slice));
  }
  return sol;
}

// First (alpha, x) at which the candidate disagrees with the recursion, if any.
template <class X>
std::optional<std::pair<std::size_t, std::size_t>> verify_solution(const RecursionInstance<X>& inst,
                                                                   const EtrSolution& s) {
  std::size_t n = inst.domain.size();
  if (s.slices.size() != inst.length) return std::make_pair(s.slices.size(), std::size_t{0});
  for (std::size_t alpha = 0; alpha < inst.length; ++alpha) {
    EtrView view(s.slices, alpha);
    for (std::size_t x = 0; x < n; ++x)
      if (inst.step(x, view) != s.slices[alpha].test(x)) return std::make_pair(alpha, x);
  }
  return std::nullopt;
}

// Flattens a lexicographic (major, minor) stage into a single ordinal below major_count * minor_span.
constexpr std::size_t lex_stage(std::size_t major, std::size_t minor, std::size_t minor_span) {
  return major * minor_span + minor;
}

}  // namespace forcelab
