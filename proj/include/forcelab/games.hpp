#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "bits.hpp"
#include "errors.hpp"
#include "etr.hpp"
#include "formula.hpp"
#include "sexpr.hpp"
#include "truth.hpp"

namespace forcelab {

enum class Player : std::uint8_t { I = 1, II = 2 };

inline Player opponent(Player p) { return p == Player::I ? Player::II : Player::I; }
inline const char* player_name(Player p) { return p == Player::I ? "I" : "II"; }

struct GameNode {
  std::vector<std::uint32_t> children;
  Player mover = Player::I;  // meaningful when children is non-empty
  Player winner = Player::I;  // meaningful at terminals
  bool terminal() const { return children.empty(); }
};

struct GameTree {
  std::vector<GameNode> nodes;
  std::uint32_t root = 0;

  std::uint32_t add_terminal(Player winner) {
    nodes.push_back({{}, Player::I, winner});
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }
  std::uint32_t add_node(Player mover, std::vector<std::uint32_t> children) {
    if (children.empty()) throw DomainError("a non-terminal node needs at least one child");
    nodes.push_back({std::move(children), mover, Player::I});
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }
  std::size_t size() const { return nodes.size(); }
};

// Children must have smaller indices than parents in trees built bottom-up; validate() checks the
// general shape instead.
inline void validate(const GameTree& T) {
  if (T.nodes.empty()) throw DomainError("empty game tree");
  if (T.root >= T.nodes.size()) throw DomainError("game root out of range");
  std::vector<int> parents(T.nodes.size(), 0);
  for (const auto& n : T.nodes)
    for (auto c : n.children) {
      if (c >= T.nodes.size()) throw DomainError("game child out of range");
      if (++parents[c] > 1) throw DomainError("game node has two parents");
    }
  if (parents[T.root]) throw DomainError("game root has a parent");
  std::vector<int> state(T.nodes.size(), 0);
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{T.root, 0}};
  state[T.root] = 1;
  while (!stack.empty()) {
    auto& [v, i] = stack.back();
    if (i < T.nodes[v].children.size()) {
      std::uint32_t c = T.nodes[v].children[i++];
      if (state[c] == 1) throw DomainError("game tree has a cycle");
      if (state[c] == 0) {
        state[c] = 1;
        stack.push_back({c, 0});
      }
    } else {
      state[v] = 2;
      stack.pop_back();
    }
  }
}

inline std::vector<std::uint32_t> postorder(const GameTree& T) {
  std::vector<std::uint32_t> out;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{T.root, 0}};
  while (!stack.empty()) {
    auto& [v, i] = stack.back();
    if (i < T.nodes[v].children.size()) {
      std::uint32_t c = T.nodes[v].children[i++];
      stack.push_back({c, 0});
    } else {
      out.push_back(v);
      stack.pop_back();
    }
  }
  return out;
}

// Terminals 0, internal nodes one more than their largest child; nodes off the root's tree get 0.
inline std::vector<std::size_t> continuous_rank(const GameTree& T) {
  std::vector<std::size_t> r(T.nodes.size(), 0);
  for (auto v : postorder(T)) {
    std::size_t m = 0;
    for (auto c : T.nodes[v].children) m = std::max(m, r[c] + 1);
    r[v] = m;
  }
  return r;
}

using Strategy = std::map<std::uint32_t, std::uint32_t>;

struct ZermeloSolution {
  std::vector<Player> labels;
  Strategy strategy_I, strategy_II;
  Player root_winner() const { return labels.at(root); }
  std::uint32_t root = 0;
};

inline RecursionInstance<std::uint32_t> zermelo_instance(const GameTree& T, const std::vector<std::size_t>& rank) {
  RecursionInstance<std::uint32_t> inst;
  inst.label = "zermelo";
  inst.length = rank.empty() ? 0 : *std::max_element(rank.begin(), rank.end()) + 1;
  inst.domain.resize(T.nodes.size());
  for (std::uint32_t i = 0; i < T.nodes.size(); ++i) inst.domain[i] = i;
  const GameTree* TT = &T;
  const std::vector<std::size_t>* R = &rank;
  // A node lies in the solution when it is labelled for player I.
  inst.step = [TT, R](std::size_t x, const EtrView& view) -> bool {
    if ((*R)[x] != view.stage()) return false;
    const GameNode& n = TT->nodes[x];
    if (n.terminal()) return n.winner == Player::I;
    bool any = false, all = true;
    for (auto c : n.children) {
      bool l = view.contains((*R)[c], c);
      any = any || l;
      all = all && l;
    }
    return n.mover == Player::I ? any : all;
  };
  return inst;
}

// Back-propagation by rank; each player's strategy stays on nodes carrying their label when it can.
inline ZermeloSolution zermelo_solve(const GameTree& T) {
  validate(T);
  auto rank = continuous_rank(T);
  auto sol = etr_solve(zermelo_instance(T, rank), std::size_t{1} << 40);
  ZermeloSolution z;
  z.root = T.root;
  z.labels.assign(T.nodes.size(), Player::II);
  for (std::size_t x = 0; x < T.nodes.size(); ++x)
    if (sol.slices[rank[x]].test(x)) z.labels[x] = Player::I;
  for (std::uint32_t v = 0; v < T.nodes.size(); ++v) {
    const GameNode& n = T.nodes[v];
    if (n.terminal()) continue;
    std::uint32_t pick = n.children[0];
    for (auto c : n.children)
      if (z.labels[c] == n.mover) {
        pick = c;
        break;
      }
    (n.mover == Player::I ? z.strategy_I : z.strategy_II)[v] = pick;
  }
  return z;
}

// The first node whose label disagrees with the back-propagation rule, if any.
inline std::optional<std::uint32_t> check_labels(const GameTree& T, const std::vector<Player>& labels) {
  for (std::uint32_t v = 0; v < T.nodes.size(); ++v) {
    const GameNode& n = T.nodes[v];
    Player expect;
    if (n.terminal()) {
      expect = n.winner;
    } else {
      bool any = std::any_of(n.children.begin(), n.children.end(), [&](auto c) { return labels[c] == n.mover; });
      expect = any ? n.mover : opponent(n.mover);
    }
    if (labels[v] != expect) return v;
  }
  return std::nullopt;
}

struct StrategyVerdict {
  bool ok = true;
  std::vector<std::uint32_t> counter_line;
};

// Plays s for `player` against every line of the opponent.
inline StrategyVerdict verify_strategy(const GameTree& T, const Strategy& s, Player player) {
  StrategyVerdict out;
  std::vector<std::uint32_t> line;
  auto rec = [&](auto&& self, std::uint32_t v) -> bool {
    line.push_back(v);
    const GameNode& n = T.nodes[v];
    bool ok;
    if (n.terminal()) {
      ok = n.winner == player;
    } else if (n.mover == player) {
      auto it = s.find(v);
      if (it == s.end() || std::find(n.children.begin(), n.children.end(), it->second) == n.children.end()) ok = false;
      else ok = self(self, it->second);
    } else {
      ok = true;
      for (auto c : n.children)
        if (!self(self, c)) {
          ok = false;
          break;
        }
    }
    if (ok) line.pop_back();
    return ok;
  };
  out.ok = rec(rec, T.root);
  if (!out.ok) out.counter_line = line;
  return out;
}

inline GameTree random_game_tree(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_children = 4) {
  if (max_nodes == 0) throw DomainError("random_game_tree needs at least one node");
  std::size_t target = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
  // Grow a shape top-down, then emit it bottom-up so that node ids are stable.
  std::vector<std::vector<std::size_t>> kids(1);
  std::vector<std::size_t> frontier{0};
  std::size_t count = 1;
  while (count < target && !frontier.empty()) {
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng);
    std::size_t v = frontier[pick];
    std::size_t k = std::uniform_int_distribution<std::size_t>(1, max_children)(rng);
    k = std::min(k, target - count);
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
    for (std::size_t i = 0; i < k; ++i) {
      kids[v].push_back(kids.size());
      frontier.push_back(kids.size());
      kids.emplace_back();
      ++count;
    }
  }
  GameTree T;
  T.nodes.resize(kids.size());
  std::bernoulli_distribution coin(0.5);
  for (std::size_t v = 0; v < kids.size(); ++v) {
    for (auto c : kids[v]) T.nodes[v].children.push_back(static_cast<std::uint32_t>(c));
    if (kids[v].empty()) T.nodes[v].winner = coin(rng) ? Player::I : Player::II;
    else T.nodes[v].mover = coin(rng) ? Player::I : Player::II;
  }
  T.root = 0;
  return T;
}

inline std::string to_sexpr(const GameTree& T) {
  std::string s = "(game";
  for (std::size_t v = 0; v < T.nodes.size(); ++v) {
    const GameNode& n = T.nodes[v];
    if (n.terminal()) {
      s += "\n  (terminal " + std::to_string(v) + " (winner " + player_name(n.winner) + "))";
    } else {
      s += "\n  (node " + std::to_string(v) + " (mover " + player_name(n.mover) + ") (children";
      for (auto c : n.children) s += " " + std::to_string(c);
      s += "))";
    }
  }
  s += "\n  (root " + std::to_string(T.root) + "))";
  return s;
}

inline GameTree game_from_sexp(const Sexp& e) {
  expect_list(e, "game");
  auto player = [](const Sexp& x, const char* head) {
    expect_list(x, head);
    if (x.items.size() != 2 || x.items[1].is_list) throw ParseError(std::string("(") + head + " I|II) expected", x.pos);
    if (x.items[1].atom == "I") return Player::I;
    if (x.items[1].atom == "II") return Player::II;
    throw ParseError("player must be I or II", x.items[1].pos);
  };
  std::map<std::size_t, GameNode> nodes;
  std::optional<std::size_t> root;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const Sexp& it = e.items[i];
    if (it.head_is("root")) {
      if (it.items.size() != 2) throw ParseError("(root id) expected", it.pos);
      root = parse_index(it.items[1]);
      continue;
    }
    GameNode n;
    std::size_t id;
    if (it.head_is("terminal")) {
      if (it.items.size() != 3) throw ParseError("(terminal id (winner P)) expected", it.pos);
      id = parse_index(it.items[1]);
      n.winner = player(it.items[2], "winner");
    } else if (it.head_is("node")) {
      if (it.items.size() != 4) throw ParseError("(node id (mover P) (children ...)) expected", it.pos);
      id = parse_index(it.items[1]);
      n.mover = player(it.items[2], "mover");
      expect_list(it.items[3], "children");
      for (std::size_t k = 1; k < it.items[3].items.size(); ++k)
        n.children.push_back(static_cast<std::uint32_t>(parse_index(it.items[3].items[k])));
      if (n.children.empty()) throw ParseError("a node needs at least one child", it.pos);
    } else {
      throw ParseError("expected node, terminal or root", it.pos);
    }
    if (!nodes.emplace(id, std::move(n)).second) throw ParseError("duplicate node id " + std::to_string(id), it.pos);
  }
  if (!root) throw ParseError("game has no (root id)", e.pos);
  GameTree T;
  std::size_t n = nodes.empty() ? 0 : nodes.rbegin()->first + 1;
  if (nodes.size() != n) throw ParseError("game node ids must be 0..n-1", e.pos);
  for (auto& [id, node] : nodes) T.nodes.push_back(std::move(node));
  T.root = static_cast<std::uint32_t>(*root);
  try {
    validate(T);
  } catch (const DomainError& err) {
    throw ParseError(err.what(), e.pos);
  }
  return T;
}

inline GameTree parse_game(std::string_view text) { return game_from_sexp(read_sexp(text)); }

// The truth-telling game: the interrogator (I) names a pool entry and a smaller clock value; the
// truth-teller (II) answers with a verdict, plus a witness for a true existential or a false
// universal. II loses on any explicit violation of the Tarski clauses among the declarations so
// far; I loses when the clock runs out.
struct TruthGame {
  GameTree tree;
  std::shared_ptr<const PoolIndex> index;
  std::size_t clock = 0;

  struct Annotation {
    enum class Kind : std::uint8_t { Root, Question, Answer } kind = Kind::Root;
    std::size_t entry = 0;
    std::size_t clock = 0;  // clock value after the question
    bool verdict = false;
    std::optional<std::size_t> witness;  // domain index
  };
  std::vector<Annotation> notes;
};

struct TruthGameOptions {
  std::size_t node_budget = 2'000'000;
};

namespace detail {

class TruthGameBuilder {
 public:
  TruthGameBuilder(const FiniteStructure& M, std::shared_ptr<const PoolIndex> I, const TruthGameOptions& opt)
      : M_(M), I_(std::move(I)), opt_(opt) {
    const PoolIndex& I0 = *I_;
    std::size_t n = I0.size();
    atom_.assign(n, -1);
    for (std::size_t x = 0; x < n; ++x) {
      auto [pos, digits] = I0.decode(x);
      if (is_atomic(I0.pool()[pos].kind())) atom_[x] = atomic_truth(M_, I0, pos, digits) ? 1 : 0;
    }
  }

  TruthGame build(std::size_t clock) {
    TruthGame g;
    g.index = I_;
    g.clock = clock;
    out_ = &g;
    declared_.assign(I_->size(), -1);
    std::uint32_t root = question_node(clock);
    note(root, {});
    g.tree.root = root;
    return g;
  }

 private:
  std::uint32_t fresh() {
    if (out_->tree.nodes.size() >= opt_.node_budget)
      throw ResourceError("truth-telling game exceeds the node budget of " + std::to_string(opt_.node_budget) +
                          " (pool entries x clock)");
    out_->tree.nodes.emplace_back();
    out_->notes.emplace_back();
    return static_cast<std::uint32_t>(out_->tree.nodes.size() - 1);
  }
  void note(std::uint32_t v, TruthGame::Annotation a) { out_->notes[v] = a; }

  // Interrogator to move with the clock at c.
  std::uint32_t question_node(std::size_t c) {
    std::uint32_t v = fresh();
    if (c == 0) {
      out_->tree.nodes[v].winner = Player::II;
      return v;
    }
    std::vector<std::uint32_t> kids;
    for (std::size_t x = 0; x < I_->size(); ++x)
      for (std::size_t c2 = 0; c2 < c; ++c2) {
        std::uint32_t k = answer_node(x, c2);
        kids.push_back(k);
      }
    out_->tree.nodes[v].mover = Player::I;
    out_->tree.nodes[v].children = std::move(kids);
    return v;
  }

  // Truth-teller to answer entry x, after which the clock is c.
  std::uint32_t answer_node(std::size_t x, std::size_t c) {
    std::uint32_t v = fresh();
    TruthGame::Annotation q;
    q.kind = TruthGame::Annotation::Kind::Question;
    q.entry = x;
    q.clock = c;
    note(v, q);
    auto [pos, digits] = I_->decode(x);
    const Formula& f = I_->pool()[pos];
    std::vector<std::uint32_t> kids;
    for (bool verdict : {true, false}) {
      bool needs_witness = (f.kind() == FKind::Exists && verdict) || (f.kind() == FKind::Forall && !verdict);
      if (!needs_witness) {
        kids.push_back(after_answer(x, c, verdict, std::nullopt, {}));
        continue;
      }
      const auto& vars = f.vars();
      const Formula& body = f.kids()[0];
      std::size_t dn = I_->domain().size();
      std::size_t combos = 1;
      for (std::size_t i = 0; i < vars.size(); ++i) combos *= dn;
      for (std::size_t w = 0; w < combos; ++w) {
        DigitEnv env;
        for (std::size_t i = 0; i < f.free_vars().size(); ++i) env.b.emplace_back(f.free_vars()[i], digits[i]);
        std::size_t k = w;
        for (const auto& var : vars) {
          env.b.emplace_back(var, k % dn);
          k /= dn;
        }
        std::size_t inst = I_->index(*I_->position(body), env.digits(body));
        // The witness instance is declared with the verdict that makes the quantifier claim hold.
        kids.push_back(after_answer(x, c, verdict, w, {{inst, verdict}}));
      }
    }
    out_->tree.nodes[v].mover = Player::II;
    out_->tree.nodes[v].children = std::move(kids);
    return v;
  }

  std::uint32_t after_answer(std::size_t x, std::size_t c, bool verdict, std::optional<std::size_t> witness,
                             std::vector<std::pair<std::size_t, bool>> extra) {
    std::vector<std::pair<std::size_t, int>> saved;
    bool violation = false;
    auto declare = [&](std::size_t e, bool b) {
      if (declared_[e] >= 0) {
        if (declared_[e] != (b ? 1 : 0)) violation = true;
        return;
      }
      saved.push_back({e, declared_[e]});
      declared_[e] = b ? 1 : 0;
    };
    declare(x, verdict);
    for (auto [e, b] : extra) declare(e, b);
    if (!violation) violation = violates();
    std::uint32_t v;
    if (violation) {
      v = fresh();
      out_->tree.nodes[v].winner = Player::I;
    } else {
      v = question_node(c);
    }
    TruthGame::Annotation a;
    a.kind = TruthGame::Annotation::Kind::Answer;
    a.entry = x;
    a.clock = c;
    a.verdict = verdict;
    a.witness = witness;
    note(v, a);
    for (auto it = saved.rbegin(); it != saved.rend(); ++it) declared_[it->first] = it->second;
    return v;
  }

  // Any declared entry whose clause is contradicted by the declarations so far.
  bool violates() const {
    const PoolIndex& I = *I_;
    for (std::size_t x = 0; x < declared_.size(); ++x) {
      if (declared_[x] < 0) continue;
      bool d = declared_[x] == 1;
      if (atom_[x] >= 0) {
        if ((atom_[x] == 1) != d) return true;
        continue;
      }
      auto [pos, digits] = I.decode(x);
      const Formula& f = I.pool()[pos];
      DigitEnv env;
      for (std::size_t i = 0; i < f.free_vars().size(); ++i) env.b.emplace_back(f.free_vars()[i], digits[i]);
      auto look = [&](const Formula& g, const DigitEnv& e) { return declared_[I.index(*I.position(g), e.digits(g))]; };
      switch (f.kind()) {
        case FKind::Not: {
          int k = look(f.kids()[0], env);
          if (k >= 0 && (k == 1) == d) return true;
          break;
        }
        case FKind::And:
        case FKind::Or: {
          bool conj = f.kind() == FKind::And;
          bool all_declared_unit = true, some_anti = false;
          for (const auto& k : f.kids()) {
            int kv = look(k, env);
            if (kv < 0) all_declared_unit = false;
            else if ((kv == 1) != conj) some_anti = true;
          }
          if (d == conj && some_anti) return true;
          if (d != conj && !some_anti && all_declared_unit) return true;
          break;
        }
        case FKind::Forall:
        case FKind::Exists: {
          bool univ = f.kind() == FKind::Forall;
          std::size_t dn = I.domain().size();
          std::size_t combos = 1;
          for (std::size_t i = 0; i < f.vars().size(); ++i) combos *= dn;
          bool all_unit = true, some_anti = false;
          for (std::size_t w = 0; w < combos; ++w) {
            DigitEnv e = env;
            std::size_t k = w;
            for (const auto& var : f.vars()) {
              e.b.emplace_back(var, k % dn);
              k /= dn;
            }
            int kv = look(f.kids()[0], e);
            if (kv < 0) all_unit = false;
            else if ((kv == 1) != univ) some_anti = true;
          }
          if (d == univ && some_anti) return true;
          if (d != univ && !some_anti && all_unit) return true;
          break;
        }
        default: break;
      }
    }
    return false;
  }

  const FiniteStructure& M_;
  std::shared_ptr<const PoolIndex> I_;
  TruthGameOptions opt_;
  TruthGame* out_ = nullptr;
  std::vector<int> atom_;
  std::vector<int> declared_;
};

}  // namespace detail

inline TruthGame truth_telling_game(const FiniteStructure& M, const std::vector<Formula>& pool, std::size_t clock,
                                    const TruthGameOptions& opt = {}) {
  if (!is_subformula_closed(pool)) throw ClosureError("the truth-telling game needs a subformula-closed pool");
  auto I = std::make_shared<const PoolIndex>(pool, M.domain());
  return detail::TruthGameBuilder(M, I, opt).build(clock);
}

struct ExtractedVerdicts {
  // entry -> verdict, for entries asked with at least rank(phi) left on the clock.
  std::map<std::size_t, bool> verdicts;
  bool play_independent = true;
  std::optional<std::size_t> conflict;
};

// Collects the truth-teller's answers along every play consistent with her strategy.
inline ExtractedVerdicts extract_verdicts(const TruthGame& g, const Strategy& s) {
  ExtractedVerdicts out;
  const GameTree& T = g.tree;
  std::vector<std::uint32_t> stack{T.root};
  while (!stack.empty()) {
    std::uint32_t v = stack.back();
    stack.pop_back();
    const GameNode& n = T.nodes[v];
    if (n.terminal()) continue;
    if (n.mover == Player::II) {
      auto it = s.find(v);
      if (it == s.end()) continue;
      std::uint32_t c = it->second;
      const auto& a = g.notes[c];
      const Formula& f = g.index->pool()[g.index->decode(a.entry).first];
      if (a.clock >= f.rank()) {
        auto [pos, fresh] = out.verdicts.emplace(a.entry, a.verdict);
        if (!fresh && pos->second != a.verdict && out.play_independent) {
          out.play_independent = false;
          out.conflict = a.entry;
        }
      }
      stack.push_back(c);
    } else {
      for (auto c : n.children) stack.push_back(c);
    }
  }
  return out;
}

}  // namespace forcelab
