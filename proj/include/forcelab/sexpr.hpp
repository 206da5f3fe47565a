#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace forcelab {

struct Sexp {
  bool is_list = false;
  std::string atom;
  std::vector<Sexp> items;
  std::size_t pos = 0;

  bool is_atom() const { return !is_list; }
  bool head_is(std::string_view h) const {
    return is_list && !items.empty() && items[0].is_atom() && items[0].atom == h;
  }
  const std::string& head() const {
    static const std::string none;
    return is_list && !items.empty() && items[0].is_atom() ? items[0].atom : none;
  }
};

namespace detail {

class SexpReader {
 public:
  explicit SexpReader(std::string_view text) : s_(text) {}

  std::vector<Sexp> read_all() {
    std::vector<Sexp> out;
    skip();
    while (i_ < s_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i_;
      } else if (c == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  Sexp read() {
    skip();
    if (i_ >= s_.size()) throw ParseError("unexpected end of input", i_);
    Sexp e;
    e.pos = i_;
    if (s_[i_] == ')') throw ParseError("unbalanced ')'", i_);
    if (s_[i_] == '(') {
      ++i_;
      e.is_list = true;
      for (;;) {
        skip();
        if (i_ >= s_.size()) throw ParseError("unterminated list opened", e.pos);
        if (s_[i_] == ')') {
          ++i_;
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    std::size_t start = i_;
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
      ++i_;
    }
    e.atom = std::string(s_.substr(start, i_ - start));
    return e;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace detail

inline std::vector<Sexp> read_sexps(std::string_view text) {
  return detail::SexpReader(text).read_all();
}

inline Sexp read_sexp(std::string_view text) {
  auto all = read_sexps(text);
  if (all.empty()) throw ParseError("empty input", 0);
  if (all.size() > 1) throw ParseError("trailing input after expression", all[1].pos);
  return all[0];
}

inline void expect_list(const Sexp& e, std::string_view head) {
  if (!e.head_is(head))
    throw ParseError("expected (" + std::string(head) + " ...)", e.pos);
}

inline std::size_t parse_index(const Sexp& e) {
  if (!e.is_atom() || e.atom.empty()) throw ParseError("expected a natural number", e.pos);
  std::size_t v = 0;
  for (char c : e.atom) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw ParseError("expected a natural number, got '" + e.atom + "'", e.pos);
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

}  // namespace forcelab
