#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flatbez/bezier.hpp"
#include "flatbez/interval.hpp"
#include "flatbez/rational.hpp"

namespace flatbez {

class UnboundParameterError : public std::invalid_argument {
 public:
  explicit UnboundParameterError(std::vector<std::string> missing)
      : std::invalid_argument(make_message(missing)), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  static std::string make_message(const std::vector<std::string>& m) {
    std::string s = "unbound parameter(s):";
    for (const auto& n : m) s += " " + n;
    return s;
  }
  std::vector<std::string> missing_;
};

/// Multivariate polynomial with exact rational coefficients over named
/// parameters. Canonical form: no zero terms, and the variable list holds
/// exactly the names that occur with a positive exponent, sorted.
class PolyExpr {
 public:
  using Exponents = std::vector<std::uint32_t>;
  using Terms = std::map<Exponents, Rational>;

  PolyExpr() = default;
  PolyExpr(const Rational& c) {  // NOLINT(google-explicit-constructor)
    Rational q = c;
    q.canonicalize();
    if (q != 0) terms_.emplace(Exponents{}, std::move(q));
  }
  PolyExpr(long c) : PolyExpr(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  PolyExpr(int c) : PolyExpr(Rational(c)) {}   // NOLINT(google-explicit-constructor)

  static PolyExpr variable(const std::string& name) {
    PolyExpr p;
    p.vars_ = {name};
    p.terms_.emplace(Exponents{1}, Rational(1));
    return p;
  }

  const std::vector<std::string>& variables() const { return vars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return vars_.empty(); }

  Rational constant_value() const {
    if (!is_constant()) throw std::logic_error("constant_value: polynomial is not constant");
    return terms_.empty() ? Rational(0) : terms_.begin()->second;
  }

  /// Total degree (0 for constants and the zero polynomial).
  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) {
      unsigned s = 0;
      for (auto x : e) s += x;
      d = std::max(d, s);
    }
    return d;
  }

  /// Degree in one variable.
  unsigned degree_in(const std::string& name) const {
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) return 0;
    auto k = static_cast<std::size_t>(it - vars_.begin());
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[k]);
    return d;
  }

  /// If the polynomial is exactly one variable with coefficient 1, its name.
  std::string as_single_variable() const {
    if (vars_.size() != 1 || terms_.size() != 1) return {};
    const auto& [e, c] = *terms_.begin();
    return (e[0] == 1 && c == 1) ? vars_[0] : std::string{};
  }

  /// Coefficient of the linear monomial in `name` (constant term if name is empty).
  Rational linear_coefficient(const std::string& name) const {
    Exponents want(vars_.size(), 0);
    if (!name.empty()) {
      auto it = std::find(vars_.begin(), vars_.end(), name);
      if (it == vars_.end()) return Rational(0);
      want[static_cast<std::size_t>(it - vars_.begin())] = 1;
    }
    auto t = terms_.find(want);
    return t == terms_.end() ? Rational(0) : t->second;
  }

  friend PolyExpr operator+(const PolyExpr& a, const PolyExpr& b) {
    auto [vars, ea, eb] = unify(a, b);
    PolyExpr r;
    r.vars_ = std::move(vars);
    for (const auto& [e, c] : a.terms_) r.terms_[ea(e)] += c;
    for (const auto& [e, c] : b.terms_) r.terms_[eb(e)] += c;
    r.canonicalize();
    return r;
  }

  friend PolyExpr operator-(const PolyExpr& a) {
    PolyExpr r = a;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
  }

  friend PolyExpr operator-(const PolyExpr& a, const PolyExpr& b) { return a + (-b); }

  friend PolyExpr operator*(const PolyExpr& a, const PolyExpr& b) {
    if (a.is_zero() || b.is_zero()) return {};
    auto [vars, ea, eb] = unify(a, b);
    PolyExpr r;
    r.vars_ = std::move(vars);
    for (const auto& [e1, c1] : a.terms_) {
      const Exponents x = ea(e1);
      for (const auto& [e2, c2] : b.terms_) {
        Exponents y = eb(e2);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
        r.terms_[y] += c1 * c2;
      }
    }
    r.canonicalize();
    return r;
  }

  friend PolyExpr operator*(const PolyExpr& a, const Rational& k) {
    if (k == 0) return {};
    PolyExpr r = a;
    for (auto& [e, c] : r.terms_) c *= k;
    return r;
  }

  PolyExpr& operator+=(const PolyExpr& o) { return *this = *this + o; }
  PolyExpr& operator-=(const PolyExpr& o) { return *this = *this - o; }
  PolyExpr& operator*=(const PolyExpr& o) { return *this = *this * o; }

  friend bool operator==(const PolyExpr& a, const PolyExpr& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
  }

  PolyExpr pow(unsigned k) const {
    PolyExpr r(Rational(1)), base = *this;
    while (k) {
      if (k & 1U) r = r * base;
      base = base * base;
      k >>= 1U;
    }
    return r;
  }

  /// Replace some variables by rationals; the rest stay symbolic.
  PolyExpr partial_substitute(const std::map<std::string, Rational>& bindings) const {
    PolyExpr out;
    for (const auto& [e, c] : terms_) {
      PolyExpr term(c);
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (e[i] == 0) continue;
        auto it = bindings.find(vars_[i]);
        if (it != bindings.end()) {
          Rational v = 1;
          for (std::uint32_t k = 0; k < e[i]; ++k) v *= it->second;
          term = term * v;
        } else {
          term = term * variable(vars_[i]).pow(e[i]);
        }
      }
      out += term;
    }
    return out;
  }

  /// Exact evaluation; every occurring variable must be bound.
  Rational substitute(const std::map<std::string, Rational>& bindings) const {
    std::vector<std::string> missing;
    std::vector<const Rational*> vals;
    for (const auto& v : vars_) {
      auto it = bindings.find(v);
      if (it == bindings.end())
        missing.push_back(v);
      else
        vals.push_back(&it->second);
    }
    if (!missing.empty()) throw UnboundParameterError(std::move(missing));
    Rational sum = 0, term;
    for (const auto& [e, c] : terms_) {
      term = c;
      for (std::size_t i = 0; i < e.size(); ++i)
        for (std::uint32_t k = 0; k < e[i]; ++k) term *= *vals[i];
      sum += term;
    }
    return sum;
  }

  /// Outward-rounded enclosure of the range over a box, term by term; single
  /// variable powers use exact monomial range rules.
  Interval interval_eval(const std::map<std::string, Interval>& box) const {
    std::vector<std::string> missing;
    std::vector<const Interval*> vals;
    for (const auto& v : vars_) {
      auto it = box.find(v);
      if (it == box.end())
        missing.push_back(v);
      else
        vals.push_back(&it->second);
    }
    if (!missing.empty()) throw UnboundParameterError(std::move(missing));
    Interval sum(0.0);
    for (const auto& [e, c] : terms_) {
      Interval term = Interval::enclose(c);
      for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i] != 0) term = term * flatbez::pow(*vals[i], e[i]);
      sum = sum + term;
    }
    return sum;
  }

  /// Canonical text: terms by descending total degree then descending
  /// exponents; coefficients as exact p/q; e.g. "4/7*a1^2 - 5/7*a1 + 1/14".
  std::string render() const {
    if (terms_.empty()) return "0";
    std::vector<std::pair<Exponents, Rational>> sorted(terms_.begin(), terms_.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
      unsigned dx = 0, dy = 0;
      for (auto v : x.first) dx += v;
      for (auto v : y.first) dy += v;
      if (dx != dy) return dx > dy;
      return x.first > y.first;
    });
    std::string out;
    bool first = true;
    for (const auto& [e, c] : sorted) {
      Rational mag = abs(c);
      if (first)
        out += c < 0 ? "-" : "";
      else
        out += c < 0 ? " - " : " + ";
      first = false;
      std::string mono;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!mono.empty()) mono += "*";
        mono += vars_[i];
        if (e[i] > 1) mono += "^" + std::to_string(e[i]);
      }
      if (mono.empty())
        out += mag.get_str();
      else if (mag == 1)
        out += mono;
      else
        out += mag.get_str() + "*" + mono;
    }
    return out;
  }

 private:
  using Remap = std::vector<std::size_t>;

  struct Mapper {
    Remap index;
    std::size_t width;
    Exponents operator()(const Exponents& e) const {
      Exponents out(width, 0);
      for (std::size_t i = 0; i < e.size(); ++i) out[index[i]] = e[i];
      return out;
    }
  };

  static std::tuple<std::vector<std::string>, Mapper, Mapper> unify(const PolyExpr& a,
                                                                    const PolyExpr& b) {
    std::vector<std::string> vars;
    std::set_union(a.vars_.begin(), a.vars_.end(), b.vars_.begin(), b.vars_.end(),
                   std::back_inserter(vars));
    auto make = [&vars](const std::vector<std::string>& own) {
      Mapper m{Remap(own.size()), vars.size()};
      for (std::size_t i = 0; i < own.size(); ++i)
        m.index[i] = static_cast<std::size_t>(
            std::lower_bound(vars.begin(), vars.end(), own[i]) - vars.begin());
      return m;
    };
    return {vars, make(a.vars_), make(b.vars_)};
  }

  void canonicalize() {
    for (auto it = terms_.begin(); it != terms_.end();)
      it = it->second == 0 ? terms_.erase(it) : std::next(it);
    std::vector<bool> used(vars_.size(), false);
    for (const auto& [e, c] : terms_)
      for (std::size_t i = 0; i < e.size(); ++i) used[i] = used[i] || e[i] != 0;
    if (std::all_of(used.begin(), used.end(), [](bool u) { return u; })) return;
    std::vector<std::string> vars;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (used[i]) vars.push_back(vars_[i]);
    Terms terms;
    for (const auto& [e, c] : terms_) {
      Exponents x;
      for (std::size_t i = 0; i < e.size(); ++i)
        if (used[i]) x.push_back(e[i]);
      terms.emplace(std::move(x), c);
    }
    vars_ = std::move(vars);
    terms_ = std::move(terms);
  }

  std::vector<std::string> vars_;
  Terms terms_;
};

template <>
struct ring_traits<PolyExpr> {
  using scalar = Rational;
  static PolyExpr from_rational(const Rational& q) { return PolyExpr(q); }
  static PolyExpr zero() { return PolyExpr(); }
  static scalar to_scalar(const Rational& q) { return q; }
};

/// Recursive-descent parser for polynomial text: numbers (decimal, p/q via
/// division by a constant), identifiers, + - * ^ and parentheses. Reads back
/// whatever render() writes.
class PolyParser {
 public:
  static PolyExpr parse(std::string_view text) {
    PolyParser p(text);
    PolyExpr e = p.expr();
    p.skip_ws();
    if (p.pos_ != p.s_.size()) p.fail("unexpected character");
    return e;
  }

 private:
  explicit PolyParser(std::string_view s) : s_(s) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("polynomial '" + std::string(s_) + "': " + what + " at offset " +
                     std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  PolyExpr expr() {
    PolyExpr acc;
    bool negate = false;
    if (eat('-'))
      negate = true;
    else
      eat('+');
    acc = term();
    if (negate) acc = -acc;
    for (;;) {
      if (eat('+'))
        acc += term();
      else if (eat('-'))
        acc -= term();
      else
        return acc;
    }
  }

  PolyExpr term() {
    PolyExpr acc = power();
    for (;;) {
      if (eat('*')) {
        acc *= power();
      } else if (eat('/')) {
        PolyExpr d = power();
        if (!d.is_constant() || d.constant_value() == 0) fail("division by non-constant or zero");
        Rational inv = 1 / d.constant_value();
        acc = acc * inv;
      } else {
        return acc;
      }
    }
  }

  PolyExpr power() {
    PolyExpr base = primary();
    if (eat('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected exponent");
      base = base.pow(static_cast<unsigned>(std::stoul(std::string(s_.substr(start, pos_ - start)))));
    }
    return base;
  }

  PolyExpr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      PolyExpr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == '-') {
      ++pos_;
      return -power();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
        ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t save = pos_++;
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        } else {
          pos_ = save;
        }
      }
      return PolyExpr(parse_rational(s_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      return PolyExpr::variable(std::string(s_.substr(start, pos_ - start)));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline PolyExpr parse_poly(std::string_view text) { return PolyParser::parse(text); }

/// Symbolic curve whose control points are the given expressions.
inline BezierCurve<PolyExpr> symbolic_curve(const std::vector<std::string>& control_points,
                                            const Rational& horizon) {
  std::vector<PolyExpr> c;
  c.reserve(control_points.size());
  for (const auto& s : control_points) c.push_back(parse_poly(s));
  return BezierCurve<PolyExpr>(std::move(c), horizon);
}

/// Substitute a full binding into every control point.
inline BezierCurve<Rational> substitute(const BezierCurve<PolyExpr>& curve,
                                        const std::map<std::string, Rational>& bindings) {
  return curve.map([&](const PolyExpr& p) { return p.substitute(bindings); });
}

}  // namespace flatbez
