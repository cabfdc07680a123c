#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "flatbez/errors.hpp"
#include "flatbez/rational.hpp"
#include "flatbez/region.hpp"

namespace flatbez {

/// Real-valued expression tree for closed-form region descriptions:
/// numbers, parameters, + - * / ^, sqrt(). Evaluated in binary64.
class RealExpr {
 public:
  static RealExpr parse(std::string_view text, const std::vector<std::string>& params) {
    Parser p{text, 0, params};
    RealExpr e{p.expr()};
    p.ws();
    if (p.pos != text.size()) p.fail("unexpected trailing text");
    return e;
  }

  double operator()(const std::vector<double>& x) const { return root_->eval(x); }

 private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(const std::vector<double>& x) const = 0;
  };
  using Ptr = std::shared_ptr<const Node>;

  struct Num : Node {
    double v;
    explicit Num(double v) : v(v) {}
    double eval(const std::vector<double>&) const override { return v; }
  };
  struct Var : Node {
    std::size_t i;
    explicit Var(std::size_t i) : i(i) {}
    double eval(const std::vector<double>& x) const override { return x[i]; }
  };
  struct Bin : Node {
    char op;
    Ptr a, b;
    Bin(char op, Ptr a, Ptr b) : op(op), a(std::move(a)), b(std::move(b)) {}
    double eval(const std::vector<double>& x) const override {
      const double l = a->eval(x), r = b->eval(x);
      switch (op) {
        case '+': return l + r;
        case '-': return l - r;
        case '*': return l * r;
        case '/': return l / r;
        default: return std::pow(l, r);
      }
    }
  };
  struct Neg : Node {
    Ptr a;
    explicit Neg(Ptr a) : a(std::move(a)) {}
    double eval(const std::vector<double>& x) const override { return -a->eval(x); }
  };
  struct Sqrt : Node {
    Ptr a;
    explicit Sqrt(Ptr a) : a(std::move(a)) {}
    double eval(const std::vector<double>& x) const override { return std::sqrt(a->eval(x)); }
  };

  struct Parser {
    std::string_view s;
    std::size_t pos;
    const std::vector<std::string>& params;

    [[noreturn]] void fail(const std::string& what) const {
      throw ParseError("expression '" + std::string(s) + "': " + what);
    }
    void ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    Ptr expr() {
      Ptr acc = term();
      for (;;) {
        if (eat('+'))
          acc = std::make_shared<Bin>('+', acc, term());
        else if (eat('-'))
          acc = std::make_shared<Bin>('-', acc, term());
        else
          return acc;
      }
    }
    Ptr term() {
      Ptr acc = unary();
      for (;;) {
        if (eat('*'))
          acc = std::make_shared<Bin>('*', acc, unary());
        else if (eat('/'))
          acc = std::make_shared<Bin>('/', acc, unary());
        else
          return acc;
      }
    }
    Ptr unary() {
      if (eat('-')) return std::make_shared<Neg>(unary());
      if (eat('+')) return unary();
      Ptr base = primary();
      if (eat('^')) return std::make_shared<Bin>('^', base, unary());
      return base;
    }
    Ptr primary() {
      ws();
      if (pos >= s.size()) fail("unexpected end");
      if (eat('(')) {
        Ptr e = expr();
        if (!eat(')')) fail("expected ')'");
        return e;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t start = pos;
        while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.'))
          ++pos;
        if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
          ++pos;
          if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        return std::make_shared<Num>(parse_rational(s.substr(start, pos - start)).get_d());
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
          ++pos;
        const std::string id(s.substr(start, pos - start));
        if (id == "sqrt") {
          if (!eat('(')) fail("sqrt needs '('");
          Ptr e = expr();
          if (!eat(')')) fail("expected ')'");
          return std::make_shared<Sqrt>(e);
        }
        for (std::size_t i = 0; i < params.size(); ++i)
          if (params[i] == id) return std::make_shared<Var>(i);
        fail("unknown identifier '" + id + "'");
      }
      fail(std::string("unexpected '") + c + "'");
    }
  };

  explicit RealExpr(Ptr root) : root_(std::move(root)) {}
  Ptr root_;
};

/// A comparison chain such as "0 < a1 <= 0.115563".
class Atom {
 public:
  static Atom parse(const std::string& text, const std::vector<std::string>& params) {
    Atom a;
    a.text_ = text;
    std::size_t start = 0, i = 0;
    std::vector<std::string> pieces;
    while (i < text.size()) {
      const char c = text[i];
      if (c == '<' || c == '>' || c == '=' || c == '!') {
        std::string op(1, c);
        if (i + 1 < text.size() && text[i + 1] == '=') op += '=';
        if (op == "!") throw ParseError("atom '" + text + "': bad operator");
        pieces.push_back(text.substr(start, i - start));
        a.ops_.push_back(parse_rel(op));
        i += op.size();
        start = i;
      } else {
        ++i;
      }
    }
    pieces.push_back(text.substr(start));
    if (a.ops_.empty()) throw ParseError("atom '" + text + "': no comparison");
    for (const auto& p : pieces) a.terms_.push_back(RealExpr::parse(p, params));
    return a;
  }

  bool holds_at(const std::vector<double>& x) const {
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      const double l = terms_[k](x), r = terms_[k + 1](x);
      if (std::isnan(l) || std::isnan(r)) return false;
      if (!holds(ops_[k], l - r)) return false;
    }
    return true;
  }

  /// Smallest |lhs − rhs| over the chain (NaN treated as far away).
  double margin(const std::vector<double>& x) const {
    double m = INFINITY;
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      const double d = std::fabs(terms_[k](x) - terms_[k + 1](x));
      if (!std::isnan(d)) m = std::min(m, d);
    }
    return m;
  }

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::vector<Rel> ops_;
  std::vector<RealExpr> terms_;
};

/// Published closed-form description of a feasible set: a disjunction of
/// conjunctions of comparison chains.
///
/// JSON schema ("flatbez.fixture/1"):
///   { "schema": "flatbez.fixture/1", "name": "...",
///     "parameters": ["a1", "a2"],
///     "any_of": [ ["0 < a1 <= 0.115563", "-a1 < a2 < 1.33333"], ... ] }
class RegionFixture {
 public:
  static RegionFixture from_json(const nlohmann::json& j) {
    RegionFixture f;
    if (j.value("schema", "") != "flatbez.fixture/1")
      throw ConfigError("fixture: schema must be \"flatbez.fixture/1\"");
    f.name_ = j.value("name", "");
    f.params_ = j.at("parameters").get<std::vector<std::string>>();
    for (const auto& conj : j.at("any_of")) {
      std::vector<Atom> atoms;
      for (const auto& a : conj) atoms.push_back(Atom::parse(a.get<std::string>(), f.params_));
      f.any_of_.push_back(std::move(atoms));
    }
    return f;
  }

  static RegionFixture load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("fixture: cannot open " + path);
    return from_json(nlohmann::json::parse(in));
  }

  /// Fixture equal to the whole box (no constraints).
  static RegionFixture whole(std::vector<std::string> params) {
    RegionFixture f;
    f.params_ = std::move(params);
    f.any_of_.push_back({});
    return f;
  }

  const std::string& name() const { return name_; }
  const std::vector<std::string>& parameters() const { return params_; }

  bool contains(const std::vector<double>& x) const {
    for (const auto& conj : any_of_) {
      bool all = true;
      for (const auto& a : conj)
        if (!a.holds_at(x)) {
          all = false;
          break;
        }
      if (all) return true;
    }
    return false;
  }

  double boundary_margin(const std::vector<double>& x) const {
    double m = INFINITY;
    for (const auto& conj : any_of_)
      for (const auto& a : conj) m = std::min(m, a.margin(x));
    return m;
  }

 private:
  std::string name_;
  std::vector<std::string> params_;
  std::vector<std::vector<Atom>> any_of_;
};

struct FixtureAgreement {
  std::size_t samples = 0;
  std::size_t excluded = 0;
  std::size_t agree = 0;
  std::vector<std::vector<double>> disagreements;

  double ratio() const {
    const std::size_t counted = samples - excluded;
    return counted ? static_cast<double>(agree) / static_cast<double>(counted) : 1.0;
  }
};

/// Compares fixture membership with direct relation evaluation at seeded
/// samples of the system box, skipping points within `tol` of any fixture
/// or relation boundary.
inline FixtureAgreement cad_fixture_check(const RegionFixture& fixture, const ConstraintSystem& sys,
                                          std::size_t n, std::uint64_t seed, double tol = 1e-6) {
  if (fixture.parameters() != sys.parameters())
    throw ConfigError("fixture parameters do not match the system parameters");
  const CompiledSystem cs(sys);
  BoxSampler sampler(sys, seed);
  FixtureAgreement out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = sampler.next();
    ++out.samples;
    double margin = fixture.boundary_margin(p);
    for (std::size_t k = 0; k < cs.size(); ++k) margin = std::min(margin, std::fabs(cs.value(k, p)));
    if (margin < tol) {
      ++out.excluded;
      continue;
    }
    if (fixture.contains(p) == is_member(sys, p))
      ++out.agree;
    else if (out.disagreements.size() < 16)
      out.disagreements.push_back(p);
  }
  return out;
}

}  // namespace flatbez
