#include "tmsharp/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "tmsharp/special.hpp"

namespace tmsharp {

// ---------------------------------------------------------------------------
// LogNum arithmetic

LogNum LogNum::from_double(long double x) {
  if (x == 0.0L) return {};
  if (std::isnan(x)) throw std::domain_error("LogNum: NaN");
  return {std::log(std::fabs(x)), x > 0 ? 1 : -1};
}

long double LogNum::to_long_double() const { return sign == 0 ? 0.0L : sign * std::exp(logmag); }

double LogNum::to_double() const { return static_cast<double>(to_long_double()); }

LogNum operator+(const LogNum& x, const LogNum& y) {
  if (x.is_zero()) return y;
  if (y.is_zero()) return x;
  const LogNum& big = x.logmag >= y.logmag ? x : y;
  const LogNum& small = x.logmag >= y.logmag ? y : x;
  const long double d = small.logmag - big.logmag;
  if (big.sign == small.sign) return {big.logmag + std::log1p(std::exp(d)), big.sign};
  if (d == 0.0L) return {};
  return {big.logmag + std::log1p(-std::exp(d)), big.sign};
}

LogNum operator-(const LogNum& x) { return {x.logmag, -x.sign}; }

LogNum operator-(const LogNum& x, const LogNum& y) { return x + (-y); }

LogNum operator*(const LogNum& x, const LogNum& y) {
  if (x.is_zero() || y.is_zero()) return {};
  return {x.logmag + y.logmag, x.sign * y.sign};
}

LogNum operator/(const LogNum& x, const LogNum& y) {
  if (y.is_zero()) throw std::domain_error("division by zero");
  if (x.is_zero()) return {};
  return {x.logmag - y.logmag, x.sign * y.sign};
}

double relative_difference(const LogNum& x, const LogNum& y) {
  if (x.is_zero() && y.is_zero()) return 0.0;
  if (y.is_zero()) return x.sign;
  if (x.is_zero()) return -y.sign;
  if (x.logmag >= y.logmag) {
    const long double d = y.logmag - x.logmag;
    if (x.sign == y.sign) return static_cast<double>(-x.sign * std::expm1(d));
    return static_cast<double>(x.sign * (1.0L + std::exp(d)));
  }
  const long double d = x.logmag - y.logmag;
  if (x.sign == y.sign) return static_cast<double>(y.sign * std::expm1(d));
  return static_cast<double>(-y.sign * (1.0L + std::exp(d)));
}

// ---------------------------------------------------------------------------
// Expression tree

struct Nonlinearity::Node {
  enum class Kind { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt, Cutoff };
  Kind kind = Kind::Num;
  long double value = 0.0L;  // Num; the squared level for Cutoff
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Nonlinearity::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr, long double v = 0.0L) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  n->value = v;
  return n;
}

bool depends_on_s(const NodePtr& n) {
  if (!n) return false;
  return n->kind == Kind::Var || depends_on_s(n->lhs) || depends_on_s(n->rhs);
}

LogNum eval_node(const Node& n, long double s) {
  switch (n.kind) {
    case Kind::Num:
      return LogNum::from_double(n.value);
    case Kind::Var:
      return LogNum::from_double(s);
    case Kind::Add:
      return eval_node(*n.lhs, s) + eval_node(*n.rhs, s);
    case Kind::Sub:
      return eval_node(*n.lhs, s) - eval_node(*n.rhs, s);
    case Kind::Mul:
      return eval_node(*n.lhs, s) * eval_node(*n.rhs, s);
    case Kind::Div:
      return eval_node(*n.lhs, s) / eval_node(*n.rhs, s);
    case Kind::Neg:
      return -eval_node(*n.lhs, s);
    case Kind::Pow: {
      const LogNum base = eval_node(*n.lhs, s);
      const long double y = eval_node(*n.rhs, s).to_long_double();
      if (!std::isfinite(y)) throw std::domain_error("exponent overflow");
      if (base.is_zero()) {
        if (y > 0) return {};
        throw std::domain_error("zero to a non-positive power");
      }
      int sign = 1;
      if (base.sign < 0) {
        if (y != std::floor(y)) throw std::domain_error("negative base to a non-integer power");
        sign = std::fmod(std::fabs(y), 2.0L) == 1.0L ? -1 : 1;
      }
      return {base.logmag * y, sign};
    }
    case Kind::Exp: {
      const long double x = eval_node(*n.lhs, s).to_long_double();
      if (std::isinf(x) && x > 0) throw std::domain_error("exp overflow");
      if (std::isinf(x)) return {};
      return {x, 1};
    }
    case Kind::Log: {
      const LogNum x = eval_node(*n.lhs, s);
      if (x.sign <= 0) throw std::domain_error("log of a non-positive value");
      return LogNum::from_double(x.logmag);
    }
    case Kind::Sqrt: {
      const LogNum x = eval_node(*n.lhs, s);
      if (x.sign < 0) throw std::domain_error("sqrt of a negative value");
      if (x.is_zero()) return {};
      return {x.logmag / 2, 1};
    }
    case Kind::Cutoff:
      return s > n.value ? eval_node(*n.rhs, s) : LogNum{};
  }
  return {};
}

class Parser {
 public:
  explicit Parser(const std::string& text) : src_(text) {}

  NodePtr parse_all(std::vector<double>& cutoffs) {
    cutoffs_ = &cutoffs;
    skip();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    NodePtr n = expr();
    skip();
    if (pos_ < src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return n;
  }

 private:
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      skip();
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    NodePtr n = term();
    while (true) {
      if (accept('+'))
        n = make(Kind::Add, n, term());
      else if (accept('-'))
        n = make(Kind::Sub, n, term());
      else
        return n;
    }
  }
  NodePtr term() {
    NodePtr n = unary();
    while (true) {
      if (accept('*'))
        n = make(Kind::Mul, n, unary());
      else if (accept('/'))
        n = make(Kind::Div, n, unary());
      else
        return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Kind::Pow, base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }
  NodePtr number() {
    const std::size_t start = pos_;
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(end - begin);
    return make(Kind::Num, nullptr, nullptr, v);
  }
  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string name = src_.substr(start, pos_ - start);
    const ConstantTable& k = constants();
    if (name == "s") return make(Kind::Var);
    if (name == "cE") return make(Kind::Num, nullptr, nullptr, k.cE);
    if (name == "cD") return make(Kind::Num, nullptr, nullptr, k.cD);
    if (name == "cDp") return make(Kind::Num, nullptr, nullptr, k.cDp);
    if (name == "pi") return make(Kind::Num, nullptr, nullptr, std::numbers::pi_v<long double>);
    if (name == "e") return make(Kind::Num, nullptr, nullptr, std::numbers::e_v<long double>);
    if (name == "gamma") return make(Kind::Num, nullptr, nullptr, k.gamma_euler);
    Kind kind;
    int arity = 1;
    if (name == "exp")
      kind = Kind::Exp;
    else if (name == "log")
      kind = Kind::Log;
    else if (name == "sqrt")
      kind = Kind::Sqrt;
    else if (name == "pow")
      kind = Kind::Pow, arity = 2;
    else if (name == "cutoff")
      kind = Kind::Cutoff, arity = 2;
    else
      throw ParseError("unknown identifier '" + name + "'", start);
    expect('(');
    const std::size_t arg_pos = pos_;
    NodePtr a = expr();
    NodePtr b;
    if (arity == 2) {
      expect(',');
      b = expr();
    }
    expect(')');
    if (kind == Kind::Cutoff) {
      if (depends_on_s(a)) throw ParseError("cutoff level must not depend on s", arg_pos);
      long double L;
      try {
        L = eval_node(*a, 0.0L).to_long_double();
      } catch (const std::domain_error& e) {
        throw ParseError(std::string("cutoff level: ") + e.what(), arg_pos);
      }
      if (!(L > 0) || !std::isfinite(L)) throw ParseError("cutoff level must be positive", arg_pos);
      cutoffs_->push_back(static_cast<double>(L));
      return make(Kind::Cutoff, nullptr, b, L * L);
    }
    return make(kind, a, b);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  std::vector<double>* cutoffs_ = nullptr;
};

std::string fmt_level(double L) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", L);
  return buf;
}

}  // namespace

Nonlinearity::Nonlinearity() : text_("0"), root_(make(Kind::Num)) {}

Nonlinearity Nonlinearity::zero() { return Nonlinearity(); }

Nonlinearity Nonlinearity::parse(const std::string& text) {
  Nonlinearity g;
  g.text_ = text;
  Parser p(text);
  g.root_ = p.parse_all(g.cutoffs_);
  return g;
}

LogNum Nonlinearity::eval(double s) const {
  try {
    const LogNum v = eval_node(*root_, s);
    if (std::isnan(v.logmag) || (v.sign != 0 && std::isinf(v.logmag) && v.logmag > 0))
      throw std::domain_error("value not representable");
    return v;
  } catch (const std::domain_error& e) {
    throw EvalError(std::string("g(s): ") + e.what(), s);
  }
}

Nonlinearity critical_plane(double L) {
  Nonlinearity g = Nonlinearity::parse("cutoff(" + fmt_level(L) + ", exp(s - cE/s^2)/s)");
  g.declared_tail = 1.0;
  g.declared_origin = OriginClass::SublinearVanishing;
  return g;
}

Nonlinearity critical_disk(double L) {
  Nonlinearity g = Nonlinearity::parse("cutoff(" + fmt_level(L) + ", exp(s - 1/s - cDp/s^2))");
  g.declared_tail = 1.0;
  g.declared_origin = OriginClass::Vanishing;
  return g;
}

}  // namespace tmsharp
