#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmsharp {

/// Real number stored as sign * exp(logmag); zero has sign 0 and
/// logmag = -inf. Lets e^s at s ~ 1e4 be represented without overflow. The
/// extended logmag keeps ~1e-15 relative resolution at logmag ~ 1e4.
struct LogNum {
  long double logmag = -std::numeric_limits<long double>::infinity();
  int sign = 0;

  static LogNum from_double(long double x);
  static LogNum from_log(long double logmag, int sign = 1) { return {logmag, sign}; }
  double to_double() const;  // may overflow to +-inf
  long double to_long_double() const;
  bool is_zero() const { return sign == 0; }
};

LogNum operator+(const LogNum& x, const LogNum& y);
LogNum operator-(const LogNum& x);
LogNum operator-(const LogNum& x, const LogNum& y);
LogNum operator*(const LogNum& x, const LogNum& y);
/// Throws std::domain_error on division by zero.
LogNum operator/(const LogNum& x, const LogNum& y);

/// (x - y) / max(|x|, |y|), computed without forming x or y; 0 when both vanish.
double relative_difference(const LogNum& x, const LogNum& y);

class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, double s)
      : std::runtime_error(what + " at s = " + std::to_string(s)), s_(s) {}
  double s() const noexcept { return s_; }

 private:
  double s_;
};

/// Behaviour near s = 0 declared by the caller.
enum class OriginClass { Unspecified, SublinearVanishing /* g(s)/s -> 0 */, Vanishing /* g(s) -> 0 */ };

/// Nonlinearity g(s) parsed from an infix expression in the variable s.
///
/// Grammar: numbers, s, + - * / ^ (right associative), parentheses, the
/// functions exp(x), log(x), sqrt(x), pow(x, y) and cutoff(L, x), which is x
/// for s > L^2 and 0 otherwise. L must not depend on s. Named constants:
/// cE, cD, cDp, pi, e, gamma.
class Nonlinearity {
 public:
  struct Node;

  Nonlinearity();
  static Nonlinearity parse(const std::string& text);
  /// The zero function.
  static Nonlinearity zero();

  LogNum eval(double s) const;  // throws EvalError
  double operator()(double s) const { return eval(s).to_double(); }
  const std::string& text() const { return text_; }
  /// Every cutoff level L appearing in the expression.
  const std::vector<double>& cutoffs() const { return cutoffs_; }

  /// Declared limit of s e^{-s} g(s) (plane) or e^{-s} g(s) (disk).
  std::optional<double> declared_tail;
  OriginClass declared_origin = OriginClass::Unspecified;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  std::vector<double> cutoffs_;
};

/// s^{-1} e^s e^{-cE s^-2} for s > L^2, else 0.
Nonlinearity critical_plane(double L);
/// e^s e^{-1/s - cD' s^-2} for s > L^2, else 0.
Nonlinearity critical_disk(double L);

}  // namespace tmsharp
