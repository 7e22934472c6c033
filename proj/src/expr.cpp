#include "legspec/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "legspec/error.hpp"

namespace legspec {

double bump_profile(double u) {
  const double s = 1.0 - u * u;
  if (s <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / s);
}

double bump_profile_derivative(double u) {
  const double s = 1.0 - u * u;
  if (s <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / s) * (-2.0 * u / (s * s));
}

namespace {

double phi(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double dphi(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }

}  // namespace

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = phi(u), b = phi(1.0 - u);
  return a / (a + b);
}

double smooth_step_derivative(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double a = phi(u), b = phi(1.0 - u);
  const double s = a + b;
  return (dphi(u) * b + a * dphi(1.0 - u)) / (s * s);
}

namespace {

using Op = Expression::Op;
using Instr = Expression::Instr;

struct Parser {
  std::string_view s;
  std::size_t pos = 0;
  std::vector<Instr> out;
  std::array<bool, 4> uses{};

  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidInput("expression '" + std::string(s) + "': " + what + " at position " +
                       std::to_string(pos));
  }

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool accept(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        out.push_back({Op::add});
      } else if (accept('-')) {
        term();
        out.push_back({Op::sub});
      } else {
        return;
      }
    }
  }
  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        out.push_back({Op::mul});
      } else if (accept('/')) {
        unary();
        out.push_back({Op::div});
      } else {
        return;
      }
    }
  }
  void unary() {
    if (accept('-')) {
      unary();
      out.push_back({Op::neg});
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }
  void power() {
    primary();
    if (accept('^')) {
      unary();
      out.push_back({Op::pow});
    }
  }
  void primary() {
    skip();
    if (pos >= s.size()) fail("unexpected end");
    const char c = s[pos];
    if (c == '(') {
      ++pos;
      expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s.substr(pos));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("bad number");
      pos += static_cast<std::size_t>(end - rest.c_str());
      out.push_back({Op::constant, v});
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
      const std::string_view id = s.substr(start, pos - start);
      if (id == "t" || id == "q" || id == "p" || id == "z") {
        const int k = id == "t" ? 0 : id == "q" ? 1 : id == "p" ? 2 : 3;
        uses[k] = true;
        out.push_back({Op::variable, static_cast<double>(k)});
        return;
      }
      if (id == "pi") {
        out.push_back({Op::constant, std::numbers::pi});
        return;
      }
      struct Fn {
        std::string_view name;
        Op op;
        int arity;
      };
      static constexpr Fn fns[] = {{"sin", Op::sin, 1},   {"cos", Op::cos, 1},   {"exp", Op::exp, 1},
                                   {"log", Op::log, 1},   {"sqrt", Op::sqrt, 1}, {"tanh", Op::tanh, 1},
                                   {"abs", Op::abs, 1},   {"bump", Op::bump, 3}, {"plateau", Op::plateau, 3}};
      for (const auto& f : fns) {
        if (f.name != id) continue;
        expect('(');
        for (int a = 0; a < f.arity; ++a) {
          if (a > 0) expect(',');
          expr();
        }
        expect(')');
        out.push_back({f.op});
        return;
      }
      fail("unknown identifier '" + std::string(id) + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

// Scalar adaptors so the interpreter is written once for double and Jet4.
inline double val(double x) { return x; }
inline double val(const Jet4& x) { return x.v; }

inline double make(double v, double) { return v; }

template <class F, class DF>
double unary(double x, F f, DF) {
  return f(x);
}
template <class F, class DF>
Jet4 unary(const Jet4& x, F f, DF df) {
  Jet4 r;
  r.v = f(x.v);
  const double g = df(x.v);
  for (int i = 0; i < 4; ++i) r.d[i] = g * x.d[i];
  return r;
}

Jet4 operator+(const Jet4& a, const Jet4& b) {
  Jet4 r{a.v + b.v, {}};
  for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
Jet4 operator-(const Jet4& a, const Jet4& b) {
  Jet4 r{a.v - b.v, {}};
  for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
Jet4 operator-(const Jet4& a) {
  Jet4 r{-a.v, {}};
  for (int i = 0; i < 4; ++i) r.d[i] = -a.d[i];
  return r;
}
Jet4 operator*(const Jet4& a, const Jet4& b) {
  Jet4 r{a.v * b.v, {}};
  for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
Jet4 operator/(const Jet4& a, const Jet4& b) {
  Jet4 r{a.v / b.v, {}};
  const double inv2 = 1.0 / (b.v * b.v);
  for (int i = 0; i < 4; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
  return r;
}

bool constant_jet(double) { return true; }
bool constant_jet(const Jet4& x) { return x.d == std::array<double, 4>{}; }

double integer_pow(double x, long n) { return std::pow(x, static_cast<double>(n)); }
Jet4 integer_pow(const Jet4& x, long n) {
  Jet4 r;
  r.v = std::pow(x.v, static_cast<double>(n));
  const double g = n == 0 ? 0.0 : n * std::pow(x.v, static_cast<double>(n - 1));
  for (int i = 0; i < 4; ++i) r.d[i] = g * x.d[i];
  return r;
}

template <class T>
T power(const T& x, const T& y) {
  const double yv = val(y);
  if (constant_jet(y) && yv == std::round(yv) && std::fabs(yv) < 1e6)
    return integer_pow(x, static_cast<long>(yv));
  const T lx = unary(x, [](double a) { return std::log(a); }, [](double a) { return 1.0 / a; });
  const T prod = y * lx;
  return unary(prod, [](double a) { return std::exp(a); }, [](double a) { return std::exp(a); });
}

template <class T>
T bump_of(const T& x, const T& c, const T& w) {
  const T u = (x - c) / w;
  return unary(u, bump_profile, bump_profile_derivative);
}

template <class T>
T plateau_of(const T& x, const T& a, const T& b) {
  const T ax = unary(x, [](double v) { return std::fabs(v); }, [](double v) { return v < 0 ? -1.0 : 1.0; });
  const T u = (ax - a) / (b - a);
  return unary(u, [](double v) { return 1.0 - smooth_step(v); },
               [](double v) { return -smooth_step_derivative(v); });
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  Parser p{text, 0, {}, {}};
  p.expr();
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  Expression e;
  e.text_ = std::string(text);
  e.uses_ = p.uses;
  int depth = 0;
  for (const auto& in : p.out) {
    switch (in.op) {
      case Op::constant:
      case Op::variable: ++depth; break;
      case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow: --depth; break;
      case Op::bump: case Op::plateau: depth -= 2; break;
      default: break;
    }
    e.max_stack_ = std::max(e.max_stack_, depth);
  }
  e.program_ = std::make_shared<const std::vector<Instr>>(std::move(p.out));
  return e;
}

Expression Expression::constant(double c) {
  Expression e;
  e.text_ = std::to_string(c);
  e.program_ = std::make_shared<const std::vector<Instr>>(std::vector<Instr>{{Op::constant, c}});
  e.max_stack_ = 1;
  return e;
}

template <class T>
T Expression::run(const T* vars) const {
  T stack[64];
  if (max_stack_ > 64) throw InvalidInput("expression too deeply nested: " + text_);
  int sp = 0;
  for (const auto& in : *program_) {
    switch (in.op) {
      case Op::constant: {
        T c{};
        if constexpr (std::is_same_v<T, double>) c = in.value; else c.v = in.value;
        stack[sp++] = c;
        break;
      }
      case Op::variable: stack[sp++] = vars[static_cast<int>(in.value)]; break;
      case Op::add: --sp; stack[sp - 1] = stack[sp - 1] + stack[sp]; break;
      case Op::sub: --sp; stack[sp - 1] = stack[sp - 1] - stack[sp]; break;
      case Op::mul: --sp; stack[sp - 1] = stack[sp - 1] * stack[sp]; break;
      case Op::div: --sp; stack[sp - 1] = stack[sp - 1] / stack[sp]; break;
      case Op::pow: --sp; stack[sp - 1] = power(stack[sp - 1], stack[sp]); break;
      case Op::neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Op::sin:
        stack[sp - 1] = unary(stack[sp - 1], [](double a) { return std::sin(a); }, [](double a) { return std::cos(a); });
        break;
      case Op::cos:
        stack[sp - 1] = unary(stack[sp - 1], [](double a) { return std::cos(a); }, [](double a) { return -std::sin(a); });
        break;
      case Op::exp:
        stack[sp - 1] = unary(stack[sp - 1], [](double a) { return std::exp(a); }, [](double a) { return std::exp(a); });
        break;
      case Op::log:
        stack[sp - 1] = unary(stack[sp - 1], [](double a) { return std::log(a); }, [](double a) { return 1.0 / a; });
        break;
      case Op::sqrt:
        stack[sp - 1] = unary(stack[sp - 1], [](double a) { return std::sqrt(a); },
                              [](double a) { return 0.5 / std::sqrt(a); });
        break;
      case Op::tanh:
        stack[sp - 1] = unary(stack[sp - 1], [](double a) { return std::tanh(a); },
                              [](double a) { const double c = std::cosh(a); return 1.0 / (c * c); });
        break;
      case Op::abs:
        stack[sp - 1] = unary(stack[sp - 1], [](double a) { return std::fabs(a); },
                              [](double a) { return a < 0 ? -1.0 : 1.0; });
        break;
      case Op::bump:
        sp -= 2;
        stack[sp - 1] = bump_of(stack[sp - 1], stack[sp], stack[sp + 1]);
        break;
      case Op::plateau:
        sp -= 2;
        stack[sp - 1] = plateau_of(stack[sp - 1], stack[sp], stack[sp + 1]);
        break;
    }
  }
  return stack[0];
}

double Expression::operator()(double t, double q, double p, double z) const {
  const double vars[4] = {t, q, p, z};
  return run(vars);
}

Jet4 Expression::jet(double t, double q, double p, double z) const {
  Jet4 vars[4];
  const double xs[4] = {t, q, p, z};
  for (int i = 0; i < 4; ++i) {
    vars[i].v = xs[i];
    vars[i].d[i] = 1.0;
  }
  return run(vars);
}

}  // namespace legspec
