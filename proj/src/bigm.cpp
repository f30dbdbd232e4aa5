#include "twqp/bigm.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "twqp/error.hpp"

namespace twqp {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// LP format wants an explicit sign between terms.
std::string term(double coef, const std::string& var, bool first) {
  std::string s;
  if (coef < 0) s = first ? "- " : " - ";
  else s = first ? "" : " + ";
  return s + num(std::abs(coef)) + " " + var;
}

}  // namespace

void export_bigm_lp(std::ostream& out, const Instance& inst, double U) {
  inst.check_shape();
  if (!(U > 0.0)) throw InputError("big-M bound must be positive");
  const int n = inst.size();
  auto x = [](int i) { return "x" + std::to_string(i + 1); };
  auto z = [](int i) { return "z" + std::to_string(i + 1); };

  out << "\\ big-M reformulation, U = " << num(U) << "\n";
  out << "Minimize\n obj: ";
  bool first = true;
  for (int i = 0; i < n; ++i) {
    if (inst.c[static_cast<std::size_t>(i)] == 0.0) continue;
    out << term(inst.c[static_cast<std::size_t>(i)], x(i), first);
    first = false;
  }
  for (int i = 0; i < n; ++i) {
    if (!inst.indicator[static_cast<std::size_t>(i)]) continue;
    out << term(inst.lambda[static_cast<std::size_t>(i)], z(i), first);
    first = false;
  }
  if (inst.offset != 0.0 || first) {
    out << (first ? "" : (inst.offset < 0 ? " - " : " + ")) << num(first ? inst.offset : std::abs(inst.offset));
    first = false;
  }
  out << " + [";
  bool qfirst = true;
  for (const auto& e : inst.q.upper_entries()) {
    const std::string var = e.i == e.j ? x(e.i) + " ^2" : x(e.i) + " * " + x(e.j);
    out << " " << term(e.i == e.j ? e.value : 2.0 * e.value, var, qfirst);
    qfirst = false;
  }
  out << " ] / 2\n";

  out << "Subject To\n";
  for (int i = 0; i < n; ++i) {
    if (!inst.indicator[static_cast<std::size_t>(i)]) continue;
    out << " ub" << i + 1 << ": " << x(i) << " - " << num(U) << " " << z(i) << " <= 0\n";
    out << " lb" << i + 1 << ": " << x(i) << " + " << num(U) << " " << z(i) << " >= 0\n";
  }
  out << "Bounds\n";
  for (int i = 0; i < n; ++i) out << " " << x(i) << " free\n";
  out << "Binaries\n";
  for (int i = 0; i < n; ++i)
    if (inst.indicator[static_cast<std::size_t>(i)]) out << " " << z(i) << "\n";
  out << "End\n";
}

}  // namespace twqp
