#include "switchadj/quadrature.hpp"

#include <cmath>

#include <fmt/core.h>

#include "switchadj/errors.hpp"

namespace switchadj {

namespace {

struct simpson_panel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double recurse(const std::function<double(double)>& f, const simpson_panel& p, double eps,
               int depth) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  if (depth <= 0) {
    throw quadrature_error(
        fmt::format("adaptive Simpson did not converge on [{}, {}]", p.a, p.b));
  }
  return recurse(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * eps, depth - 1) +
         recurse(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * eps, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        quadrature_options options) {
  if (a == b) return 0.0;
  // A few fixed panels first so narrow features are not skipped by the
  // initial three-point estimate.
  constexpr int kPanels = 16;
  const double h = (b - a) / kPanels;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == kPanels) ? b : lo + h;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fmid = f(mid), fhi = f(hi);
    const simpson_panel panel{lo, mid, hi, flo, fmid, fhi, (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)};
    total += recurse(f, panel, options.abs_tolerance / kPanels, options.max_depth);
  }
  return total;
}

}  // namespace switchadj
