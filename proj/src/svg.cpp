#include "memv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace memv {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 72.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Scale {
  double lo = 0.0;
  double hi = 1.0;
  double pix_lo = 0.0;
  double pix_hi = 1.0;

  double operator()(double v) const {
    return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo);
  }
};

void polyline_runs(std::ostringstream& out, const SweepCurve& curve,
                   const Scale& xs, const Scale& ys, bool use_p,
                   const char* color) {
  std::ostringstream points;
  bool open = false;
  auto flush = [&]() {
    if (open) {
      out << "  <polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.8\" points=\"" << points.str() << "\"/>\n";
    }
    points.str("");
    open = false;
  };
  for (const SweepPoint& pt : curve.points) {
    const double v = use_p ? pt.test.p_value : pt.a_n;
    if (pt.degenerate || !std::isfinite(v)) {
      flush();
      continue;
    }
    points << num(xs(pt.kappa)) << ',' << num(ys(v)) << ' ';
    open = true;
  }
  flush();
}

}  // namespace

std::string sweep_svg(const SweepCurve& curve) {
  const double x_lo = curve.points.empty() ? 0.0 : curve.points.front().kappa;
  const double x_hi = curve.points.empty() ? 1.0 : curve.points.back().kappa;
  const Scale xs{x_lo, x_hi > x_lo ? x_hi : x_lo + 1.0, kLeft,
                 kWidth - kRight};
  const Scale ps{0.0, 1.0, kHeight - kBottom, kTop};

  double a_lo = 0.0, a_hi = 0.0;
  bool have_a = false;
  for (const SweepPoint& pt : curve.points) {
    if (pt.degenerate || !std::isfinite(pt.a_n)) continue;
    a_lo = have_a ? std::min(a_lo, pt.a_n) : pt.a_n;
    a_hi = have_a ? std::max(a_hi, pt.a_n) : pt.a_n;
    have_a = true;
  }
  if (!have_a) {
    a_lo = -1.0;
    a_hi = 1.0;
  }
  // Zero stays inside the right axis so sign changes of A_n are visible.
  a_lo = std::min(a_lo, 0.0);
  a_hi = std::max(a_hi, 0.0);
  if (a_hi - a_lo <= 0.0) a_hi = a_lo + 1.0;
  const double pad = 0.05 * (a_hi - a_lo);
  const Scale as{a_lo - pad, a_hi + pad, kHeight - kBottom, kTop};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth)
      << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth)
      << ' ' << num(kHeight) << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes.
  out << "  <line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop)
      << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(kHeight - kBottom)
      << "\" stroke=\"black\"/>\n"
      << "  <line x1=\"" << num(kWidth - kRight) << "\" y1=\"" << num(kTop)
      << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\""
      << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n"
      << "  <line x1=\"" << num(kLeft) << "\" y1=\"" << num(kHeight - kBottom)
      << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\""
      << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double frac = i / 5.0;
    const double xv = xs.lo + frac * (xs.hi - xs.lo);
    const double xp = xs(xv);
    out << "  <line x1=\"" << num(xp) << "\" y1=\"" << num(kHeight - kBottom)
        << "\" x2=\"" << num(xp) << "\" y2=\"" << num(kHeight - kBottom + 5)
        << "\" stroke=\"black\"/>\n"
        << "  <text x=\"" << num(xp) << "\" y=\"" << num(kHeight - kBottom + 20)
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">"
        << num(xv) << "</text>\n";

    const double pv = frac;
    out << "  <line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(ps(pv))
        << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(ps(pv))
        << "\" stroke=\"black\"/>\n"
        << "  <text x=\"" << num(kLeft - 8) << "\" y=\"" << num(ps(pv) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"end\">"
        << num(pv) << "</text>\n";

    const double av = as.lo + frac * (as.hi - as.lo);
    out << "  <line x1=\"" << num(kWidth - kRight) << "\" y1=\""
        << num(as(av)) << "\" x2=\"" << num(kWidth - kRight + 5) << "\" y2=\""
        << num(as(av)) << "\" stroke=\"black\"/>\n"
        << "  <text x=\"" << num(kWidth - kRight + 8) << "\" y=\""
        << num(as(av) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << num(av)
        << "</text>\n";
  }

  out << "  <text x=\"" << num((kLeft + kWidth - kRight) / 2.0) << "\" y=\""
      << num(kHeight - 16)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">kappa</text>\n"
      << "  <text x=\"16\" y=\"" << num((kTop + kHeight - kBottom) / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num((kTop + kHeight - kBottom) / 2.0) << ")\">p-value</text>\n"
      << "  <text x=\"" << num(kWidth - 16) << "\" y=\""
      << num((kTop + kHeight - kBottom) / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\" transform=\"rotate(90 " << num(kWidth - 16)
      << ' ' << num((kTop + kHeight - kBottom) / 2.0)
      << ")\">A_n</text>\n";

  // Significance level on the p scale.
  out << "  <line x1=\"" << num(kLeft) << "\" y1=\"" << num(ps(curve.alpha))
      << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\""
      << num(ps(curve.alpha))
      << "\" stroke=\"#c02020\" stroke-dasharray=\"6 4\"/>\n";
  // Zero line on the A_n scale.
  out << "  <line x1=\"" << num(kLeft) << "\" y1=\"" << num(as(0.0))
      << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\"" << num(as(0.0))
      << "\" stroke=\"#d08030\" stroke-dasharray=\"2 4\"/>\n";

  polyline_runs(out, curve, xs, ps, true, "#1f77b4");
  polyline_runs(out, curve, xs, as, false, "#d08030");

  // Degenerate grid points marked on the baseline.
  for (const SweepPoint& pt : curve.points) {
    if (!pt.degenerate) continue;
    out << "  <circle cx=\"" << num(xs(pt.kappa)) << "\" cy=\""
        << num(kHeight - kBottom) << "\" r=\"2.5\" fill=\"#c02020\"/>\n";
  }

  out << "  <text x=\"" << num(kLeft + 10) << "\" y=\"" << num(kTop - 14)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#1f77b4\">"
         "p-value</text>\n"
      << "  <text x=\"" << num(kLeft + 80) << "\" y=\"" << num(kTop - 14)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d08030\">"
         "A_n</text>\n"
      << "  <text x=\"" << num(kLeft + 130) << "\" y=\"" << num(kTop - 14)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#c02020\">"
         "alpha = "
      << num(curve.alpha) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace memv
