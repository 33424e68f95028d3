#pragma once

#include <string>

#include "memv/kappa_sweep.hpp"

namespace memv {

/**
 * Self-contained SVG line chart of a sweep: p-value (left axis, [0, 1])
 * and the statistic numerator A_n (right axis, data-scaled) against kappa,
 * with a dashed horizontal line at the significance level. Series are
 * interrupted at degenerate grid points rather than interpolated across
 * them.
 */
std::string sweep_svg(const SweepCurve& curve);

}  // namespace memv
