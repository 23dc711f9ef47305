#pragma once

#include <vector>

namespace dpnls {

/// Composite Simpson rule on a strictly increasing, possibly nonuniform grid.
/// An odd trailing interval is closed with the three-point end correction.
double integrate_nonuniform(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dpnls
