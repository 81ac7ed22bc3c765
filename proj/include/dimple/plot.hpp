// SVG line plots of summarized benchmark results: x = swept dimension,
// y = mean misclassification rate, one line per value of the fixed dimension,
// solid for the tensor algorithm and dashed for the baseline. Every marker
// carries data-x / data-y attributes so tests can scrape plotted values.
#pragma once

#include <string>
#include <vector>

#include "dimple/bench.hpp"

namespace dimple {

// axis: 'n' or 'L' (the swept variable). Throws on empty data or when no row
// has a mean; on error no file is written.
void write_svg_plot(const std::vector<SummaryRow>& rows, char axis,
                    const std::string& path);

// Scrapes (data-x, data-y) pairs back out of a plot written by
// write_svg_plot, in document order.
std::vector<std::pair<double, double>> scrape_svg_points(const std::string& path);

}  // namespace dimple
