#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lossbar/barcode.hpp"

namespace lossbar::svg {

// One horizontal bar per segment, sorted by birth, on a linear loss axis.
// The essential bar runs to the right edge and ends in an arrowhead.
std::string barcode(const Barcode& b, const std::string& title = "");

// Several barcodes on a shared loss axis, one panel per entry, top to bottom.
std::string stacked_barcodes(const std::vector<std::pair<std::string, Barcode>>& panels,
                             const std::string& title = "");

}  // namespace lossbar::svg
