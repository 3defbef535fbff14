#pragma once

#include "agnostic/dataset.hpp"

namespace agnostic {

// Builds every split; a pure function of `spec`, including its seed.
//
// For shape class c, round(correlation * n) training and iid-test images are
// drawn on background c and the rest on the other background, so each split
// is exactly label-balanced. The swapped split uses the complementary
// proportion. Throws std::invalid_argument when the largest shape cannot be
// placed so that every training crop contains it.
Dataset generate(const DatasetSpec& spec);

// Binary masks of the two shape classes, centred at (cx, cy) in pixel
// coordinates; pixel (x, y) covers [x, x+1) x [y, y+1) and is inside when its
// centre is.
Tensor disc_mask(std::size_t size, double cx, double cy, double radius);
Tensor square_mask(std::size_t size, double cx, double cy, double half_side);

}  // namespace agnostic
