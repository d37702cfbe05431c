#pragma once

#include <array>
#include <string>
#include <string_view>

#include "infervar/tensor.hpp"

namespace infervar {

/// Element of the dihedral group of the square: an optional horizontal flip
/// followed by `quarter_turns` counter-clockwise 90 degree rotations.
struct Transform {
  int quarter_turns = 0;
  bool horizontal_flip = false;

  friend bool operator==(const Transform&, const Transform&) = default;
};

/// All eight transforms, identity first: r0..r3 then f0..f3.
const std::array<Transform, 8>& all_transforms();

Transform make_transform(int quarter_turns, bool horizontal_flip);

/// Group element equivalent to applying `first` then `second`.
Transform compose(const Transform& first, const Transform& second);
Transform inverse(const Transform& t);

/// "r<k>" for pure rotations, "f<k>" for flip-then-rotate.
std::string transform_name(const Transform& t);
Transform parse_transform(std::string_view name);

/// Flip first, then rotate counter-clockwise. A single quarter turn maps
/// out[i][j][c] = in[j][W-1-i][c]; odd turn counts swap height and width.
ImageTensor apply_transform(const ImageTensor& image, const Transform& t);

/// Exact inverse of apply_transform for the same `t`.
ImageTensor invert_transform(const ImageTensor& image, const Transform& t);

}  // namespace infervar
