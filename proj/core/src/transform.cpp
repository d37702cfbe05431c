#include "infervar/transform.hpp"

#include "infervar/error.hpp"

namespace infervar {

namespace {

int wrap_turns(int k) { return ((k % 4) + 4) % 4; }

ImageTensor flip_horizontal(const ImageTensor& in) {
  ImageTensor out(in.shape());
  const std::size_t w = in.width();
  for (std::size_t i = 0; i < in.height(); ++i)
    for (std::size_t j = 0; j < w; ++j)
      for (std::size_t c = 0; c < in.channels(); ++c) out.at(i, j, c) = in.at(i, w - 1 - j, c);
  return out;
}

// One counter-clockwise quarter turn: out[i][j] = in[j][W-1-i].
ImageTensor rotate_quarter(const ImageTensor& in) {
  const std::size_t h = in.height(), w = in.width();
  ImageTensor out(Shape{w, h, in.channels()});
  for (std::size_t i = 0; i < w; ++i)
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t c = 0; c < in.channels(); ++c) out.at(i, j, c) = in.at(j, w - 1 - i, c);
  return out;
}

ImageTensor rotate(const ImageTensor& in, int turns) {
  ImageTensor out = in;
  for (int k = 0; k < wrap_turns(turns); ++k) out = rotate_quarter(out);
  return out;
}

}  // namespace

const std::array<Transform, 8>& all_transforms() {
  static const std::array<Transform, 8> kAll = {
      Transform{0, false}, Transform{1, false}, Transform{2, false}, Transform{3, false},
      Transform{0, true},  Transform{1, true},  Transform{2, true},  Transform{3, true}};
  return kAll;
}

Transform make_transform(int quarter_turns, bool horizontal_flip) {
  if (quarter_turns < 0 || quarter_turns > 3) {
    throw ValidationError("quarter_turns must be in {0,1,2,3}, got " +
                          std::to_string(quarter_turns));
  }
  return Transform{quarter_turns, horizontal_flip};
}

// With R the rotation and F the flip, F R^k = R^-k F, so
// R^b F R^a F^fa = R^(b-a) F^(1+fa).
Transform compose(const Transform& first, const Transform& second) {
  if (!second.horizontal_flip) {
    return Transform{wrap_turns(first.quarter_turns + second.quarter_turns),
                     first.horizontal_flip};
  }
  return Transform{wrap_turns(second.quarter_turns - first.quarter_turns),
                   !first.horizontal_flip};
}

Transform inverse(const Transform& t) {
  // Flips are involutions: (R^k F)^-1 = F R^-k = R^k F.
  if (t.horizontal_flip) return t;
  return Transform{wrap_turns(-t.quarter_turns), false};
}

std::string transform_name(const Transform& t) {
  return (t.horizontal_flip ? "f" : "r") + std::to_string(t.quarter_turns);
}

Transform parse_transform(std::string_view name) {
  if (name.size() == 2 && (name[0] == 'r' || name[0] == 'f') && name[1] >= '0' &&
      name[1] <= '3') {
    return Transform{name[1] - '0', name[0] == 'f'};
  }
  throw ValidationError("unknown transform '" + std::string(name) +
                        "' (expected r0..r3 or f0..f3)");
}

ImageTensor apply_transform(const ImageTensor& image, const Transform& t) {
  make_transform(t.quarter_turns, t.horizontal_flip);
  if (t.horizontal_flip) return rotate(flip_horizontal(image), t.quarter_turns);
  return rotate(image, t.quarter_turns);
}

ImageTensor invert_transform(const ImageTensor& image, const Transform& t) {
  make_transform(t.quarter_turns, t.horizontal_flip);
  ImageTensor out = rotate(image, 4 - t.quarter_turns);
  if (t.horizontal_flip) out = flip_horizontal(out);
  return out;
}

}  // namespace infervar
