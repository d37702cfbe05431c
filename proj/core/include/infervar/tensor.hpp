#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace infervar {

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  [[nodiscard]] std::size_t size() const { return height * width * channels; }
  [[nodiscard]] std::size_t pixels() const { return height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

/// Dense H x W x C grid of doubles stored row-major as (row, column, channel).
///
/// Every constructor rejects non-positive dimensions and non-finite values, so
/// a tensor obtained from the public API is always valid. Element writes
/// through `at()`/`values()` are the caller's responsibility.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(Shape shape, double fill = 0.0);
  ImageTensor(Shape shape, std::vector<double> data);
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              double fill = 0.0)
      : ImageTensor(Shape{height, width, channels}, fill) {}

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t height() const { return shape_.height; }
  [[nodiscard]] std::size_t width() const { return shape_.width; }
  [[nodiscard]] std::size_t channels() const { return shape_.channels; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::size_t index(std::size_t row, std::size_t col,
                                  std::size_t ch = 0) const {
    return (row * shape_.width + col) * shape_.channels + ch;
  }
  [[nodiscard]] double at(std::size_t row, std::size_t col,
                          std::size_t ch = 0) const {
    return data_[index(row, col, ch)];
  }
  double& at(std::size_t row, std::size_t col, std::size_t ch = 0) {
    return data_[index(row, col, ch)];
  }

  [[nodiscard]] std::span<const double> values() const { return data_; }
  [[nodiscard]] std::span<double> values() { return data_; }

  /// Channel slice [begin, end) as a new H x W x (end - begin) tensor.
  [[nodiscard]] ImageTensor channel_slice(std::size_t begin,
                                          std::size_t end) const;
  /// Overwrites channels [begin, begin + slice.channels()) with `slice`.
  void set_channel_slice(std::size_t begin, const ImageTensor& slice);

  /// Averages channels into a single-channel H x W x 1 tensor.
  [[nodiscard]] ImageTensor channel_mean() const;

  [[nodiscard]] bool all_finite() const;

  /// Value equality: same shape and element-wise `==`.
  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Same shape and identical object representation of every element.
bool bit_equal(const ImageTensor& a, const ImageTensor& b);

/// Throws ValidationError naming `what` when the shapes differ.
void require_same_shape(const ImageTensor& a, const ImageTensor& b,
                        const std::string& what);

double mean(std::span<const double> values);

}  // namespace infervar
