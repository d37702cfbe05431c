#include "infervar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "infervar/error.hpp"

namespace infervar {

std::string to_string(const Shape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width) + "x" +
         std::to_string(shape.channels);
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.height == 0 || shape.width == 0 || shape.channels == 0) {
    throw ValidationError("tensor dims must be positive, got " + to_string(shape));
  }
}

}  // namespace

ImageTensor::ImageTensor(Shape shape, double fill) : shape_(shape) {
  check_shape(shape_);
  if (!std::isfinite(fill)) throw ValidationError("tensor fill value is not finite");
  data_.assign(shape_.size(), fill);
}

ImageTensor::ImageTensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_.size()) {
    throw ValidationError("tensor data length " + std::to_string(data_.size()) +
                          " does not match dims " + to_string(shape_));
  }
  if (!all_finite()) throw ValidationError("tensor data contains NaN or Inf");
}

ImageTensor ImageTensor::channel_slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > shape_.channels) {
    throw ValidationError("invalid channel slice [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ") of " + to_string(shape_));
  }
  ImageTensor out(Shape{shape_.height, shape_.width, end - begin});
  const std::size_t n = end - begin;
  for (std::size_t p = 0; p < shape_.pixels(); ++p) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(p * shape_.channels + begin), n,
                out.data_.begin() + static_cast<std::ptrdiff_t>(p * n));
  }
  return out;
}

void ImageTensor::set_channel_slice(std::size_t begin, const ImageTensor& slice) {
  const std::size_t n = slice.channels();
  if (slice.height() != shape_.height || slice.width() != shape_.width ||
      begin + n > shape_.channels) {
    throw ValidationError("channel slice " + to_string(slice.shape()) +
                          " does not fit at channel " + std::to_string(begin) +
                          " of " + to_string(shape_));
  }
  for (std::size_t p = 0; p < shape_.pixels(); ++p) {
    std::copy_n(slice.data_.begin() + static_cast<std::ptrdiff_t>(p * n), n,
                data_.begin() + static_cast<std::ptrdiff_t>(p * shape_.channels + begin));
  }
}

ImageTensor ImageTensor::channel_mean() const {
  ImageTensor out(Shape{shape_.height, shape_.width, 1});
  const double inv = 1.0 / static_cast<double>(shape_.channels);
  for (std::size_t p = 0; p < shape_.pixels(); ++p) {
    double sum = 0.0;
    for (std::size_t c = 0; c < shape_.channels; ++c) sum += data_[p * shape_.channels + c];
    out.data_[p] = shape_.channels == 1 ? sum : sum * inv;
  }
  return out;
}

bool ImageTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool bit_equal(const ImageTensor& a, const ImageTensor& b) {
  if (a.shape() != b.shape()) return false;
  return std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const std::string& what) {
  if (a.shape() != b.shape()) {
    throw ValidationError(what + ": dimension mismatch, expected " + to_string(a.shape()) +
                          ", got " + to_string(b.shape()));
  }
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace infervar
