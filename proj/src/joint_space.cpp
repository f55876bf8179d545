#include "mcre/joint_space.hpp"

#include <limits>
#include <stdexcept>

namespace mcre {

JointSpace::JointSpace(std::size_t base, std::size_t agents)
    : base_(base), agents_(agents), stride_(agents) {
  if (base == 0) throw std::invalid_argument("JointSpace: base must be positive");
  std::size_t stride = 1;
  for (std::size_t i = agents; i-- > 0;) {
    stride_[i] = stride;
    if (i > 0 && stride > std::numeric_limits<std::size_t>::max() / base)
      throw std::overflow_error("JointSpace: size overflows");
    stride *= base;
  }
  size_ = stride;
}

std::size_t JointSpace::encode(std::span<const std::size_t> digits) const {
  if (digits.size() != agents_)
    throw std::invalid_argument("JointSpace::encode: expected " + std::to_string(agents_) +
                                " components, got " + std::to_string(digits.size()));
  std::size_t index = 0;
  for (std::size_t i = 0; i < agents_; ++i) {
    if (digits[i] >= base_) throw std::out_of_range("JointSpace::encode: component out of range");
    index += digits[i] * stride_[i];
  }
  return index;
}

std::vector<std::size_t> JointSpace::decode(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("JointSpace::decode: index out of range");
  std::vector<std::size_t> digits(agents_);
  for (std::size_t i = 0; i < agents_; ++i) digits[i] = (index / stride_[i]) % base_;
  return digits;
}

std::size_t JointSpace::digit(std::size_t index, std::size_t agent) const {
  return (index / stride_[agent]) % base_;
}

}  // namespace mcre
