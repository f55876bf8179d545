#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mcre {

// Mixed-radix indexing of per-agent tuples in `base`^agents, agent 0 most
// significant. Index order is the lexicographic order of the tuples.
class JointSpace {
 public:
  JointSpace() = default;
  JointSpace(std::size_t base, std::size_t agents);

  std::size_t base() const noexcept { return base_; }
  std::size_t agents() const noexcept { return agents_; }
  std::size_t size() const noexcept { return size_; }

  std::size_t encode(std::span<const std::size_t> digits) const;
  std::vector<std::size_t> decode(std::size_t index) const;
  std::size_t digit(std::size_t index, std::size_t agent) const;

 private:
  std::size_t base_ = 1;
  std::size_t agents_ = 0;
  std::size_t size_ = 1;
  std::vector<std::size_t> stride_;
};

}  // namespace mcre
