#pragma once

// Flat trainable-parameter store shared by every ansatz. Each named block
// (one per network, one for scalar node coefficients) occupies a contiguous
// slice. A version counter advances on every optimizer write so evaluations
// that depend on derived state (buffer degrees of freedom) can detect
// staleness instead of silently using old values.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "tape.hpp"

namespace hcpinn {

class ParamStore {
 public:
  struct Block {
    std::string name;
    std::size_t offset;
    std::size_t length;
  };

  // Returns the block index.
  int add_block(std::string name, std::span<const double> init) {
    Block b{std::move(name), values_.size(), init.size()};
    values_.insert(values_.end(), init.begin(), init.end());
    blocks_.push_back(b);
    return static_cast<int>(blocks_.size()) - 1;
  }
  int add_block(std::string name, std::size_t length, double fill = 0.0) {
    Block b{std::move(name), values_.size(), length};
    values_.insert(values_.end(), length, fill);
    blocks_.push_back(b);
    return static_cast<int>(blocks_.size()) - 1;
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<Block>& blocks() const { return blocks_; }

  std::span<double> all() { return values_; }
  std::span<const double> all() const { return values_; }

  std::span<double> block(int idx) {
    const Block& b = blocks_.at(static_cast<std::size_t>(idx));
    return std::span<double>(values_).subspan(b.offset, b.length);
  }
  std::span<const double> block(int idx) const {
    const Block& b = blocks_.at(static_cast<std::size_t>(idx));
    return std::span<const double>(values_).subspan(b.offset, b.length);
  }

  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }

  // Overwrites all values (e.g. from a checkpoint); advances the version.
  void load(std::span<const double> v) {
    if (v.size() != values_.size())
      throw ContractError("parameter vector length mismatch on load");
    values_.assign(v.begin(), v.end());
    bump_version();
  }

  // Registers every slot as a tape leaf, in storage order.
  std::vector<ad::Rev> lift(ad::Tape& tape) const {
    std::vector<ad::Rev> leaves;
    leaves.reserve(values_.size());
    for (double v : values_) leaves.push_back(tape.leaf(v));
    return leaves;
  }

 private:
  std::vector<double> values_;
  std::vector<Block> blocks_;
  std::uint64_t version_ = 0;
};

}  // namespace hcpinn
