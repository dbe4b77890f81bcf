#pragma once

#include "mfm/rng.hpp"
#include "mfm/types.hpp"

#include <cstdint>
#include <vector>

namespace mfm {

class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual Batch next() = 0;
  virtual Index dim() const = 0;
};

// Cycles over a fixed dataset in shuffled mini-batches. A batch size equal
// to (or larger than) the dataset returns the whole dataset in stored order.
class CyclingSource final : public DataSource {
 public:
  CyclingSource(Batch data, Index batch_size, std::uint64_t seed);

  Batch next() override;
  Index dim() const override { return data_.dim(); }
  const Batch& data() const { return data_; }

 private:
  void reshuffle();

  Batch data_;
  Index batch_size_;
  Rng rng_;
  std::vector<Index> order_;
  Index cursor_ = 0;
};

}  // namespace mfm
