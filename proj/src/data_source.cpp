#include "mfm/data_source.hpp"

#include "mfm/errors.hpp"

#include <algorithm>
#include <numeric>

namespace mfm {

CyclingSource::CyclingSource(Batch data, Index batch_size, std::uint64_t seed)
    : data_(std::move(data)), batch_size_(batch_size), rng_(seed) {
  if (data_.size() == 0) throw EmptyBatchError();
  if (data_.y.size() != data_.size()) throw DimensionMismatch("CyclingSource: |y| != n");
  if (batch_size_ <= 0 || batch_size_ > data_.size()) batch_size_ = data_.size();
  order_.resize(static_cast<std::size_t>(data_.size()));
  std::iota(order_.begin(), order_.end(), Index{0});
  if (batch_size_ < data_.size()) reshuffle();
}

void CyclingSource::reshuffle() {
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

Batch CyclingSource::next() {
  if (batch_size_ == data_.size()) return data_;
  if (cursor_ + batch_size_ > data_.size()) reshuffle();
  Batch out{Mat(data_.dim(), batch_size_), Vec(batch_size_)};
  for (Index i = 0; i < batch_size_; ++i) {
    const Index src = order_[static_cast<std::size_t>(cursor_ + i)];
    out.x.col(i) = data_.x.col(src);
    out.y(i) = data_.y(src);
  }
  cursor_ += batch_size_;
  return out;
}

}  // namespace mfm
