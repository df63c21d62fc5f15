#ifndef LCR_NN_TENSOR_HPP_
#define LCR_NN_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lcr/error.hpp"

namespace lcr::nn {

using Shape = std::vector<int>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, int b) {
                           return a * static_cast<std::size_t>(b);
                         });
}

std::string shape_string(const Shape& shape);

// Vectorized reductions peel differently depending on where a buffer
// starts, so every numeric buffer gets the same alignment to keep results
// independent of the heap.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

// Dense row-major array of rank <= 4. Activations use NHWC order.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_size(shape_), fill);
  }
  Tensor(Shape shape, const std::vector<T>& data)
      : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    check_shape(shape_);
    if (data_.size() != shape_size(shape_))
      throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_string(shape_));
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // NHWC element access for rank-4 tensors.
  T& at(int n, int h, int w, int c) { return data_[offset(n, h, w, c)]; }
  const T& at(int n, int h, int w, int c) const {
    return data_[offset(n, h, w, c)];
  }

  // Reuses storage when the element count is unchanged.
  void reshape(Shape shape) {
    check_shape(shape);
    shape_ = std::move(shape);
    data_.resize(shape_size(shape_));
  }
  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static void check_shape(const Shape& shape) {
    if (shape.size() > 4)
      throw ArgumentError("tensor rank above 4: " + shape_string(shape));
    for (int d : shape)
      if (d < 0) throw ArgumentError("negative extent in " + shape_string(shape));
  }
  std::size_t offset(int n, int h, int w, int c) const {
    return ((static_cast<std::size_t>(n) * shape_[1] + h) * shape_[2] + w) *
               shape_[3] +
           c;
  }

  Shape shape_;
  AlignedVector<T> data_;
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  Tensor<To> out(t.shape());
  std::copy(t.values().begin(), t.values().end(), out.values().begin());
  return out;
}

}  // namespace lcr::nn

#endif  // LCR_NN_TENSOR_HPP_
