#pragma once

#include <string>
#include <vector>

namespace spinline {

enum class SlotRole { mode, cavity, flag };

struct Slot {
  std::string label;
  int dim = 0;
  SlotRole role = SlotRole::mode;
};

// Ordered register of labeled slots. Index convention: the first slot is the
// most significant digit, so a ket string reads left to right in slot order
// and |n1 n2 ... nk> flattens to ((n1*d2 + n2)*d3 + ...) + nk.
class SlotLayout {
 public:
  SlotLayout() = default;
  explicit SlotLayout(std::vector<Slot> slots);

  int slot_count() const { return static_cast<int>(slots_.size()); }
  const Slot& slot(int i) const { return slots_.at(static_cast<std::size_t>(i)); }
  const std::vector<Slot>& slots() const { return slots_; }

  // Position of the slot with the given label; throws on unknown labels.
  int index_of(const std::string& label) const;
  bool has(const std::string& label) const;

  long dim() const { return dim_; }
  long stride(int i) const { return strides_.at(static_cast<std::size_t>(i)); }

  std::vector<int> decode(long index) const;
  long encode(const std::vector<int>& digits) const;

  // Flat index of a ket given as a digit string, e.g. "01020". Requires every
  // slot dimension <= 10.
  long basis_index(const std::string& ket) const;
  std::string ket_string(long index) const;

  bool operator==(const SlotLayout& other) const;
  bool operator!=(const SlotLayout& other) const { return !(*this == other); }

 private:
  std::vector<Slot> slots_;
  std::vector<long> strides_;
  long dim_ = 1;
};

// Concatenation: slots of `a` followed by slots of `b` (labels must stay
// unique across the result).
SlotLayout concat(const SlotLayout& a, const SlotLayout& b);

}  // namespace spinline
