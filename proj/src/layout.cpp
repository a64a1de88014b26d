#include "spinline/layout.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace spinline {

SlotLayout::SlotLayout(std::vector<Slot> slots) : slots_(std::move(slots)) {
  std::set<std::string> seen;
  int cavities = 0;
  for (const Slot& s : slots_) {
    if (s.dim < 2) throw std::invalid_argument("slot '" + s.label + "' needs dimension >= 2");
    if (!seen.insert(s.label).second)
      throw std::invalid_argument("duplicate slot label '" + s.label + "'");
    if (s.role == SlotRole::cavity) ++cavities;
  }
  if (cavities > 1) throw std::invalid_argument("at most one cavity slot allowed");

  strides_.assign(slots_.size(), 1);
  for (int i = static_cast<int>(slots_.size()) - 2; i >= 0; --i)
    strides_[static_cast<std::size_t>(i)] =
        strides_[static_cast<std::size_t>(i) + 1] * slots_[static_cast<std::size_t>(i) + 1].dim;
  dim_ = slots_.empty() ? 1 : strides_[0] * slots_[0].dim;
}

int SlotLayout::index_of(const std::string& label) const {
  for (int i = 0; i < slot_count(); ++i)
    if (slots_[static_cast<std::size_t>(i)].label == label) return i;
  throw std::out_of_range("no slot labeled '" + label + "'");
}

bool SlotLayout::has(const std::string& label) const {
  return std::any_of(slots_.begin(), slots_.end(),
                     [&](const Slot& s) { return s.label == label; });
}

std::vector<int> SlotLayout::decode(long index) const {
  if (index < 0 || index >= dim_) throw std::out_of_range("basis index out of range");
  std::vector<int> digits(slots_.size());
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    digits[i] = static_cast<int>(index / strides_[i]);
    index %= strides_[i];
  }
  return digits;
}

long SlotLayout::encode(const std::vector<int>& digits) const {
  if (digits.size() != slots_.size())
    throw std::invalid_argument("digit count does not match slot count");
  long index = 0;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= slots_[i].dim)
      throw std::out_of_range("occupation exceeds slot dimension");
    index += strides_[i] * digits[i];
  }
  return index;
}

long SlotLayout::basis_index(const std::string& ket) const {
  if (ket.size() != slots_.size())
    throw std::invalid_argument("ket string length does not match slot count");
  std::vector<int> digits(ket.size());
  for (std::size_t i = 0; i < ket.size(); ++i) {
    if (ket[i] < '0' || ket[i] > '9') throw std::invalid_argument("ket digits must be 0-9");
    digits[i] = ket[i] - '0';
  }
  return encode(digits);
}

std::string SlotLayout::ket_string(long index) const {
  std::string out;
  for (int d : decode(index)) {
    if (d > 9) throw std::out_of_range("occupation not printable as one digit");
    out.push_back(static_cast<char>('0' + d));
  }
  return out;
}

bool SlotLayout::operator==(const SlotLayout& other) const {
  if (slots_.size() != other.slots_.size()) return false;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const Slot &a = slots_[i], &b = other.slots_[i];
    if (a.label != b.label || a.dim != b.dim || a.role != b.role) return false;
  }
  return true;
}

SlotLayout concat(const SlotLayout& a, const SlotLayout& b) {
  std::vector<Slot> slots = a.slots();
  slots.insert(slots.end(), b.slots().begin(), b.slots().end());
  return SlotLayout(std::move(slots));
}

}  // namespace spinline
