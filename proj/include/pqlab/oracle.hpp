#pragma once

// Reference priority queue on an ordered map. Slow but obviously correct;
// used by generators and as the equivalence oracle.

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "pqlab/core.hpp"

namespace pqlab {

class OracleHeap {
 public:
  static constexpr bool supports_decrease_key = true;

  explicit OracleHeap(const HeapConfig& = {}) {}

  Handle insert(ItemId item, Key64 key) {
    if (!set_.emplace(key, item).second) throw contract_error("oracle: duplicate live key " + std::to_string(key.raw()));
    auto [it, fresh] = current_.emplace(item, key);
    if (!fresh) {
      set_.erase(key);
      throw contract_error("oracle: item " + std::to_string(item) + " is already live");
    }
    return Handle{nullptr, item, 1};
  }

  Entry delete_min() {
    if (set_.empty()) throw underflow_error();
    auto it = set_.begin();
    Entry out{it->second, it->first};
    set_.erase(it);
    current_.erase(out.item);
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) { decrease_item(h.slot, key); }

  void decrease_item(ItemId item, Key64 key) {
    auto it = current_.find(item);
    if (it == current_.end()) throw invalid_handle_error();
    detail::require_smaller(it->second, key);
    if (set_.count(key) != 0) throw contract_error("oracle: duplicate live key " + std::to_string(key.raw()));
    set_.erase(it->second);
    set_.emplace(key, item);
    it->second = key;
  }

  Entry find_min() const {
    if (set_.empty()) throw underflow_error();
    return Entry{set_.begin()->second, set_.begin()->first};
  }

  bool contains_key(Key64 key) const { return set_.count(key) != 0; }
  bool is_live(ItemId item) const { return current_.count(item) != 0; }
  Key64 key_of(ItemId item) const { return current_.at(item); }
  const std::map<Key64, ItemId>& entries() const { return set_; }

  std::size_t size() const { return set_.size(); }
  bool empty() const { return set_.empty(); }
  void clear() {
    set_.clear();
    current_.clear();
  }
  HeapStats stats() const { return HeapStats{set_.size(), {}}; }
  std::vector<Violation> validate() const {
    if (set_.size() != current_.size()) return {Violation{"size", "index and ordered set disagree"}};
    return {};
  }

 private:
  std::map<Key64, ItemId> set_;
  std::unordered_map<ItemId, Key64> current_;
};

}  // namespace pqlab
