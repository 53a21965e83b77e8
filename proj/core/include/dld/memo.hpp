// Copyright 2026 The DLD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <future>
#include <map>
#include <mutex>

namespace dld {

// Thread-safe lookup-or-compute table. Concurrent callers asking for the same
// missing key share one computation. A failed computation is not cached.
template <typename Key, typename Value, typename Compare = std::less<>>
class SingleFlightCache {
 public:
  template <typename Fn>
  Value get_or_compute(const Key& key, Fn&& compute) {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      auto pending = it->second;
      lock.unlock();
      return pending.get();
    }
    std::promise<Value> promise;
    entries_.emplace(key, promise.get_future().share());
    lock.unlock();
    try {
      Value value = compute();
      promise.set_value(value);
      return value;
    } catch (...) {
      promise.set_exception(std::current_exception());
      lock.lock();
      entries_.erase(key);
      throw;
    }
  }

  bool contains(const Key& key) const {
    std::lock_guard lock(mutex_);
    return entries_.find(key) != entries_.end();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::map<Key, std::shared_future<Value>, Compare> entries_;
};

}  // namespace dld
