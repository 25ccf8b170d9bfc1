// Copyright 2026 The qmetro Authors
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

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace qmetro::cli {

/// 0 selects the hardware concurrency.
inline unsigned resolve_threads(long requested) {
  if (requested > 0) return unsigned(requested);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Progress lines on a log stream, at most about ten per task.
class Progress {
 public:
  Progress(std::ostream* log, std::string label, std::size_t total)
      : log_(log), label_(std::move(label)), total_(total) {}

  void tick() {
    const std::size_t done = ++done_;
    if (!log_ || total_ == 0) return;
    const std::size_t step = std::max<std::size_t>(1, total_ / 10);
    if (done % step != 0 && done != total_) return;
    std::lock_guard lock(mutex_);
    *log_ << "[" << label_ << "] " << done << "/" << total_ << "\n" << std::flush;
  }

 private:
  std::ostream* log_;
  std::string label_;
  std::size_t total_;
  std::atomic<std::size_t> done_{0};
  std::mutex mutex_;
};

/// out[i] = fn(i); items run on up to `threads` workers, results stay in index
/// order. The first exception is rethrown after all workers stop.
template <typename Fn>
auto parallel_map(std::size_t count, unsigned threads, Fn&& fn, Progress* progress = nullptr)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<R> out(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= count || failed) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
      if (progress) progress->tick();
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, unsigned(count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace qmetro::cli
