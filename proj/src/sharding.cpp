#include "passglm/sharding.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <spdlog/spdlog.h>

#include "passglm/errors.hpp"

namespace passglm {

namespace {

void require(std::size_t shards, const SuffStats& prototype) {
  if (shards < 1) throw InvalidArgument("shards must be >= 1");
  if (prototype.count() != 0) throw InvalidArgument("prototype statistics must be empty");
}

[[noreturn]] void rethrow_with_shard(std::size_t shard, std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    throw Error("shard " + std::to_string(shard) + ": " + ex.what());
  }
}

// Runs fn(shard) on `shards` threads and merges the results in shard order.
template <typename Fn>
SuffStats fan_out(std::size_t shards, const SuffStats& prototype, Fn&& fn) {
  std::vector<SuffStats> parts(shards, prototype);
  std::vector<std::exception_ptr> errors(shards);
  std::vector<std::thread> workers;
  workers.reserve(shards);
  for (std::size_t s = 0; s < shards; ++s) {
    workers.emplace_back([&, s] {
      try {
        fn(s, parts[s]);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (std::size_t s = 0; s < shards; ++s) {
    if (errors[s]) rethrow_with_shard(s, errors[s]);
  }
  SuffStats out = std::move(parts[0]);
  for (std::size_t s = 1; s < shards; ++s) out.merge(parts[s]);
  return out;
}

class BatchQueue {
 public:
  explicit BatchQueue(std::size_t capacity) : capacity_(capacity) {}

  // False when the consumer side aborted.
  bool push(std::vector<Record>&& batch, const std::atomic<bool>& abort) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || abort.load(); });
    if (abort.load()) return false;
    items_.push_back(std::move(batch));
    not_empty_.notify_one();
    return true;
  }

  bool pop(std::vector<Record>& batch) {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return false;
    batch = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return true;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  void wake() {
    std::lock_guard lock(mu_);
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<std::vector<Record>> items_;
  bool closed_ = false;
};

constexpr std::size_t kBatch = 512;
constexpr std::size_t kQueueDepth = 8;

}  // namespace

SuffStats run_sharded(const Dataset& data, std::size_t shards, const SuffStats& prototype) {
  require(shards, prototype);
  if (data.dim != prototype.config().dim) throw MismatchError("data dimension does not match statistics");
  if (shards == 1) {
    SuffStats out = prototype;
    for (const Record& r : data.records) out.accumulate(r);
    return out;
  }
  return fan_out(shards, prototype, [&](std::size_t s, SuffStats& part) {
    for (std::size_t i = s; i < data.size(); i += shards) part.accumulate(data.records[i]);
  });
}

SuffStats run_sharded(const std::vector<std::filesystem::path>& files, std::size_t shards,
                      const SuffStats& prototype, ParseOptions opts) {
  require(shards, prototype);
  if (files.empty()) throw InvalidArgument("no input files");
  opts.dim = prototype.config().dim;
  return fan_out(shards, prototype, [&](std::size_t s, SuffStats& part) {
    for (std::size_t f = s; f < files.size(); f += shards) {
      LibsvmStream stream(files[f], opts);
      part.accumulate(stream);
      if (stream.skipped_lines() > 0) {
        spdlog::warn("{}: skipped {} malformed lines", files[f].string(), stream.skipped_lines());
      }
    }
  });
}

SuffStats run_sharded(RecordStream& stream, std::size_t shards, const SuffStats& prototype) {
  require(shards, prototype);
  if (stream.dim() != prototype.config().dim) throw MismatchError("stream dimension does not match statistics");
  if (shards == 1) {
    SuffStats out = prototype;
    out.accumulate(stream);
    return out;
  }

  std::vector<std::unique_ptr<BatchQueue>> queues;
  for (std::size_t s = 0; s < shards; ++s) queues.push_back(std::make_unique<BatchQueue>(kQueueDepth));
  std::atomic<bool> abort{false};
  std::exception_ptr reader_error;

  std::thread reader([&] {
    try {
      std::vector<std::vector<Record>> pending(shards);
      Record rec;
      std::size_t i = 0;
      while (!abort.load() && stream.next(rec)) {
        auto& batch = pending[i % shards];
        batch.push_back(std::move(rec));
        if (batch.size() == kBatch) {
          if (!queues[i % shards]->push(std::move(batch), abort)) break;
          batch = {};
          batch.reserve(kBatch);
        }
        ++i;
      }
      for (std::size_t s = 0; s < shards && !abort.load(); ++s) {
        if (!pending[s].empty()) queues[s]->push(std::move(pending[s]), abort);
      }
    } catch (...) {
      reader_error = std::current_exception();
    }
    for (auto& q : queues) q->close();
  });

  SuffStats out = prototype;
  try {
    out = fan_out(shards, prototype, [&](std::size_t s, SuffStats& part) {
      try {
        std::vector<Record> batch;
        while (queues[s]->pop(batch)) {
          for (const Record& r : batch) part.accumulate(r);
        }
      } catch (...) {
        abort.store(true);
        for (auto& q : queues) q->wake();
        throw;
      }
    });
  } catch (...) {
    reader.join();
    throw;
  }
  reader.join();
  if (reader_error) std::rethrow_exception(reader_error);
  return out;
}

SuffStats run_sharded(std::vector<std::unique_ptr<RecordStream>>& streams,
                      const SuffStats& prototype) {
  require(std::max<std::size_t>(streams.size(), 1), prototype);
  if (streams.empty()) throw InvalidArgument("no input streams");
  if (streams.size() == 1) {
    SuffStats out = prototype;
    out.accumulate(*streams[0]);
    return out;
  }
  return fan_out(streams.size(), prototype,
                 [&](std::size_t s, SuffStats& part) { part.accumulate(*streams[s]); });
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("PASSGLM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    spdlog::warn("ignoring invalid PASSGLM_THREADS={}", env);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace passglm
