#pragma once

// Concurrent accumulation of sufficient statistics over shards.

#include <filesystem>
#include <memory>
#include <vector>

#include "passglm/records.hpp"
#include "passglm/suff_stats.hpp"

namespace passglm {

/// Record i goes to shard i mod `shards`; each shard accumulates into a copy
/// of `prototype` on its own thread and the results are merged in shard
/// order. shards = 1 runs inline and matches a sequential pass bit for bit.
SuffStats run_sharded(const Dataset& data, std::size_t shards, const SuffStats& prototype);

/// One shard per file when the counts match; otherwise file i goes to shard
/// i mod `shards`. Files are parsed with `opts` (its dim is forced to the
/// prototype's dimension).
SuffStats run_sharded(const std::vector<std::filesystem::path>& files, std::size_t shards,
                      const SuffStats& prototype, ParseOptions opts);

/// A reader thread deals records from `stream` round-robin to `shards`
/// accumulator threads through bounded queues. The stream is read once.
SuffStats run_sharded(RecordStream& stream, std::size_t shards, const SuffStats& prototype);

/// One shard per stream, each accumulated on its own thread.
SuffStats run_sharded(std::vector<std::unique_ptr<RecordStream>>& streams,
                      const SuffStats& prototype);

/// Threads from PASSGLM_THREADS, else the hardware concurrency (at least 1).
std::size_t default_thread_count();

}  // namespace passglm
