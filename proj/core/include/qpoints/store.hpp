#pragma once

#include <string>
#include <vector>

#include "qpoints/sweep.hpp"

namespace qp {

// stable identity of a sweep configuration, used to guard cache reuse
u64 config_hash(const SweepOptions& opt);

// plain-text sweep report: config line, column header, records, totals.
// emit and parse round-trip exactly; resumed runs must reproduce it byte for byte.
std::string emit_report(const SweepOptions& opt, const SweepResult& res);

struct ParsedReport {
  std::string config;
  std::vector<SweepRecord> records;
  ShardAggregate totals;
};

ParsedReport parse_report(const std::string& text, const SweepOptions& opt);

// generic column table used for moment and census summaries
struct TableReport {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string emit_table(const TableReport& table);
TableReport parse_table(const std::string& text);

TableReport moment_table(const std::vector<MomentRow>& rows, const std::vector<unsigned>& s_list,
                         const std::vector<unsigned>& t_list);
TableReport census_table(const std::vector<CensusRow>& rows);

// sharded sweep cache. a cache file is a header naming the config hash followed
// by framed shard blocks; each block carries its own checksum and record count,
// so a truncated tail is detected and recomputed instead of trusted.
struct CacheShard {
  unsigned index = 0;
  std::vector<SweepRecord> records;
  ShardAggregate agg;
};

struct CacheProbe {
  bool exists = false;        // file present with a valid header
  u64 complete_blocks = 0;    // frames that passed checksum and count
  std::vector<bool> have;     // per shard index
};

CacheProbe cache_probe(const std::string& path, const SweepOptions& opt);

// run the sweep, reusing every complete shard block in the cache and appending
// the missing ones as they finish. the final result, and hence the emitted
// report, is byte-identical to an uninterrupted run of the same config.
SweepResult run_sweep_cached(const SweepOptions& opt, const std::string& cache_path,
                             const RankTable* ranks = nullptr);

}  // namespace qp
