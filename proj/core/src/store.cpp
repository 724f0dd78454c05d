#include "qpoints/store.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "qpoints/error.hpp"
#include "qpoints/numeric.hpp"

namespace qp {

u64 config_hash(const SweepOptions& opt) { return fnv1a64(opt.canonical()); }

namespace {

bool is_marked_family(const SweepOptions& opt) {
  return opt.family.kind == FamilyKind::marked_point ||
         opt.family.kind == FamilyKind::marked_two_torsion;
}

struct Line {
  std::string text;
  size_t end = 0;        // byte offset just past this line's terminator
  bool terminated = false;
};

std::vector<Line> scan_lines(const std::string& text) {
  std::vector<Line> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    Line ln;
    if (nl == std::string::npos) {
      ln.text = text.substr(pos);
      ln.end = text.size();
      ln.terminated = false;
      pos = text.size();
    } else {
      ln.text = text.substr(pos, nl - pos);
      ln.end = nl + 1;
      ln.terminated = true;
      pos = nl + 1;
    }
    out.push_back(std::move(ln));
  }
  return out;
}

bool consume_prefix(const std::string& line, const std::string& prefix, std::string& rest) {
  if (line.rfind(prefix, 0) != 0) return false;
  rest = line.substr(prefix.size());
  return true;
}

}  // namespace

std::string emit_report(const SweepOptions& opt, const SweepResult& res) {
  std::ostringstream os;
  os << "#QPREPORT v1 confighash=" << to_hex(config_hash(opt)) << "\n";
  os << "#CONFIG " << opt.canonical() << "\n";
  if (opt.want_records) {
    os << "#COLUMNS " << record_header(is_marked_family(opt)) << "\n";
    for (const auto& r : res.records) os << record_line(r) << "\n";
  }
  os << "#TOTALS " << res.totals.serialize() << "\n";
  return os.str();
}

ParsedReport parse_report(const std::string& text, const SweepOptions& opt) {
  auto lines = scan_lines(text);
  size_t i = 0;
  auto next = [&]() -> const std::string& {
    if (i >= lines.size()) fail(errc::parse_error, "report ends early");
    return lines[i++].text;
  };
  std::string rest;
  if (!consume_prefix(next(), "#QPREPORT v1 confighash=", rest))
    fail(errc::parse_error, "missing report header");
  if (rest != to_hex(config_hash(opt)))
    fail(errc::config_mismatch, "report was produced by a different configuration");
  ParsedReport rep;
  rep.totals.init(opt);
  if (!consume_prefix(next(), "#CONFIG ", rep.config))
    fail(errc::parse_error, "missing config line");
  bool marked = is_marked_family(opt);
  if (opt.want_records) {
    if (!consume_prefix(next(), "#COLUMNS ", rest)) fail(errc::parse_error, "missing column line");
    if (rest != record_header(marked)) fail(errc::parse_error, "unexpected column layout");
  }
  bool saw_totals = false;
  while (i < lines.size()) {
    const std::string& ln = next();
    if (consume_prefix(ln, "#TOTALS ", rest)) {
      rep.totals = ShardAggregate::parse(rest, opt);
      saw_totals = true;
      break;
    }
    rep.records.push_back(parse_record_line(ln, marked));
  }
  if (!saw_totals) fail(errc::parse_error, "missing totals line");
  return rep;
}

std::string emit_table(const TableReport& table) {
  std::ostringstream os;
  os << "#QPTABLE v1 " << table.title << "\n#COLUMNS ";
  for (size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      fail(errc::precondition_violated, "table row width mismatch");
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

TableReport parse_table(const std::string& text) {
  auto lines = scan_lines(text);
  if (lines.size() < 2) fail(errc::parse_error, "table ends early");
  TableReport t;
  if (!consume_prefix(lines[0].text, "#QPTABLE v1 ", t.title))
    fail(errc::parse_error, "missing table header");
  std::string cols;
  if (!consume_prefix(lines[1].text, "#COLUMNS ", cols))
    fail(errc::parse_error, "missing column line");
  size_t start = 0;
  while (true) {
    size_t c = cols.find(',', start);
    t.columns.push_back(cols.substr(start, c == std::string::npos ? c : c - start));
    if (c == std::string::npos) break;
    start = c + 1;
  }
  for (size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].text.empty() && i + 1 == lines.size()) break;
    std::vector<std::string> row;
    start = 0;
    const std::string& ln = lines[i].text;
    while (true) {
      size_t c = ln.find(',', start);
      row.push_back(ln.substr(start, c == std::string::npos ? c : c - start));
      if (c == std::string::npos) break;
      start = c + 1;
    }
    if (row.size() != t.columns.size()) fail(errc::parse_error, "table row width mismatch");
    t.rows.push_back(std::move(row));
  }
  return t;
}

TableReport moment_table(const std::vector<MomentRow>& rows, const std::vector<unsigned>& s_list,
                         const std::vector<unsigned>& t_list) {
  TableReport t;
  t.title = "moments";
  t.columns = {"T", "family"};
  for (unsigned s : s_list) t.columns.push_back("avg_points_pow_" + std::to_string(s));
  for (unsigned tt : t_list) t.columns.push_back("avg_sqdivcount_pow_" + std::to_string(tt));
  for (unsigned s : s_list) t.columns.push_back("avg_rank2_pow_" + std::to_string(s));
  t.columns.push_back("rank_covered");
  t.columns.push_back("window_empty");
  t.columns.push_back("split_fallback");
  for (const auto& r : rows) {
    if (r.avg_points_pow.size() != s_list.size() || r.avg_disc_pow.size() != t_list.size() ||
        r.avg_rank_pow.size() != s_list.size())
      fail(errc::precondition_violated, "moment row width mismatch");
    std::vector<std::string> row{r.T.get_str(), std::to_string(r.family_size)};
    for (const auto& q : r.avg_points_pow) row.push_back(q.get_str());
    for (const auto& q : r.avg_disc_pow) row.push_back(q.get_str());
    for (const auto& q : r.avg_rank_pow) row.push_back(q.get_str());
    row.push_back(std::to_string(r.rank_covered));
    row.push_back(std::to_string(r.window_empty));
    row.push_back(std::to_string(r.split_fallback));
    t.rows.push_back(std::move(row));
  }
  return t;
}

TableReport census_table(const std::vector<CensusRow>& rows) {
  TableReport t;
  t.title = "census";
  t.columns = {"T", "modulus", "count", "family", "ratio", "reference"};
  for (const auto& r : rows)
    t.rows.push_back({r.T.get_str(), r.modulus.get_str(), std::to_string(r.count),
                      std::to_string(r.family_size), r.ratio.get_str(), r.reference.get_str()});
  return t;
}

namespace {

std::string render_block(unsigned index, const std::vector<SweepRecord>& records,
                         const ShardAggregate& agg) {
  std::string payload;
  for (const auto& r : records) {
    payload += record_line(r);
    payload += '\n';
  }
  payload += "#AGG " + agg.serialize() + "\n";
  std::string out = "#SHARD " + std::to_string(index) + " BEGIN\n";
  out += payload;
  out += "#SHARD " + std::to_string(index) + " END crc=" + to_hex(fnv1a64(payload)) +
         " n=" + std::to_string(records.size()) + "\n";
  return out;
}

struct CacheRead {
  bool exists = false;
  std::vector<CacheShard> shards;
  size_t valid_bytes = 0;  // header plus complete blocks
};

// parse "#SHARD <k> BEGIN"
bool parse_begin(const std::string& line, unsigned& index) {
  std::string rest;
  if (!consume_prefix(line, "#SHARD ", rest)) return false;
  size_t sp = rest.find(' ');
  if (sp == std::string::npos || rest.substr(sp + 1) != "BEGIN") return false;
  try {
    size_t pos = 0;
    unsigned long v = std::stoul(rest.substr(0, sp), &pos);
    if (pos != sp) return false;
    index = static_cast<unsigned>(v);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

// parse "#SHARD <k> END crc=<hex> n=<count>"
bool parse_end(const std::string& line, unsigned& index, std::string& crc, u64& count) {
  std::string rest;
  if (!consume_prefix(line, "#SHARD ", rest)) return false;
  std::istringstream is(rest);
  std::string kw, crctok, ntok;
  unsigned long k = 0;
  if (!(is >> k >> kw >> crctok >> ntok) || kw != "END") return false;
  std::string dummy;
  if (is >> dummy) return false;
  if (crctok.rfind("crc=", 0) != 0 || ntok.rfind("n=", 0) != 0) return false;
  index = static_cast<unsigned>(k);
  crc = crctok.substr(4);
  try {
    size_t pos = 0;
    count = std::stoull(ntok.substr(2), &pos);
    if (pos != ntok.size() - 2) return false;
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

CacheRead read_cache(const std::string& path, const SweepOptions& opt, size_t shard_count) {
  CacheRead cr;
  std::ifstream in(path, std::ios::binary);
  if (!in) return cr;
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.empty()) return cr;

  auto lines = scan_lines(text);
  std::string rest;
  if (lines.size() < 1 || !lines[0].terminated ||
      !consume_prefix(lines[0].text, "#QPSWEEP v1 confighash=", rest))
    fail(errc::corrupt_cache, "not a sweep cache: " + path);
  if (rest != to_hex(config_hash(opt)))
    fail(errc::config_mismatch, "cache was produced by a different configuration");
  if (lines.size() < 2 || !lines[1].terminated || !consume_prefix(lines[1].text, "#CONFIG ", rest))
    fail(errc::corrupt_cache, "cache misses its config line");
  if (rest != opt.canonical())
    fail(errc::config_mismatch, "cache config text disagrees with its hash");
  cr.exists = true;
  cr.valid_bytes = lines[1].end;

  bool marked = is_marked_family(opt);
  std::vector<bool> seen(shard_count, false);
  size_t i = 2;
  while (i < lines.size()) {
    unsigned index = 0;
    if (!lines[i].terminated || !parse_begin(lines[i].text, index)) break;  // truncated tail
    size_t j = i + 1;
    std::string payload;
    std::vector<std::string> payload_lines;
    bool complete = false;
    unsigned end_index = 0;
    std::string crc;
    u64 count = 0;
    while (j < lines.size() && lines[j].terminated) {
      if (parse_end(lines[j].text, end_index, crc, count)) {
        complete = true;
        break;
      }
      payload += lines[j].text;
      payload += '\n';
      payload_lines.push_back(lines[j].text);
      ++j;
    }
    if (!complete) break;  // truncated tail, recompute this shard
    if (end_index != index) fail(errc::corrupt_cache, "shard frame indices disagree");
    if (index >= shard_count) fail(errc::corrupt_cache, "shard index out of range");
    if (seen[index]) fail(errc::corrupt_cache, "duplicate shard block");
    if (crc != to_hex(fnv1a64(payload))) fail(errc::corrupt_cache, "shard checksum mismatch");
    if (payload_lines.empty() || payload_lines.back().rfind("#AGG ", 0) != 0)
      fail(errc::corrupt_cache, "shard block misses its aggregate");
    if (count != payload_lines.size() - 1) fail(errc::corrupt_cache, "shard record count mismatch");
    CacheShard shard;
    shard.index = index;
    try {
      shard.agg = ShardAggregate::parse(payload_lines.back().substr(5), opt);
      for (size_t r = 0; r + 1 < payload_lines.size(); ++r)
        shard.records.push_back(parse_record_line(payload_lines[r], marked));
    } catch (const error& e) {
      if (e.code() == errc::parse_error)
        fail(errc::corrupt_cache, std::string("bad shard payload: ") + e.what());
      throw;
    }
    if (!opt.want_records && !shard.records.empty())
      fail(errc::corrupt_cache, "records present in a stats-only cache");
    seen[index] = true;
    cr.shards.push_back(std::move(shard));
    cr.valid_bytes = lines[j].end;
    i = j + 1;
  }
  return cr;
}

}  // namespace

CacheProbe cache_probe(const std::string& path, const SweepOptions& opt) {
  opt.validate();
  auto plans = plan_shards(opt);
  CacheRead cr = read_cache(path, opt, plans.size());
  CacheProbe probe;
  probe.exists = cr.exists;
  probe.have.assign(plans.size(), false);
  for (const auto& s : cr.shards) {
    probe.have[s.index] = true;
    ++probe.complete_blocks;
  }
  return probe;
}

SweepResult run_sweep_cached(const SweepOptions& opt, const std::string& cache_path,
                             const RankTable* ranks) {
  opt.validate();
  auto plans = plan_shards(opt);
  CacheRead cr = read_cache(cache_path, opt, plans.size());

  std::vector<bool> have(plans.size(), false);
  std::vector<CacheShard> store(plans.size());
  for (auto& s : cr.shards) {
    have[s.index] = true;
    store[s.index] = std::move(s);
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  if (cr.exists) {
    fs::resize_file(cache_path, cr.valid_bytes, ec);  // drop any truncated tail
    if (ec) fail(errc::io_error, "cannot truncate cache: " + cache_path);
  }
  std::ofstream out;
  if (cr.exists) {
    out.open(cache_path, std::ios::binary | std::ios::app);
    if (!out) fail(errc::io_error, "cannot append to cache: " + cache_path);
  } else {
    out.open(cache_path, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_error, "cannot create cache: " + cache_path);
    out << "#QPSWEEP v1 confighash=" << to_hex(config_hash(opt)) << "\n";
    out << "#CONFIG " << opt.canonical() << "\n";
    out.flush();
    if (!out) fail(errc::io_error, "cache write failed: " + cache_path);
  }

  std::vector<size_t> todo;
  for (size_t k = 0; k < plans.size(); ++k)
    if (!have[k]) todo.push_back(k);
  if (opt.permute_shards) {
    std::mt19937_64 rng(opt.permute_seed);
    std::shuffle(todo.begin(), todo.end(), rng);
  }

  std::mutex io_mutex;
  auto finish_shard = [&](size_t k, ShardOutput&& so) {
    std::lock_guard<std::mutex> lock(io_mutex);
    out << render_block(so.index, so.records, so.agg);
    out.flush();
    if (!out) fail(errc::io_error, "cache write failed: " + cache_path);
    store[k].index = so.index;
    store[k].records = std::move(so.records);
    store[k].agg = std::move(so.agg);
  };

  unsigned hw = std::thread::hardware_concurrency();
  unsigned workers = opt.workers ? opt.workers : (hw ? hw : 1);
  workers = std::min<unsigned>(workers, static_cast<unsigned>(todo.size() ? todo.size() : 1));
  if (workers <= 1) {
    for (size_t k : todo) finish_shard(k, run_shard(opt, plans[k], ranks));
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        while (true) {
          size_t slot = cursor.fetch_add(1);
          if (slot >= todo.size()) break;
          try {
            finish_shard(todo[slot], run_shard(opt, plans[todo[slot]], ranks));
          } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
            break;
          }
        }
      });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  SweepResult res;
  res.totals.init(opt);
  res.shard_aggs.resize(plans.size());
  for (size_t k = 0; k < plans.size(); ++k) {
    res.totals.merge(store[k].agg);
    res.shard_aggs[k] = store[k].agg;
    if (opt.want_records)
      res.records.insert(res.records.end(), store[k].records.begin(), store[k].records.end());
  }
  return res;
}

}  // namespace qp
