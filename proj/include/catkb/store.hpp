#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "catkb/core.hpp"

namespace catkb {

struct BandCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t discarded = 0;

  std::size_t total() const { return positive + negative + discarded; }
  friend bool operator==(const BandCounts&, const BandCounts&) = default;
};

/// One generation of pseudo labels for one task, keyed by item key.
/// Generation 0 comes from the teacher, later generations from student refinement.
class PseudoLabelStore {
 public:
  explicit PseudoLabelStore(Task task = Task::event_conceptualization, int generation = 0)
      : task_(task), generation_(generation) {}

  Task task() const noexcept { return task_; }
  int generation() const noexcept { return generation_; }

  /// Inserts or replaces the record for its item. The record's task and generation must
  /// match the store and its score must lie in [0, 1] (ContractError otherwise).
  void put(PseudoLabelRecord record);

  const PseudoLabelRecord* find(const std::string& item_key) const;
  const std::map<std::string, PseudoLabelRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  BandCounts counts() const;

 private:
  Task task_;
  int generation_;
  std::map<std::string, PseudoLabelRecord> records_;
};

nlohmann::ordered_json to_json(const BandCounts& counts);

/// {"item_key", "task", "score", "band", "generation"}
std::string to_jsonl(const PseudoLabelRecord& record);

void write_store(const PseudoLabelStore& store, const std::filesystem::path& path);

/// Reads a store written by write_store(). Every row must share one task and generation;
/// `task` is used when the file is empty.
PseudoLabelStore read_store(const std::filesystem::path& path,
                            Task task = Task::event_conceptualization);

}  // namespace catkb
