#include "catkb/store.hpp"

#include "catkb/error.hpp"
#include "catkb/io.hpp"

namespace catkb {

using nlohmann::json;
using nlohmann::ordered_json;

void PseudoLabelStore::put(PseudoLabelRecord record) {
  if (record.task != task_) {
    throw ContractError("record for task '" + std::string(to_string(record.task)) +
                        "' put into a '" + std::string(to_string(task_)) + "' store");
  }
  if (record.generation != generation_) {
    throw ContractError("record generation " + std::to_string(record.generation) +
                        " does not match store generation " + std::to_string(generation_));
  }
  if (!(record.score >= 0.0 && record.score <= 1.0)) {
    throw ContractError("pseudo-label score " + std::to_string(record.score) +
                        " outside [0, 1] for '" + record.item_key + "'");
  }
  std::string key = record.item_key;
  records_.insert_or_assign(std::move(key), std::move(record));
}

const PseudoLabelRecord* PseudoLabelStore::find(const std::string& item_key) const {
  const auto it = records_.find(item_key);
  return it == records_.end() ? nullptr : &it->second;
}

BandCounts PseudoLabelStore::counts() const {
  BandCounts c;
  for (const auto& [key, r] : records_) {
    switch (r.band) {
      case Band::positive: ++c.positive; break;
      case Band::negative: ++c.negative; break;
      case Band::discarded: ++c.discarded; break;
    }
  }
  return c;
}

ordered_json to_json(const BandCounts& counts) {
  return ordered_json{{"positive", counts.positive},
                      {"negative", counts.negative},
                      {"discarded", counts.discarded},
                      {"total", counts.total()}};
}

std::string to_jsonl(const PseudoLabelRecord& r) {
  ordered_json j{{"item_key", r.item_key},
                 {"task", std::string(to_string(r.task))},
                 {"score", r.score},
                 {"band", std::string(to_string(r.band))},
                 {"generation", r.generation}};
  return j.dump();
}

void write_store(const PseudoLabelStore& store, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [key, r] : store.records()) out += to_jsonl(r) + "\n";
  io::write_file_atomic(path, out);
}

PseudoLabelStore read_store(const std::filesystem::path& path, Task task) {
  std::vector<PseudoLabelRecord> rows;
  io::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    const std::string row = path.filename().string() + ":" + std::to_string(number);
    try {
      const json j = json::parse(line);
      PseudoLabelRecord r;
      r.item_key = j.at("item_key").get<std::string>();
      r.task = parse_task(j.at("task").get<std::string>());
      r.score = j.at("score").get<double>();
      r.band = parse_band(j.at("band").get<std::string>());
      r.generation = j.at("generation").get<int>();
      r.origin = r.generation == 0 ? Origin::teacher : Origin::student;
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(row + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(row + ": " + e.what());
    }
  });
  if (rows.empty()) return PseudoLabelStore(task, 0);
  PseudoLabelStore store(rows.front().task, rows.front().generation);
  for (auto& r : rows) {
    try {
      store.put(std::move(r));
    } catch (const ContractError& e) {
      throw ParseError(path.filename().string() + ": inconsistent store: " + e.what());
    }
  }
  return store;
}

}  // namespace catkb
