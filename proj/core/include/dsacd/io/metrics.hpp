#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsacd/runtime/trainer.hpp"

namespace dsacd::io {

/// One metrics record. Non-finite values become null. Wall time is left out
/// so that records of identically seeded runs compare equal; see timing_json.
nlohmann::json metrics_json(const runtime::IterationMetrics& m);
nlohmann::json timing_json(const runtime::IterationMetrics& m);

/// Append-only line-delimited JSON, flushed after every record.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path);
  void write(const nlohmann::json& record);

 private:
  std::string path_;
  std::ofstream out_;
};

/// Parses every non-empty line; malformed lines throw std::runtime_error with
/// the line number.
std::vector<nlohmann::json> read_jsonl(const std::string& path);

}  // namespace dsacd::io
