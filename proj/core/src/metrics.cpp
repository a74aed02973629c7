#include "dsacd/io/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dsacd::io {

namespace {

nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json metrics_json(const runtime::IterationMetrics& m) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : m.alpha_steps)
    steps.push_back({{"alpha_before", s.alpha_before},
                     {"alpha_after", s.alpha_after},
                     {"entropy", number(s.entropy)},
                     {"target_entropy", s.target_entropy},
                     {"clamped", s.clamped}});
  return {{"iteration", m.iteration},
          {"k", m.updates},
          {"env_steps", m.env_steps},
          {"warmup", m.warmup},
          {"J_z", number(m.value_loss)},
          {"J_pi", number(m.policy_objective)},
          {"q_mean", number(m.q_mean)},
          {"H_hat", number(m.entropy)},
          {"alpha", m.alpha},
          {"episode_return_mean", number(m.episode_return_mean)},
          {"episode_return_std", number(m.episode_return_std)},
          {"episodes", m.episodes},
          {"alpha_steps", steps}};
}

nlohmann::json timing_json(const runtime::IterationMetrics& m) {
  return {{"iteration", m.iteration}, {"wall_time", m.wall_time}};
}

JsonlWriter::JsonlWriter(const std::string& path) : path_(path), out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
}

void JsonlWriter::write(const nlohmann::json& record) {
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write to '" + path_ + "' failed");
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<nlohmann::json> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
    }
  }
  return records;
}

}  // namespace dsacd::io
