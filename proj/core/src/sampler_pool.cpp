#include "dsacd/runtime/sampler_pool.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "dsacd/random.hpp"

namespace dsacd::runtime {

SamplerPool::SamplerPool(const envs::Environment& prototype, int n_samplers, std::uint64_t seed)
    : seed_(seed) {
  if (n_samplers < 1) throw std::invalid_argument("sampler pool needs at least one sampler");
  for (int i = 0; i < n_samplers; ++i) {
    SamplerSlot slot;
    slot.env = prototype.clone();
    slots_.push_back(std::move(slot));
    reset_slot(i);
  }
}

std::uint64_t SamplerPool::step_seed(int sampler, long long step) const {
  return derive_seed(derive_seed(seed_, static_cast<std::uint64_t>(2 * sampler)),
                     static_cast<std::uint64_t>(step));
}

std::uint64_t SamplerPool::episode_seed(int sampler, long long episode) const {
  return derive_seed(derive_seed(seed_, static_cast<std::uint64_t>(2 * sampler + 1)),
                     static_cast<std::uint64_t>(episode));
}

void SamplerPool::reset_slot(int i) {
  auto& s = slot(i);
  s.observation = s.env->reset(episode_seed(i, s.episodes));
  ++s.episodes;
  s.episode_return = 0.0;
  s.episode_length = 0;
}

double EpisodeStats::mean_return() const {
  if (returns.empty()) return std::nan("");
  double m = 0.0;
  for (double r : returns) m += r;
  return m / static_cast<double>(returns.size());
}

double EpisodeStats::std_return() const {
  if (returns.empty()) return std::nan("");
  const double m = mean_return();
  double v = 0.0;
  for (double r : returns) v += (r - m) * (r - m);
  return std::sqrt(v / static_cast<double>(returns.size()));
}

namespace {

struct SamplerOutput {
  std::vector<Transition> transitions;
  EpisodeStats stats;
  std::exception_ptr error;
};

void run_sampler(SamplerPool& pool, int index, const ActionPicker& act, int n_steps, SamplerOutput& out) {
  try {
    auto& slot = pool.slot(index);
    for (int i = 0; i < n_steps; ++i) {
      const Vector action = act(slot.observation, pool.step_seed(index, slot.steps));
      ++slot.steps;
      const envs::StepResult step = slot.env->step(action);
      out.transitions.push_back({slot.observation, action, step.reward, step.next_state, step.terminal});
      slot.episode_return += step.reward;
      ++slot.episode_length;
      const bool time_limit = slot.episode_length >= slot.env->spec().max_episode_steps;
      if (step.terminal || step.truncated || time_limit) {
        out.stats.returns.push_back(slot.episode_return);
        out.stats.lengths.push_back(slot.episode_length);
        pool.reset_slot(index);
      } else {
        slot.observation = step.next_state;
      }
    }
  } catch (...) {
    out.error = std::current_exception();
  }
}

}  // namespace

EpisodeStats collect(SamplerPool& pool, const ActionPicker& act, int n_steps, ReplayBuffer& buffer,
                     bool parallel) {
  EpisodeStats total;
  if (n_steps <= 0) return total;
  std::vector<SamplerOutput> outputs(static_cast<std::size_t>(pool.size()));
  if (parallel && pool.size() > 1) {
    std::vector<std::thread> threads;
    for (int i = 0; i < pool.size(); ++i)
      threads.emplace_back(run_sampler, std::ref(pool), i, std::cref(act), n_steps,
                           std::ref(outputs[static_cast<std::size_t>(i)]));
    for (auto& t : threads) t.join();
  } else {
    for (int i = 0; i < pool.size(); ++i) run_sampler(pool, i, act, n_steps, outputs[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < pool.size(); ++i) {
    auto& out = outputs[static_cast<std::size_t>(i)];
    if (out.error) {
      try {
        std::rethrow_exception(out.error);
      } catch (const std::exception& e) {
        throw std::runtime_error("environment sampler " + std::to_string(i) + " failed: " + e.what());
      }
    }
    for (const auto& t : out.transitions) buffer.add(t);
    total.returns.insert(total.returns.end(), out.stats.returns.begin(), out.stats.returns.end());
    total.lengths.insert(total.lengths.end(), out.stats.lengths.begin(), out.stats.lengths.end());
  }
  return total;
}

EpisodeStats collect(SamplerPool& pool, const policy::PolicyModel& policy, double alpha,
                     const policy::ExplorationConfig& exploration, int n_steps, ReplayBuffer& buffer,
                     bool parallel) {
  const ActionPicker act = [&](const Vector& state, std::uint64_t seed) {
    return policy::explore_action(policy, state, alpha, exploration, seed);
  };
  return collect(pool, act, n_steps, buffer, parallel);
}

}  // namespace dsacd::runtime
