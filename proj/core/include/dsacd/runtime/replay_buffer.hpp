#pragma once

#include <mutex>
#include <span>
#include <vector>

#include "dsacd/random.hpp"
#include "dsacd/value/bellman.hpp"

namespace dsacd::runtime {

struct Transition {
  Vector state;
  Vector action;
  double reward = 0.0;
  Vector next_state;
  bool terminal = false;
};

/// Fixed-capacity ring of transitions with FIFO eviction and uniform
/// sampling. add() and sample() are serialized by an internal mutex.
class ReplayBuffer {
 public:
  ReplayBuffer(Index capacity, Index state_dim, Index action_dim);
  ReplayBuffer(const ReplayBuffer& other);
  ReplayBuffer& operator=(const ReplayBuffer& other);

  /// Throws std::invalid_argument on non-finite fields or wrong dimensions.
  void add(const Transition& t);
  /// Uniform with replacement.
  value::TransitionBatch sample(Index batch_size, Rng& rng) const;
  /// Batch of the given stored slots (slot 0 is the oldest item).
  value::TransitionBatch gather(std::span<const Index> slots) const;
  /// Uniformly drawn slot indices, exposed for distribution tests.
  std::vector<Index> sample_slots(Index batch_size, Rng& rng) const;

  Index size() const;
  Index capacity() const { return capacity_; }
  Index state_dim() const { return states_.rows(); }
  Index action_dim() const { return actions_.rows(); }
  void clear();

  // Raw ring storage, for checkpointing.
  struct Storage {
    Matrix states, actions, next_states;
    Vector rewards;
    std::vector<bool> terminals;
    Index size = 0;
    Index head = 0;  // next write position
  };
  Storage storage() const;
  void restore(const Storage& s);

 private:
  Index physical(Index slot) const;

  Index capacity_;
  Matrix states_, actions_, next_states_;
  Vector rewards_;
  std::vector<bool> terminals_;
  Index size_ = 0;
  Index head_ = 0;
  mutable std::mutex mutex_;
};

}  // namespace dsacd::runtime
