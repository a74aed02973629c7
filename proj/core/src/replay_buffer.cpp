#include "dsacd/runtime/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsacd::runtime {

ReplayBuffer::ReplayBuffer(Index capacity, Index state_dim, Index action_dim)
    : capacity_(capacity),
      states_(state_dim, capacity),
      actions_(action_dim, capacity),
      next_states_(state_dim, capacity),
      rewards_(capacity),
      terminals_(static_cast<std::size_t>(capacity), false) {
  if (capacity < 1) throw std::invalid_argument("replay buffer capacity must be >= 1");
}

ReplayBuffer::ReplayBuffer(const ReplayBuffer& other) : capacity_(other.capacity_) {
  std::lock_guard lock(other.mutex_);
  states_ = other.states_;
  actions_ = other.actions_;
  next_states_ = other.next_states_;
  rewards_ = other.rewards_;
  terminals_ = other.terminals_;
  size_ = other.size_;
  head_ = other.head_;
}

ReplayBuffer& ReplayBuffer::operator=(const ReplayBuffer& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  capacity_ = other.capacity_;
  states_ = other.states_;
  actions_ = other.actions_;
  next_states_ = other.next_states_;
  rewards_ = other.rewards_;
  terminals_ = other.terminals_;
  size_ = other.size_;
  head_ = other.head_;
  return *this;
}

void ReplayBuffer::add(const Transition& t) {
  if (t.state.size() != states_.rows() || t.next_state.size() != states_.rows() ||
      t.action.size() != actions_.rows())
    throw std::invalid_argument("transition dimensions do not match the replay buffer");
  if (!t.state.allFinite() || !t.action.allFinite() || !t.next_state.allFinite() || !std::isfinite(t.reward))
    throw std::invalid_argument("transition contains non-finite values");
  std::lock_guard lock(mutex_);
  states_.col(head_) = t.state;
  actions_.col(head_) = t.action;
  next_states_.col(head_) = t.next_state;
  rewards_[head_] = t.reward;
  terminals_[static_cast<std::size_t>(head_)] = t.terminal;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Index ReplayBuffer::size() const {
  std::lock_guard lock(mutex_);
  return size_;
}

Index ReplayBuffer::physical(Index slot) const {
  const Index oldest = size_ < capacity_ ? 0 : head_;
  return (oldest + slot) % capacity_;
}

std::vector<Index> ReplayBuffer::sample_slots(Index batch_size, Rng& rng) const {
  std::lock_guard lock(mutex_);
  if (size_ == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  std::vector<Index> slots(static_cast<std::size_t>(batch_size));
  for (auto& s : slots) s = static_cast<Index>(rng.below(static_cast<std::uint64_t>(size_)));
  return slots;
}

value::TransitionBatch ReplayBuffer::gather(std::span<const Index> slots) const {
  std::lock_guard lock(mutex_);
  const Index n = static_cast<Index>(slots.size());
  value::TransitionBatch b;
  b.states.resize(states_.rows(), n);
  b.actions.resize(actions_.rows(), n);
  b.next_states.resize(states_.rows(), n);
  b.rewards.resize(n);
  b.terminals.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index slot = slots[static_cast<std::size_t>(i)];
    if (slot < 0 || slot >= size_) throw std::out_of_range("replay buffer slot out of range");
    const Index p = physical(slot);
    b.states.col(i) = states_.col(p);
    b.actions.col(i) = actions_.col(p);
    b.next_states.col(i) = next_states_.col(p);
    b.rewards[i] = rewards_[p];
    b.terminals[static_cast<std::size_t>(i)] = terminals_[static_cast<std::size_t>(p)];
  }
  return b;
}

value::TransitionBatch ReplayBuffer::sample(Index batch_size, Rng& rng) const {
  const auto slots = sample_slots(batch_size, rng);
  return gather(slots);
}

void ReplayBuffer::clear() {
  std::lock_guard lock(mutex_);
  size_ = 0;
  head_ = 0;
}

ReplayBuffer::Storage ReplayBuffer::storage() const {
  std::lock_guard lock(mutex_);
  Storage s;
  // Only live columns, oldest first.
  s.states.resize(states_.rows(), size_);
  s.actions.resize(actions_.rows(), size_);
  s.next_states.resize(states_.rows(), size_);
  s.rewards.resize(size_);
  s.terminals.resize(static_cast<std::size_t>(size_));
  for (Index i = 0; i < size_; ++i) {
    const Index p = physical(i);
    s.states.col(i) = states_.col(p);
    s.actions.col(i) = actions_.col(p);
    s.next_states.col(i) = next_states_.col(p);
    s.rewards[i] = rewards_[p];
    s.terminals[static_cast<std::size_t>(i)] = terminals_[static_cast<std::size_t>(p)];
  }
  s.size = size_;
  s.head = size_ % capacity_;
  return s;
}

void ReplayBuffer::restore(const Storage& s) {
  if (s.size > capacity_ || s.states.rows() != states_.rows() || s.actions.rows() != actions_.rows() ||
      s.states.cols() != s.size)
    throw std::invalid_argument("replay buffer storage does not fit this buffer");
  std::lock_guard lock(mutex_);
  for (Index i = 0; i < s.size; ++i) {
    states_.col(i) = s.states.col(i);
    actions_.col(i) = s.actions.col(i);
    next_states_.col(i) = s.next_states.col(i);
    rewards_[i] = s.rewards[i];
    terminals_[static_cast<std::size_t>(i)] = s.terminals[static_cast<std::size_t>(i)];
  }
  size_ = s.size;
  head_ = s.size % capacity_;
}

}  // namespace dsacd::runtime
