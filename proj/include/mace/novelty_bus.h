#ifndef MACE_NOVELTY_BUS_H_
#define MACE_NOVELTY_BUS_H_

#include <cstdint>
#include <ostream>
#include <vector>

namespace mace {

class NoveltyBus;

// One timestep of the training-time channel: each agent contributes exactly
// one scalar (its local novelty). Readable only once every agent has sent.
class BusFrame {
 public:
  std::int64_t t() const { return t_; }
  int num_agents() const { return static_cast<int>(messages_.size()); }

  // Throws ProtocolError on a duplicate send or an unknown agent id.
  void Broadcast(int agent, double novelty);
  bool complete() const { return received_ == num_agents(); }
  // All agents' messages, including the caller's own. Throws ProtocolError
  // if the frame is incomplete.
  const std::vector<double>& Collect(int agent) const;

 private:
  friend class NoveltyBus;
  BusFrame(NoveltyBus* bus, std::int64_t t, int num_agents);

  NoveltyBus* bus_;
  std::int64_t t_;
  std::vector<double> messages_;
  std::vector<std::uint8_t> sent_;
  int received_ = 0;
};

// Fully connected, lossless, synchronous channel with a bandwidth counter.
// Evaluation rollouts do not use a bus at all.
class NoveltyBus {
 public:
  explicit NoveltyBus(int num_agents);

  // Frames are numbered consecutively from 0.
  BusFrame OpenFrame();

  // Scalars broadcast so far across all frames.
  std::int64_t scalars_sent() const { return scalars_sent_; }
  std::int64_t frames_opened() const { return next_t_; }
  int num_agents() const { return num_agents_; }

  // Optional audit trace; writes the "t,agent,u" header immediately and one
  // row per broadcast. Pass nullptr to disable.
  void SetTrace(std::ostream* trace);

 private:
  friend class BusFrame;
  void Account(std::int64_t t, int agent, double novelty);

  int num_agents_;
  std::int64_t next_t_ = 0;
  std::int64_t scalars_sent_ = 0;
  std::ostream* trace_ = nullptr;
};

}  // namespace mace

#endif  // MACE_NOVELTY_BUS_H_
