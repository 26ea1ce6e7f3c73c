#include "mace/novelty_bus.h"

#include <string>

#include "mace/errors.h"

namespace mace {

BusFrame::BusFrame(NoveltyBus* bus, std::int64_t t, int num_agents)
    : bus_(bus), t_(t), messages_(num_agents, 0.0), sent_(num_agents, 0) {}

void BusFrame::Broadcast(int agent, double novelty) {
  if (agent < 0 || agent >= num_agents()) {
    throw ProtocolError("broadcast from unknown agent " + std::to_string(agent));
  }
  if (sent_[agent]) {
    throw ProtocolError("agent " + std::to_string(agent) +
                        " already sent at t=" + std::to_string(t_));
  }
  sent_[agent] = 1;
  messages_[agent] = novelty;
  ++received_;
  bus_->Account(t_, agent, novelty);
}

const std::vector<double>& BusFrame::Collect(int agent) const {
  if (agent < 0 || agent >= num_agents()) {
    throw ProtocolError("collect by unknown agent " + std::to_string(agent));
  }
  if (!complete()) {
    throw ProtocolError("frame t=" + std::to_string(t_) + " read before all " +
                        std::to_string(num_agents()) + " agents sent");
  }
  return messages_;
}

NoveltyBus::NoveltyBus(int num_agents) : num_agents_(num_agents) {
  if (num_agents <= 0) throw ProtocolError("bus needs at least one agent");
}

BusFrame NoveltyBus::OpenFrame() { return BusFrame(this, next_t_++, num_agents_); }

void NoveltyBus::SetTrace(std::ostream* trace) {
  trace_ = trace;
  if (trace_) *trace_ << "t,agent,u\n";
}

void NoveltyBus::Account(std::int64_t t, int agent, double novelty) {
  ++scalars_sent_;
  if (trace_) *trace_ << t << ',' << agent << ',' << novelty << '\n';
}

}  // namespace mace
