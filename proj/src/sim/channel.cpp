#include <sstream>

#include "cograph/sim.hpp"

namespace cograph {

std::size_t ChannelStats::total_sent() const {
  std::size_t n = 0;
  for (const auto& [robot, bytes] : sent) n += bytes;
  return n;
}

std::size_t ChannelStats::total_received() const {
  std::size_t n = 0;
  for (const auto& [robot, bytes] : received) n += bytes;
  return n;
}

void Channel::send(RobotId from, RobotId to, std::uint64_t frame, const std::string& type,
                   std::vector<std::uint8_t> bytes) {
  stats_.sent[from] += bytes.size();
  stats_.log.push_back({frame, from, to, type, bytes.size()});
  queues_[{from, to}].push_back(std::move(bytes));
}

std::optional<Channel::Delivery> Channel::receive(RobotId to) {
  // Senders are drained in ascending id order; per sender the queue is FIFO.
  for (auto& [key, queue] : queues_) {
    if (key.second != to || queue.empty()) continue;
    Delivery d{key.first, std::move(queue.front())};
    queue.pop_front();
    stats_.received[to] += d.bytes.size();
    return d;
  }
  return std::nullopt;
}

std::string channel_log_csv(const ChannelStats& stats) {
  std::ostringstream out;
  out << "frame,from,to,type,bytes\n";
  for (const auto& e : stats.log)
    out << e.frame << ',' << int(e.from) << ',' << int(e.to) << ',' << e.type << ',' << e.bytes
        << '\n';
  return out.str();
}

}  // namespace cograph
