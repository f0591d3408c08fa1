#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "json.hpp"
#include "moco/checkpoint.hpp"
#include "moco/inference.hpp"

namespace httplib {
class Server;
}

namespace moco {

// HTTP inference front end. Handlers are plain member functions so they can
// be exercised without a socket; attach() wires them to routes.
class InferenceService {
 public:
  struct Response {
    int status = 200;
    nlohmann::json body;
  };
  using Query = std::map<std::string, std::string>;

  explicit InferenceService(Checkpoint checkpoint, bool parallel = true);

  Response add_instance(const std::string& body);
  Response solve(const std::string& id, const Query& query);
  Response front(const std::string& id, const std::string& body);
  Response adapt(const std::string& id, const std::string& body);
  Response health() const;

  void attach(httplib::Server& server, const std::string& static_dir = "");

  // Number of encoder passes performed so far (cache misses).
  std::uint64_t encode_count() const { return encodes_.load(); }

 private:
  struct Snapshot {
    Policy<float> policy;
    std::uint64_t version = 0;
  };
  struct Entry {
    ProblemInstance instance;
    std::shared_ptr<const Snapshot> adapted;  // per-instance model after adaptation
    std::map<std::pair<std::uint64_t, bool>, std::shared_ptr<const EncodedInstance>> cache;
  };

  std::shared_ptr<const Snapshot> snapshot_for(const std::string& id, ProblemInstance* instance) const;
  std::shared_ptr<const EncodedInstance> encoded(const std::string& id, const ProblemInstance& instance,
                                                 const std::shared_ptr<const Snapshot>& snap, bool aug);

  Checkpoint meta_;  // header fields; policy values live in the snapshots
  bool parallel_;
  std::shared_ptr<const Snapshot> base_;
  mutable std::mutex mutex_;  // guards entries_ and snapshot pointers
  std::map<std::string, Entry> entries_;
  std::uint64_t next_id_ = 1;
  std::uint64_t next_version_ = 1;
  std::mutex adapt_mutex_;
  std::atomic<std::uint64_t> encodes_{0};
};

}  // namespace moco
