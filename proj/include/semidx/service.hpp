#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "semidx/dialog.hpp"
#include "semidx/store.hpp"

namespace httplib {
class Server;
}

namespace semidx {

struct ServiceOptions {
  // D-concept set used by commit?infer=true and /infer when the request
  // names none. Empty: use the only stored set, if there is exactly one.
  std::string dconcepts;
  NextQuestionStrategy strategy;
};

// HTTP facade over a store: axis upload, dialog sessions, queries,
// inference and case retrieval. JSON bodies; keys in canonical text form.
class Service {
 public:
  explicit Service(Store& store, ServiceOptions options = {});
  ~Service();

  void mount(httplib::Server& server);

  // Blocks until stop() is called from another thread.
  void listen(const std::string& host, int port);
  // Binds to a free port and returns it; serve with run().
  int bind_any(const std::string& host);
  void run();
  void wait_until_ready() const;
  void stop();

 private:
  struct Entry {
    std::mutex mu;
    std::unique_ptr<DialogSession> session;
  };

  std::shared_ptr<Entry> session(const std::string& id);
  std::string resolve_dconcepts(const std::string& requested) const;

  Store& store_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_session_ = 1;
};

}  // namespace semidx
