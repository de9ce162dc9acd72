#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swarmgraph/executors.hpp"
#include "swarmgraph/graph.hpp"

namespace swarmgraph {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Minimal transport seam: the real implementation wraps an HTTP client,
/// tests inject scripted responses.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& body) = 0;
};

struct HttpExecutorConfig {
  std::string base_url = "https://api.openai.com";
  std::string model = "gpt-4-1106-preview";
  double temperature = 0.2;
  std::string api_key_env = "OPENAI_API_KEY";
  int max_attempts = 3;
  int backoff_ms = 250;
  std::string cache_dir;  // empty disables the on-disk cache
  int max_in_flight = 4;
};

namespace detail {

inline std::string cache_key(const std::string& model,
                             const std::string& system,
                             const std::string& user, double temperature) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(temperature));
  std::memcpy(&bits, &temperature, sizeof(bits));
  const std::uint64_t h = stable_hash(model, system, user, bits);
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

inline bool is_retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace detail

/// Issues one chat-completion call with retry, backoff, and an optional
/// content-addressed disk cache. The API key is read from the environment on
/// every call and never persisted.
inline std::string http_invoke(const HttpExecutorConfig& cfg,
                               HttpTransport& transport,
                               const ExecutorRequest& req) {
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw AuthMissing("environment variable " + cfg.api_key_env +
                      " is not set");
  }

  const std::string cache_id = detail::cache_key(
      cfg.model, req.system_prompt, req.user_content, req.temperature);
  const std::filesystem::path cache_file =
      cfg.cache_dir.empty()
          ? std::filesystem::path{}
          : std::filesystem::path(cfg.cache_dir) / (cache_id + ".json");
  if (!cfg.cache_dir.empty() && std::filesystem::exists(cache_file)) {
    std::ifstream in(cache_file);
    nlohmann::json j;
    in >> j;
    return j.at("response").get<std::string>();
  }

  nlohmann::json body = {
      {"model", cfg.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", req.system_prompt}},
                              {{"role", "user"}, {"content", req.user_content}}})},
      {"temperature", req.temperature},
  };
  const std::vector<std::pair<std::string, std::string>> headers = {
      {"Authorization", std::string("Bearer ") + key},
      {"Content-Type", "application/json"},
  };

  HttpResponse resp;
  int attempt = 0;
  while (true) {
    ++attempt;
    resp = transport.post("/v1/chat/completions", headers, body.dump());
    if (resp.status == 200) break;
    if (!detail::is_retryable_status(resp.status)) {
      throw TransportError("chat completion failed with status " +
                           std::to_string(resp.status));
    }
    if (attempt >= cfg.max_attempts) {
      if (resp.status == 429) {
        throw RateLimited("rate limited after " + std::to_string(attempt) +
                          " attempts");
      }
      throw TransportError("server error " + std::to_string(resp.status) +
                           " after " + std::to_string(attempt) + " attempts");
    }
    std::this_thread::sleep_for(
        std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
  }

  std::string content;
  try {
    const nlohmann::json j = nlohmann::json::parse(resp.body);
    content = j.at("choices").at(0).at("message").at("content")
                  .get<std::string>();
  } catch (const std::exception& e) {
    throw MalformedResponse(std::string("unexpected completion payload: ") +
                            e.what());
  }

  if (!cfg.cache_dir.empty()) {
    std::filesystem::create_directories(cfg.cache_dir);
    nlohmann::json entry = {
        {"request",
         {{"model", cfg.model},
          {"system", req.system_prompt},
          {"user", req.user_content},
          {"temperature", req.temperature}}},
        {"response", content},
        {"timestamp",
         std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
             .count()},
    };
    // Write-then-rename keeps concurrent readers away from partial files.
    std::random_device rd;
    const std::filesystem::path tmp =
        cache_file.string() + ".tmp" + std::to_string(rd());
    std::ofstream out(tmp);
    out << entry.dump(2) << "\n";
    out.close();
    std::filesystem::rename(tmp, cache_file);
  }
  return content;
}

/// OpenAI-compatible chat executor. LLM nodes go through http_invoke; pure
/// and decision nodes resolve locally.
class HttpExecutor : public Executor {
 public:
  HttpExecutor(HttpExecutorConfig cfg, std::shared_ptr<HttpTransport> transport)
      : cfg_(std::move(cfg)), transport_(std::move(transport)) {}

  std::string invoke(const Node& node, const NodeContext& context,
                     const std::string& input,
                     const std::string& problem_id) override {
    if (node.kind != RoutineKind::LlmQuery) {
      return run_builtin(node, context, input);
    }
    ExecutorRequest req = render_request(node, context, input, cfg_.temperature);
    req.nonce = stable_hash(node.id.str(), problem_id);
    InFlightGuard guard(*this);
    return http_invoke(cfg_, *transport_, req);
  }

  const HttpExecutorConfig& config() const { return cfg_; }

 private:
  // Bounds concurrent outbound calls without imposing an ordering.
  class InFlightGuard {
   public:
    explicit InFlightGuard(HttpExecutor& e) : e_(e) {
      const int limit = std::max(e_.cfg_.max_in_flight, 1);
      std::unique_lock<std::mutex> lock(e_.mu_);
      e_.cv_.wait(lock, [&] { return e_.in_flight_ < limit; });
      ++e_.in_flight_;
    }
    ~InFlightGuard() {
      {
        std::lock_guard<std::mutex> lock(e_.mu_);
        --e_.in_flight_;
      }
      e_.cv_.notify_one();
    }

   private:
    HttpExecutor& e_;
  };

  HttpExecutorConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

}  // namespace swarmgraph
