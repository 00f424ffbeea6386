#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "xlat/candidate.hpp"
#include "xlat/lang.hpp"

namespace xlat {

struct GenerationRequest {
  std::string prompt;
  Lang target_lang = Lang::python;
  int n = 1;
  int max_tokens = 1024;
  std::string decode = "beam";  // beam | sample
  double decode_param = 1.0;    // beam width / temperature
  std::string request_id;

  void validate() const {
    if (prompt.empty()) throw ValidationError("generation prompt is empty");
    if (n < 1) throw ValidationError("generation n must be >= 1");
    if (max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
    if (decode != "beam" && decode != "sample")
      throw ValidationError("decode must be 'beam' or 'sample'");
  }
};

inline json generation_request_to_json(const GenerationRequest& r) {
  json j;
  j["prompt"] = r.prompt;
  j["target_lang"] = to_string(r.target_lang);
  j["n"] = r.n;
  j["max_tokens"] = r.max_tokens;
  j["decode"] = r.decode;
  j["decode_param"] = r.decode_param;
  j["request_id"] = r.request_id;
  return j;
}

struct RetryPolicy {
  int max_retries = 3;
  int base_delay_ms = 200;
  double multiplier = 2.0;
  int max_delay_ms = 5000;
};

// Single-attempt client interface; failures surface as ClientError.
class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual std::vector<Candidate> generate(const GenerationRequest& req) = 0;
};

// ---------------------------------------------------------------------------
// JSON-over-HTTP client: POST <endpoint>/v1/generate with the request
// schema above; expected response is a JSON array of {text, score}.
// ---------------------------------------------------------------------------
class HttpGenerationClient : public GenerationClient {
 public:
  explicit HttpGenerationClient(std::string endpoint,
                                std::string auth_token_env = "",
                                int timeout_s = 120, int max_in_flight = 4)
      : endpoint_(std::move(endpoint)),
        auth_token_env_(std::move(auth_token_env)),
        timeout_s_(timeout_s),
        gate_(max_in_flight > 0 ? max_in_flight : 1) {}

  std::vector<Candidate> generate(const GenerationRequest& req) override {
    gate_.acquire();
    struct Release {
      std::counting_semaphore<>* g;
      ~Release() { g->release(); }
    } release{&gate_};

    httplib::Client cli(endpoint_);
    cli.set_connection_timeout(timeout_s_, 0);
    cli.set_read_timeout(timeout_s_, 0);
    httplib::Headers headers;
    if (!auth_token_env_.empty()) {
      if (const char* tok = std::getenv(auth_token_env_.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + tok);
    }
    const std::string body = generation_request_to_json(req).dump();
    httplib::Result res =
        cli.Post("/v1/generate", headers, body, "application/json");
    if (!res) {
      const auto kind = res.error() == httplib::Error::ConnectionTimeout ||
                                res.error() == httplib::Error::Read
                            ? ClientErrorKind::timeout
                            : ClientErrorKind::transport;
      throw ClientError(kind,
                        "request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200)
      throw ClientError(ClientErrorKind::http_status,
                        "service returned status " +
                            std::to_string(res->status),
                        res->status);
    return parse_response(res->body);
  }

  static std::vector<Candidate> parse_response(const std::string& body) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      throw ClientError(ClientErrorKind::schema,
                        std::string("unparseable response: ") + e.what());
    }
    if (!j.is_array())
      throw ClientError(ClientErrorKind::schema, "response is not an array");
    std::vector<Candidate> out;
    int rank = 0;
    for (const json& item : j) {
      if (!item.is_object() || !item.contains("text") ||
          !item.contains("score") || !item["text"].is_string() ||
          !item["score"].is_number())
        throw ClientError(ClientErrorKind::schema,
                          "candidate item missing text/score");
      Candidate c;
      c.rank = rank++;
      c.text = item["text"].get<std::string>();
      c.score = item["score"].get<double>();
      out.push_back(std::move(c));
    }
    return out;
  }

 private:
  std::string endpoint_;
  std::string auth_token_env_;
  int timeout_s_;
  std::counting_semaphore<> gate_;
};

// Scripted client for tests and offline runs.
class StubGenerationClient : public GenerationClient {
 public:
  using Handler = std::function<std::vector<Candidate>(const GenerationRequest&)>;
  explicit StubGenerationClient(Handler h) : handler_(std::move(h)) {}

  std::vector<Candidate> generate(const GenerationRequest& req) override {
    calls_.fetch_add(1);
    return handler_(req);
  }
  int calls() const { return calls_.load(); }

 private:
  Handler handler_;
  std::atomic<int> calls_{0};
};

inline bool is_transient(const ClientError& e) {
  switch (e.kind) {
    case ClientErrorKind::timeout:
    case ClientErrorKind::transport:
      return true;
    case ClientErrorKind::http_status:
      return e.status >= 500;
    case ClientErrorKind::schema:
      return false;
  }
  return false;
}

struct RequestStats {
  int attempts = 0;
  int dropped_empty = 0;
};

// Retrying wrapper: transient failures back off exponentially; terminal
// failures propagate at once. Successful responses are re-ranked by score
// (descending, stable) and empty-text candidates are dropped.
inline std::vector<Candidate> request_candidates(GenerationClient& client,
                                                 const GenerationRequest& req,
                                                 const RetryPolicy& policy,
                                                 RequestStats* stats = nullptr) {
  req.validate();
  RequestStats local;
  RequestStats& st = stats ? *stats : local;
  std::vector<Candidate> raw;
  double delay = policy.base_delay_ms;
  for (int attempt = 0;; ++attempt) {
    ++st.attempts;
    try {
      raw = client.generate(req);
      break;
    } catch (const ClientError& e) {
      if (!is_transient(e) || attempt >= policy.max_retries) throw;
      if (delay > 0)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(static_cast<int>(
                std::min<double>(delay, policy.max_delay_ms))));
      delay *= policy.multiplier;
    }
  }

  std::vector<Candidate> out;
  for (Candidate& c : raw) {
    if (c.text.empty()) {
      ++st.dropped_empty;
      continue;
    }
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.score > b.score;
                   });
  if (static_cast<int>(out.size()) > req.n) out.resize(req.n);
  for (size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i);
  return out;
}

}  // namespace xlat
