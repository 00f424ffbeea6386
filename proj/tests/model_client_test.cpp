#include "xlat/model_client.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace xlat {
namespace {

GenerationRequest basic_req() {
  GenerationRequest r;
  r.prompt = "Translate this.";
  r.target_lang = Lang::python;
  r.n = 3;
  r.request_id = "ex1";
  return r;
}

RetryPolicy fast_policy() {
  RetryPolicy p;
  p.base_delay_ms = 0;  // tests never sleep
  return p;
}

TEST(GenerationRequest, Validation) {
  GenerationRequest r = basic_req();
  EXPECT_NO_THROW(r.validate());
  r.prompt = "";
  EXPECT_THROW(r.validate(), ValidationError);
  r = basic_req();
  r.n = 0;
  EXPECT_THROW(r.validate(), ValidationError);
  r = basic_req();
  r.decode = "greedy";
  EXPECT_THROW(r.validate(), ValidationError);
  r = basic_req();
  r.max_tokens = 0;
  EXPECT_THROW(r.validate(), ValidationError);
}

TEST(GenerationRequest, JsonFields) {
  GenerationRequest r = basic_req();
  r.decode = "sample";
  r.decode_param = 0.8;
  const json j = generation_request_to_json(r);
  EXPECT_EQ(j["prompt"], "Translate this.");
  EXPECT_EQ(j["target_lang"], "python");
  EXPECT_EQ(j["n"], 3);
  EXPECT_EQ(j["max_tokens"], 1024);
  EXPECT_EQ(j["decode"], "sample");
  EXPECT_DOUBLE_EQ(j["decode_param"].get<double>(), 0.8);
  EXPECT_EQ(j["request_id"], "ex1");
}

TEST(ParseResponse, WellFormed) {
  const auto cands = HttpGenerationClient::parse_response(
      R"([{"text":"def a(): pass","score":-0.5},{"text":"def b(): pass","score":-1.25}])");
  ASSERT_EQ(cands.size(), 2u);
  EXPECT_EQ(cands[0].rank, 0);
  EXPECT_EQ(cands[0].text, "def a(): pass");
  EXPECT_DOUBLE_EQ(cands[0].score, -0.5);
  EXPECT_EQ(cands[1].rank, 1);
}

TEST(ParseResponse, EmptyArrayIsEmpty) {
  EXPECT_TRUE(HttpGenerationClient::parse_response("[]").empty());
}

TEST(ParseResponse, SchemaErrors) {
  for (const char* bad : {
           "not json at all",
           R"({"text":"x","score":1})",          // object, not array
           R"([{"text":"x"}])",                  // missing score
           R"([{"score":1}])",                   // missing text
           R"([{"text":42,"score":1}])",         // text not a string
           R"([{"text":"x","score":"high"}])",   // score not a number
       }) {
    try {
      HttpGenerationClient::parse_response(bad);
      FAIL() << "expected schema error for: " << bad;
    } catch (const ClientError& e) {
      EXPECT_EQ(e.kind, ClientErrorKind::schema) << bad;
    }
  }
}

TEST(IsTransient, Classification) {
  EXPECT_TRUE(is_transient(ClientError(ClientErrorKind::timeout, "t")));
  EXPECT_TRUE(is_transient(ClientError(ClientErrorKind::transport, "t")));
  EXPECT_TRUE(is_transient(ClientError(ClientErrorKind::http_status, "t", 503)));
  EXPECT_FALSE(is_transient(ClientError(ClientErrorKind::http_status, "t", 404)));
  EXPECT_FALSE(is_transient(ClientError(ClientErrorKind::schema, "t")));
}

TEST(RequestCandidates, SortsFiltersAndTruncates) {
  StubGenerationClient stub([](const GenerationRequest&) {
    return std::vector<Candidate>{
        {0, -2.0, "low"},
        {1, -0.1, ""},      // dropped: empty text
        {2, -0.5, "mid"},
        {3, -0.05, "best"},
        {4, -1.0, "offcut"},
    };
  });
  GenerationRequest req = basic_req();
  req.n = 3;
  RequestStats stats;
  const auto out = request_candidates(stub, req, fast_policy(), &stats);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].text, "best");
  EXPECT_EQ(out[1].text, "mid");
  EXPECT_EQ(out[2].text, "offcut");
  EXPECT_EQ(out[0].rank, 0);
  EXPECT_EQ(out[1].rank, 1);
  EXPECT_EQ(out[2].rank, 2);
  EXPECT_EQ(stats.attempts, 1);
  EXPECT_EQ(stats.dropped_empty, 1);
  EXPECT_EQ(stub.calls(), 1);
}

TEST(RequestCandidates, StableOrderForEqualScores) {
  StubGenerationClient stub([](const GenerationRequest&) {
    return std::vector<Candidate>{{0, -1.0, "first"}, {1, -1.0, "second"},
                                  {2, -1.0, "third"}};
  });
  const auto out = request_candidates(stub, basic_req(), fast_policy());
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].text, "first");
  EXPECT_EQ(out[1].text, "second");
  EXPECT_EQ(out[2].text, "third");
}

TEST(RequestCandidates, RetriesTransientThenSucceeds) {
  int failures = 2;
  StubGenerationClient stub([&](const GenerationRequest&) {
    if (failures-- > 0)
      throw ClientError(ClientErrorKind::timeout, "slow upstream");
    return std::vector<Candidate>{{0, 0.0, "ok"}};
  });
  RequestStats stats;
  const auto out = request_candidates(stub, basic_req(), fast_policy(), &stats);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(stats.attempts, 3);
}

TEST(RequestCandidates, GivesUpAfterMaxRetries) {
  StubGenerationClient stub([](const GenerationRequest&) -> std::vector<Candidate> {
    throw ClientError(ClientErrorKind::http_status, "unavailable", 503);
  });
  RetryPolicy policy = fast_policy();
  policy.max_retries = 2;
  RequestStats stats;
  EXPECT_THROW(request_candidates(stub, basic_req(), policy, &stats),
               ClientError);
  EXPECT_EQ(stats.attempts, 3);  // initial try + 2 retries
}

TEST(RequestCandidates, TerminalErrorIsImmediate) {
  StubGenerationClient stub([](const GenerationRequest&) -> std::vector<Candidate> {
    throw ClientError(ClientErrorKind::http_status, "bad request", 400);
  });
  RequestStats stats;
  EXPECT_THROW(request_candidates(stub, basic_req(), fast_policy(), &stats),
               ClientError);
  EXPECT_EQ(stats.attempts, 1);
  EXPECT_EQ(stub.calls(), 1);
}

TEST(RequestCandidates, InvalidRequestNeverReachesClient) {
  StubGenerationClient stub([](const GenerationRequest&) {
    return std::vector<Candidate>{};
  });
  GenerationRequest req = basic_req();
  req.prompt = "";
  EXPECT_THROW(request_candidates(stub, req, fast_policy()), ValidationError);
  EXPECT_EQ(stub.calls(), 0);
}

// ---------------------------------------------------------------------------
// Wire-level tests against a local HTTP server.
// ---------------------------------------------------------------------------
class HttpWireTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/generate",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   last_body_ = req.body;
                   last_auth_ = req.get_header_value("Authorization");
                   res.status = status_;
                   res.set_content(response_body_, "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int status_ = 200;
  std::string response_body_ = R"([{"text":"pass","score":-0.2}])";
  std::string last_body_;
  std::string last_auth_;
};

TEST_F(HttpWireTest, PostsRequestJsonAndParsesResponse) {
  HttpGenerationClient client(endpoint());
  const auto out = client.generate(basic_req());
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].text, "pass");

  const json seen = json::parse(last_body_);
  EXPECT_EQ(seen["prompt"], "Translate this.");
  EXPECT_EQ(seen["n"], 3);
  EXPECT_EQ(seen["target_lang"], "python");
  EXPECT_EQ(last_auth_, "");
}

TEST_F(HttpWireTest, SendsBearerTokenFromEnv) {
  ::setenv("XLAT_TEST_TOKEN", "sekrit", 1);
  HttpGenerationClient client(endpoint(), "XLAT_TEST_TOKEN");
  client.generate(basic_req());
  EXPECT_EQ(last_auth_, "Bearer sekrit");
  ::unsetenv("XLAT_TEST_TOKEN");
}

TEST_F(HttpWireTest, NonOkStatusRaisesHttpError) {
  status_ = 503;
  HttpGenerationClient client(endpoint());
  try {
    client.generate(basic_req());
    FAIL() << "must throw";
  } catch (const ClientError& e) {
    EXPECT_EQ(e.kind, ClientErrorKind::http_status);
    EXPECT_EQ(e.status, 503);
    EXPECT_TRUE(is_transient(e));
  }
}

TEST_F(HttpWireTest, MalformedBodyRaisesSchemaError) {
  response_body_ = "oops";
  HttpGenerationClient client(endpoint());
  try {
    client.generate(basic_req());
    FAIL() << "must throw";
  } catch (const ClientError& e) {
    EXPECT_EQ(e.kind, ClientErrorKind::schema);
  }
}

TEST(HttpClient, UnreachableEndpointIsTransportError) {
  // reserved TEST-NET address, nothing listens there
  HttpGenerationClient client("http://127.0.0.1:1", "", 2);
  try {
    client.generate(basic_req());
    FAIL() << "must throw";
  } catch (const ClientError& e) {
    EXPECT_TRUE(e.kind == ClientErrorKind::transport ||
                e.kind == ClientErrorKind::timeout);
    EXPECT_TRUE(is_transient(e));
  }
}

}  // namespace
}  // namespace xlat
