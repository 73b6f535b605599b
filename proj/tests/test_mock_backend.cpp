#include <doctest.h>

#include <thread>

#include "test_util.hpp"
#include "thor/mock_backend.hpp"

using namespace thor;
using thor::testing::error_code_of;
using thor::testing::TempDir;

namespace {

GenerationRequest request_for(std::string id, int step, int n) {
  GenerationRequest r;
  r.prompt.text = "prompt";
  r.n = n;
  r.tag = RequestTag{std::move(id), step};
  return r;
}

}  // namespace

TEST_CASE("single scripted reply") {
  MockBackend mock(MockBackend::parse_script(R"({"id":"ex0","step":0,"replies":["positive"]})"));
  auto out = mock.generate(request_for("ex0", 0, 1));
  REQUIRE(out.size() == 1);
  CHECK(out[0] == Candidate{"positive", 0.0});
}

TEST_CASE("scripted replies come back in script order with their scores") {
  MockBackend mock(MockBackend::parse_script(
      R"({"id":"ex1","step":3,"replies":["  positive ","negative","neutral\n"],"scores":[-0.5,-1.25,-2]})"));
  auto out = mock.generate(request_for("ex1", 3, 3));
  CHECK(out == std::vector<Candidate>{{"positive", -0.5}, {"negative", -1.25}, {"neutral", -2.0}});
}

TEST_CASE("fixture keyed by instance and step") {
  TempDir dir;
  auto path = dir.write("f.jsonl",
                        "{\"id\":\"ex1\",\"step\":1,\"replies\":[\"The aspect is taste.\"]}\n"
                        "{\"id\":\"ex1\",\"step\":2,\"replies\":[\"The opinion is good.\"]}\n");
  MockBackend mock(MockBackend::load_script(path));
  CHECK(mock.generate(request_for("ex1", 2, 1))[0].text == "The opinion is good.");
  CHECK(mock.generate(request_for("ex1", 1, 1))[0].text == "The aspect is taste.");
  CHECK(mock.remaining() == 0);
}

TEST_CASE("exhausted and unknown keys fail loudly") {
  MockBackend mock(MockBackend::parse_script(R"({"id":"a","step":1,"replies":["x","y"]})"));
  CHECK(error_code_of([&] { mock.generate(request_for("a", 1, 3)); }) == Errc::ScriptExhausted);
  mock.generate(request_for("a", 1, 2));
  CHECK(error_code_of([&] { mock.generate(request_for("a", 1, 1)); }) == Errc::ScriptExhausted);
  CHECK(error_code_of([&] { mock.generate(request_for("b", 1, 1)); }) == Errc::ScriptExhausted);
}

TEST_CASE("bad fixtures") {
  auto code = [](std::string text) { return error_code_of([&] { MockBackend::parse_script(text); }); };
  CHECK(code("") == Errc::BadFixture);
  CHECK(code("\n  \n") == Errc::BadFixture);
  CHECK(code("{\"id\":\"a\",\"step\":1,\"replies\":[\"x\"]}\n{\"id\":\"a\",\"step\":1,\"replies\":[\"y\"]}") ==
        Errc::BadFixture);
  CHECK(code(R"({"id":"a","step":1,"replies":["x"],"scores":[1,2]})") == Errc::BadFixture);
  CHECK(code(R"({"id":"a","step":1,"replies":[]})") == Errc::BadFixture);
  CHECK(code(R"({"id":"a","step":"1","replies":["x"]})") == Errc::BadFixture);
  CHECK(code(R"({"id":"a","step":1,"replies":["x"],"extra":true})") == Errc::BadFixture);
  CHECK(code(R"({"id":"a","step":1,"error":"boom"})") == Errc::BadFixture);
  CHECK(code(R"({"id":"a","step":1,"replies":["x"])") == Errc::BadFixture);
  CHECK(error_code_of([] { MockBackend::load_script("/nonexistent/fixture.jsonl"); }) == Errc::BadFixture);

  try {
    MockBackend::parse_script("{\"id\":\"a\",\"step\":1,\"replies\":[\"x\"]}\n{\"id\":1}");
    FAIL("expected BadFixture");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("request preconditions") {
  MockBackend mock(MockBackend::parse_script(R"({"id":"a","step":1,"replies":["x","y"]})"));
  CHECK(error_code_of([&] { mock.generate(request_for("a", 1, 0)); }) == Errc::PreconditionViolation);
  auto greedy = request_for("a", 1, 2);
  greedy.temperature = 0.0;
  CHECK(error_code_of([&] { mock.generate(greedy); }) == Errc::PreconditionViolation);
  greedy.n = 1;
  CHECK(mock.generate(greedy)[0].text == "x");
  auto negative = request_for("a", 1, 1);
  negative.temperature = -0.1;
  CHECK(error_code_of([&] { mock.generate(negative); }) == Errc::PreconditionViolation);
}

TEST_CASE("blank generations are re-asked once") {
  MockBackend mock(MockBackend::parse_script(
      R"({"id":"a","step":1,"replies":["one","  ","three","two"],"scores":[1,2,3,4]})"));
  auto out = mock.generate(request_for("a", 1, 3));
  CHECK(out == std::vector<Candidate>{{"one", 1}, {"two", 4}, {"three", 3}});

  MockBackend twice(MockBackend::parse_script(R"({"id":"a","step":1,"replies":["\n","\t"]})"));
  CHECK(error_code_of([&] { twice.generate(request_for("a", 1, 1)); }) == Errc::MalformedResponse);
}

TEST_CASE("scripted faults surface once as backend errors") {
  MockBackend mock(MockBackend::parse_script(
      "{\"id\":\"a\",\"step\":1,\"error\":\"transport\"}\n{\"id\":\"b\",\"step\":1,\"error\":\"rate_limited\"}\n"
      "{\"id\":\"c\",\"step\":1,\"error\":\"malformed\"}"));
  CHECK(error_code_of([&] { mock.generate(request_for("a", 1, 1)); }) == Errc::Transport);
  CHECK(error_code_of([&] { mock.generate(request_for("a", 1, 1)); }) == Errc::ScriptExhausted);
  CHECK(error_code_of([&] { mock.generate(request_for("b", 1, 1)); }) == Errc::RateLimited);
  CHECK(error_code_of([&] { mock.generate(request_for("c", 1, 1)); }) == Errc::MalformedResponse);
}

TEST_CASE("identical fixture and request sequence give identical streams") {
  const std::string fixture =
      R"({"id":"a","step":1,"replies":["p","q","r","s"],"scores":[0.1,0.2,0.3,0.4]})" "\n"
      R"({"id":"b","step":2,"replies":["u","v"]})";
  auto run = [&] {
    MockBackend mock(MockBackend::parse_script(fixture));
    std::vector<Candidate> all;
    for (auto [id, step, n] : {std::tuple{"a", 1, 2}, {"b", 2, 1}, {"a", 1, 2}, {"b", 2, 1}}) {
      auto out = mock.generate(request_for(id, step, n));
      all.insert(all.end(), out.begin(), out.end());
    }
    return all;
  };
  CHECK(run() == run());
}

TEST_CASE("mock is safe under concurrent callers") {
  std::string fixture;
  for (int i = 0; i < 64; ++i) {
    fixture += "{\"id\":\"i" + std::to_string(i) + "\",\"step\":1,\"replies\":[\"r" + std::to_string(i) + "\"]}\n";
  }
  MockBackend mock(MockBackend::parse_script(fixture), 4);
  std::vector<std::string> got(64);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        for (int i = t; i < 64; i += 8) got[i] = mock.generate(request_for("i" + std::to_string(i), 1, 1))[0].text;
      });
    }
  }
  for (int i = 0; i < 64; ++i) CHECK(got[i] == "r" + std::to_string(i));
  CHECK(mock.peak_in_flight() <= 4);
  CHECK(mock.remaining() == 0);
}
