#include <doctest.h>

#include "chain_checks.hpp"
#include "test_util.hpp"
#include "thor/chain.hpp"
#include "thor/dataset.hpp"
#include "thor/mock_backend.hpp"

using namespace thor;
using thor::testing::chain_violation;
using thor::testing::data_file;
using thor::testing::error_code_of;

namespace {

Instance salmon() {
  return Instance{"ex1", "Try the tandoori salmon!", "the tandoori salmon", Polarity::positive, true};
}

ChainConfig single_sample(Mode mode) {
  ChainConfig c;
  c.mode = mode;
  c.voting = VotingConfig{1, 1};
  return c;
}

std::vector<ScriptEntry> corpus_script() { return MockBackend::load_script(data_file("mock_script.jsonl")); }

Dataset corpus() { return load_dataset(data_file("mock_dataset.jsonl")); }

ChainConfig corpus_config(Mode mode) {
  ChainConfig c;
  c.mode = mode;
  c.voting = VotingConfig::with_samples(3);
  c.decoding.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("three-hop chain on the salmon example") {
  MockBackend mock(MockBackend::parse_script(
      R"({"id":"ex1","step":1,"replies":["The aspect is taste."]})" "\n"
      R"({"id":"ex1","step":2,"replies":["The implicit opinion is good and worth trying."]})" "\n"
      R"({"id":"ex1","step":3,"replies":["The polarity is positive."]})"));
  ChainTrace t = run_chain(salmon(), mock, single_sample(Mode::thor));

  CHECK(t.prediction == Polarity::positive);
  CHECK(t.flags.empty());
  REQUIRE(t.hops.size() == 3);
  const std::string c1 = "Given the sentence \"Try the tandoori salmon!\"";
  const std::string c2 = c1 + " The aspect is taste.";
  const std::string c3 = c2 + " The implicit opinion is good and worth trying.";
  CHECK(t.hops[0].context_after.text == c2);
  CHECK(t.hops[1].context_after.text == c3);
  CHECK(t.hops[2].context_after.text == c3 + " The polarity is positive.");
  CHECK(t.hops[2].prompt.text == c3 + ". Based on the opinion, what is the sentiment polarity towards the tandoori salmon?");
  CHECK(t.hops[2].prompt.text.find("The aspect is taste.") != std::string::npos);
  CHECK(t.hops[2].prompt.text.find("The implicit opinion is good and worth trying.") != std::string::npos);
  CHECK_FALSE(chain_violation(t));
  CHECK(mock.remaining() == 0);
}

TEST_CASE("vanilla mode is a single hop") {
  MockBackend mock(MockBackend::parse_script(R"({"id":"ex1","step":0,"replies":["neutral"]})"));
  ChainTrace t = run_chain(salmon(), mock, single_sample(Mode::vanilla));
  CHECK(t.prediction == Polarity::neutral);
  REQUIRE(t.hops.size() == 1);
  CHECK(t.hops[0].prompt.text ==
        "Given the sentence \"Try the tandoori salmon!\", what is the sentiment polarity towards the tandoori salmon?");
  CHECK_FALSE(chain_violation(t));
}

TEST_CASE("zero-shot CoT mode uses the suffixed prompt") {
  MockBackend mock(MockBackend::parse_script(
      R"({"id":"ex1","step":0,"replies":["Step by step, the diner recommends it, so positive."]})"));
  ChainTrace t = run_chain(salmon(), mock, single_sample(Mode::zerocot));
  CHECK(t.prediction == Polarity::positive);
  REQUIRE(t.hops.size() == 1);
  CHECK(t.hops[0].prompt.text.ends_with(" Let's think step by step."));
}

TEST_CASE("unparseable final answers fall back to neutral with a flag") {
  MockBackend mock(MockBackend::parse_script(
      R"({"id":"ex1","step":1,"replies":["taste","taste"]})" "\n"
      R"({"id":"ex1","step":2,"replies":["good","good"]})" "\n"
      R"({"id":"ex1","step":3,"replies":["I cannot tell.","Hard to say."],"scores":[-2,-1]})"));
  ChainConfig config = single_sample(Mode::thor);
  config.voting = VotingConfig{2, 1};
  ChainTrace t = run_chain(salmon(), mock, config);
  CHECK(t.prediction == Polarity::neutral);
  CHECK(t.flags.contains(TraceFlag::unparseable));
  CHECK(t.flags.contains(TraceFlag::low_consistency));
  CHECK(t.hops[2].selected.text == "Hard to say.");
  CHECK_FALSE(t.hops[2].consistency_flag);
}

TEST_CASE("the final hop votes over labels") {
  MockBackend mock(MockBackend::parse_script(
      R"({"id":"ex1","step":1,"replies":["taste","Taste!","price"]})" "\n"
      R"({"id":"ex1","step":2,"replies":["good","fine","nice"],"scores":[-1,-0.5,-2]})" "\n"
      R"({"id":"ex1","step":3,"replies":["negative","So: positive.","It is positive"],"scores":[-0.1,-0.9,-0.4]})"));
  ChainTrace t = run_chain(salmon(), mock, single_sample(Mode::thor) = ChainConfig{Mode::thor, VotingConfig{3, 2}, {}});
  CHECK(t.prediction == Polarity::positive);
  CHECK(t.hops[0].selected.text == "taste");
  CHECK(t.hops[0].consistency_flag);
  CHECK(t.hops[1].selected.text == "fine");  // three singletons: largest mass wins
  CHECK_FALSE(t.hops[1].consistency_flag);
  CHECK(t.hops[2].selected.text == "It is positive");
  CHECK(t.hops[2].selected_index == 2);
  CHECK(t.flags == std::set<TraceFlag>{TraceFlag::low_consistency});
}

TEST_CASE("backend failures propagate out of run_chain") {
  MockBackend mock(MockBackend::parse_script(
      R"({"id":"ex1","step":1,"replies":["taste"]})" "\n" R"({"id":"ex1","step":2,"error":"transport"})"));
  CHECK(error_code_of([&] { run_chain(salmon(), mock, single_sample(Mode::thor)); }) == Errc::Transport);
}

TEST_CASE("batch output follows dataset order at any parallelism") {
  Dataset data = corpus();
  REQUIRE(data.instances.size() == 20);
  for (Mode mode : {Mode::thor, Mode::vanilla}) {
    MockBackend serial_mock(corpus_script());
    auto serial = run_batch(data, serial_mock, corpus_config(mode), 1);
    MockBackend parallel_mock(corpus_script());
    auto parallel = run_batch(data, parallel_mock, corpus_config(mode), 8);
    REQUIRE(serial.size() == 20);
    CHECK(serial == parallel);
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].instance_id == data.instances[i].id);
      CHECK_FALSE(chain_violation(serial[i]));
    }
  }
}

TEST_CASE("thor traces on the corpus predict gold") {
  Dataset data = corpus();
  MockBackend mock(corpus_script());
  auto traces = run_batch(data, mock, corpus_config(Mode::thor), 4);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    CHECK(traces[i].prediction == data.instances[i].gold);
    CHECK_FALSE(traces[i].flags.contains(TraceFlag::unparseable));
  }
  // instances 5, 10, 15, 20 get three different aspect answers
  CHECK(traces[4].flags.contains(TraceFlag::low_consistency));
  CHECK_FALSE(traces[4].hops[0].consistency_flag);
  CHECK(traces[0].flags.empty());
}

TEST_CASE("empty dataset yields no traces") {
  MockBackend mock(corpus_script());
  CHECK(run_batch(Dataset{}, mock, corpus_config(Mode::thor), 8).empty());
}

TEST_CASE("a failing instance is recorded and the batch continues") {
  auto script = corpus_script();
  for (auto& e : script) {
    if (e.id == "ex07" && e.step == 2) {
      e.replies.clear();
      e.scores.clear();
      e.error = Errc::Transport;
    }
  }
  MockBackend mock(script);
  auto traces = run_batch(corpus(), mock, corpus_config(Mode::thor), 8);
  REQUIRE(traces.size() == 20);
  std::size_t failed = 0;
  for (const auto& t : traces) {
    if (t.failed()) {
      ++failed;
      CHECK(t.instance_id == "ex07");
      CHECK_FALSE(t.prediction);
      CHECK(t.hops.size() == 1);  // hop 1 completed before the fault
    }
  }
  CHECK(failed == 1);
}

TEST_CASE("non-backend errors abort the batch") {
  auto script = corpus_script();
  script.erase(std::remove_if(script.begin(), script.end(),
                              [](const ScriptEntry& e) { return e.id == "ex12" && e.step == 3; }),
               script.end());
  MockBackend mock(script);
  CHECK(error_code_of([&] { run_batch(corpus(), mock, corpus_config(Mode::thor), 4); }) == Errc::ScriptExhausted);
}

TEST_CASE("parallelism must respect the backend bound") {
  MockBackend mock(corpus_script(), 2);
  CHECK(error_code_of([&] { run_batch(corpus(), mock, corpus_config(Mode::thor), 3); }) == Errc::Config);
  CHECK(error_code_of([&] { run_batch(corpus(), mock, corpus_config(Mode::thor), 0); }) == Errc::Config);
}

TEST_CASE("traces are streamed to the sink in order") {
  MockBackend mock(corpus_script());
  std::vector<std::string> order;
  run_batch(corpus(), mock, corpus_config(Mode::vanilla), 8,
            [&](ChainTrace&& t) { order.push_back(t.instance_id); });
  REQUIRE(order.size() == 20);
  CHECK(order.front() == "ex01");
  CHECK(order.back() == "ex20");
  CHECK(std::is_sorted(order.begin(), order.end()));
}
