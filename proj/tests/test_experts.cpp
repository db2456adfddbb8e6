#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "fsel/experts.hpp"
#include "fsel/http_expert.hpp"

namespace fsel {
namespace {

DatasetSchema movielens() {
  DatasetSchema s;
  s.task_description = "Predict whether a user will rate a movie above 3 stars.";
  s.dataset_description = "MovieLens-1M: one million ratings from 6040 users on 3706 movies.";
  s.fields = {
      {"user_id", "Unique identifier of the user.", Dtype::integer, "1", 6040, FieldRole::user},
      {"gender", "Gender of the user.", Dtype::string, "F", 2, FieldRole::user},
      {"age", "Age bucket of the user.", Dtype::integer, "25", 7, FieldRole::user},
      {"occupation", "Occupation code of the user.", Dtype::integer, "10", 21, FieldRole::user},
      {"zip", "Zip code of the user.", Dtype::string, "48067", 3439, FieldRole::user},
      {"movie_id", "Unique identifier of the movie.", Dtype::integer, "1193", 3706, FieldRole::item},
      {"title", "Title of the movie with its release year.", Dtype::string, "Toy Story (1995)", 3706, FieldRole::item},
      {"genres", "Pipe-separated genres of the movie.", Dtype::string, "Drama", 301, FieldRole::item},
      {"timestamp", "Time of the rating in seconds since the epoch.", Dtype::integer, "978300760", 458455, FieldRole::interaction},
  };
  s.label_name = "rating";
  s.label_threshold = 3.0;
  s.seed_features = {"user_id", "movie_id"};
  return s;
}

const std::vector<std::string> kPreference{"genres", "age", "gender", "timestamp", "occupation", "zip", "title"};

std::string chat_body(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

/// Fake endpoint: answers each prompt with the first preferred candidate, like a cooperative model.
struct FakeEndpoint {
  std::vector<std::string> preference = kPreference;
  std::atomic<int> calls{0};
  std::vector<int> scripted_status;  // consumed first, one per call

  HttpTransport transport() {
    return [this](const std::string&, const std::string& body, const std::string&, double) {
      const int n = calls++;
      if (static_cast<std::size_t>(n) < scripted_status.size() && scripted_status[static_cast<std::size_t>(n)] != 200) {
        return HttpResponse{scripted_status[static_cast<std::size_t>(n)], "{}"};
      }
      const auto prompt = nlohmann::json::parse(body).at("messages").at(0).at("content").get<std::string>();
      ScriptedExpert s("inner", preference);
      return HttpResponse{200, chat_body(s.complete(prompt))};
    };
  }
};

HttpExpertConfig quick() {
  HttpExpertConfig c;
  c.retry_backoff_seconds = 0.0;
  c.api_key_env = "";
  return c;
}

TEST(Prompt, BlocksAppearInOrder) {
  const auto p = render_prompt(movielens(), IterationState::initial(movielens()));
  const auto a = p.find("[Instructions]");
  const auto b = p.find("[Descriptions]");
  const auto c = p.find("[Feature sets]");
  const auto d = p.find("[Supplementary information]");
  const auto e = p.find("[Output formatting]");
  ASSERT_NE(a, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_LT(c, d);
  EXPECT_LT(d, e);
  EXPECT_NE(p.find("Predict whether a user will rate a movie"), std::string::npos);
  EXPECT_NE(p.find("MovieLens-1M"), std::string::npos);
  // every attribute of a field is shown
  EXPECT_NE(p.find("Toy Story (1995)"), std::string::npos);
  EXPECT_NE(p.find("3439"), std::string::npos);
}

TEST(Prompt, SeedsSelectedAndSevenCandidates) {
  const auto schema = movielens();
  const auto state = IterationState::initial(schema);
  EXPECT_EQ(state.selected, (std::vector<std::string>{"user_id", "movie_id"}));
  const auto p = render_prompt(schema, state);
  EXPECT_EQ(prompt_candidates(p), (std::vector<std::string>{"gender", "age", "occupation", "zip", "title", "genres", "timestamp"}));
  const auto sel = p.find("Features already selected:");
  const auto cand = p.find("Candidate features:");
  EXPECT_LT(p.find("- user_id", sel), cand);
  EXPECT_LT(p.find("- movie_id", sel), cand);
  EXPECT_EQ(render_prompt(schema, state), p);
}

TEST(Prompt, Errors) {
  auto schema = movielens();
  schema.fields[3].description = "";
  EXPECT_THROW(render_prompt(schema, IterationState::initial(schema)), Error);
  IterationState done;
  EXPECT_THROW(render_prompt(movielens(), done), Error);
}

TEST(ParseResponse, NormalizationExamples) {
  const std::vector<std::string> cands{"gender", "genres", "title"};
  EXPECT_EQ(parse_response("Looking at the features...\nanalysis\ngenres", cands), "genres");
  EXPECT_EQ(parse_response("My choice:\n `Genres`.", cands), "genres");
  EXPECT_EQ(parse_response("**title**\n\n  ", cands), "title");
  try {
    parse_response("movie_id", cands);
    FAIL();
  } catch (const ParseFailure& e) {
    EXPECT_EQ(e.raw_line(), "movie_id");
    EXPECT_EQ(e.kind(), ErrorKind::protocol);
  }
  EXPECT_THROW(parse_response("", cands), ParseFailure);
}

TEST(RunIteration, ScriptedOrderAfterSeeds) {
  DatasetSchema s;
  s.task_description = "t";
  s.dataset_description = "d";
  for (const char* n : {"seed1", "a", "seed2", "b", "c"}) s.fields.push_back({n, "field", Dtype::string, "x", 3, FieldRole::interaction});
  s.fields[0].role = FieldRole::user;
  s.fields[2].role = FieldRole::item;
  s.label_name = "y";
  s.seed_features = {"seed1", "seed2"};
  ScriptedExpert e("e", {"a", "b", "c"});
  EXPECT_EQ(run_iteration(e, s), (std::vector<std::string>{"seed1", "seed2", "a", "b", "c"}));
  EXPECT_EQ(e.calls(), 3u);
  ScriptedExpert bad("bad", {"a", "b"});
  try {
    run_iteration(bad, s);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::config);
  }
}

TEST(RunIteration, OneCallPerNonSeedField) {
  FakeEndpoint fake;
  HttpExpert e("m", quick(), fake.transport());
  const auto row = run_iteration(e, movielens());
  EXPECT_EQ(fake.calls.load(), 7);
  EXPECT_EQ(row, (std::vector<std::string>{"user_id", "movie_id", "genres", "age", "gender", "timestamp", "occupation", "zip", "title"}));
}

TEST(RunIteration, RetriesUnparseableAnswersThenFails) {
  int calls = 0;
  const HttpTransport junk = [&](const std::string&, const std::string&, const std::string&, double) {
    ++calls;
    return HttpResponse{200, chat_body("I cannot decide.")};
  };
  HttpExpert e("junk", quick(), junk);
  try {
    run_iteration(e, movielens());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::protocol);
    EXPECT_NE(std::string(err.what()).find("expert 'junk' step 0"), std::string::npos) << err.what();
  }
  EXPECT_EQ(calls, 1 + static_cast<int>(kParseRetries));

  int n = 0;
  const HttpTransport flaky = [&](const std::string&, const std::string& body, const std::string&, double) {
    if (n++ == 0) return HttpResponse{200, chat_body("hmm")};
    const auto prompt = nlohmann::json::parse(body).at("messages").at(0).at("content").get<std::string>();
    return HttpResponse{200, chat_body(prompt_candidates(prompt).back())};
  };
  HttpExpert ok("flaky", quick(), flaky);
  EXPECT_EQ(run_iteration(ok, movielens()).size(), 9u);
}

TEST(HttpExpert, RetriesServerErrorsButNotClientErrors) {
  FakeEndpoint fake;
  fake.scripted_status = {503, 429};
  HttpExpert e("m", quick(), fake.transport());
  EXPECT_EQ(run_iteration(e, movielens()).size(), 9u);
  EXPECT_EQ(fake.calls.load(), 9);

  FakeEndpoint denied;
  denied.scripted_status = {401};
  HttpExpert d("m", quick(), denied.transport());
  try {
    run_iteration(d, movielens());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::protocol);
  }

  const HttpTransport down = [](const std::string&, const std::string&, const std::string&, double) -> HttpResponse {
    fail(ErrorKind::transport, "connection refused");
  };
  HttpExpert t("m", quick(), down);
  try {
    run_iteration(t, movielens());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::transport);
  }
  EXPECT_EQ(t.calls(), 4u);
}

TEST(HttpExpert, RequestShape) {
  HttpExpertConfig c = quick();
  c.model = "gpt-4o";
  HttpExpert e("id", c);
  const auto j = nlohmann::json::parse(e.request_body("hello"));
  EXPECT_EQ(j.at("model"), "gpt-4o");
  EXPECT_EQ(j.at("temperature"), 0);
  EXPECT_EQ(j.at("messages").at(0).at("content"), "hello");
  EXPECT_THROW(HttpExpert::extract_content("{\"choices\": []}"), Error);
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() / ("fsel_experts_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

TEST(ResponseCache, WarmCacheMakesNoCalls) {
  TempDir dir;
  const auto file = (dir.path() / "cache.jsonl").string();
  FakeEndpoint fake;
  std::vector<std::string> first;
  {
    ResponseCache cache(file);
    HttpExpert e("m", quick(), fake.transport());
    first = run_iteration(e, movielens(), &cache);
  }
  EXPECT_EQ(fake.calls.load(), 7);
  FakeEndpoint second;
  ResponseCache cache(file);
  HttpExpert e("m", quick(), second.transport());
  EXPECT_EQ(run_iteration(e, movielens(), &cache), first);
  EXPECT_EQ(second.calls.load(), 0);
  EXPECT_EQ(e.calls(), 0u);

  // A different identity does not hit another expert's records.
  HttpExpert other("n", quick(), second.transport());
  run_iteration(other, movielens(), &cache);
  EXPECT_EQ(second.calls.load(), 7);
}

TEST(ResponseCache, CorruptFileIsAnInputError) {
  TempDir dir;
  const auto file = dir.path() / "cache.jsonl";
  std::ofstream(file) << "{not json\n";
  try {
    ResponseCache cache(file.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
  }
}

TEST(HttpExpert, TalksToALocalServer) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    EXPECT_EQ(req.get_header_value("Authorization"), "Bearer test-key");
    const auto prompt = nlohmann::json::parse(req.body).at("messages").at(0).at("content").get<std::string>();
    ScriptedExpert s("inner", kPreference);
    res.set_content(chat_body(s.complete(prompt)), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("FSEL_TEST_KEY", "test-key", 1);
  HttpExpertConfig c = quick();
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  c.api_key_env = "FSEL_TEST_KEY";
  c.timeout_seconds = 10.0;
  HttpExpert e("local", c);
  const auto row = run_iteration(e, movielens());
  server.stop();
  th.join();
  EXPECT_EQ(hits.load(), 7);
  EXPECT_EQ(row.back(), "title");
}

std::vector<std::unique_ptr<ScriptedExpert>> three_experts() {
  std::vector<std::unique_ptr<ScriptedExpert>> out;
  out.push_back(std::make_unique<ScriptedExpert>("a", kPreference));
  out.push_back(std::make_unique<ScriptedExpert>("b", reversed_order(kPreference)));
  out.push_back(std::make_unique<ScriptedExpert>("c", perturb_order(kPreference, 0.5, 1)));
  return out;
}

TEST(Collect, OneRowPerExpert) {
  const auto experts = three_experts();
  std::vector<Expert*> ptrs{experts[0].get(), experts[1].get(), experts[2].get()};
  const auto schema = movielens();
  const auto s = collect(ptrs, schema, nullptr, true);
  ASSERT_EQ(s.num_experts(), 3u);
  EXPECT_NO_THROW(validate_selection(s, schema.field_names()));
  EXPECT_EQ(s.rows[1].back(), "genres");
  const auto serial = collect(ptrs, schema, nullptr, false);
  EXPECT_EQ(serial.rows, s.rows);

  std::vector<Expert*> one{experts[0].get()};
  EXPECT_EQ(collect(one, schema).num_experts(), 1u);
  std::vector<Expert*> dup{experts[0].get(), experts[0].get()};
  try {
    collect(dup, schema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(Collect, AnyFailureFailsTheWhole) {
  auto experts = three_experts();
  const HttpTransport junk = [](const std::string&, const std::string&, const std::string&, double) {
    return HttpResponse{200, chat_body("no idea")};
  };
  HttpExpert broken("broken", quick(), junk);
  std::vector<Expert*> ptrs{experts[0].get(), &broken};
  EXPECT_THROW(collect(ptrs, movielens(), nullptr, true), Error);
}

TEST(OneShot, ScriptedAndParsedOrders) {
  const auto schema = movielens();
  ScriptedExpert e("e", kPreference);
  const auto row = run_one_shot(e, schema);
  EXPECT_EQ(e.calls(), 1u);
  EXPECT_EQ(row, (std::vector<std::string>{"user_id", "movie_id", "genres", "age", "gender", "timestamp", "occupation", "zip", "title"}));

  const auto state = IterationState::initial(schema);
  std::string reversed_text = "Here is my ranking:\n";
  for (auto it = state.candidates.rbegin(); it != state.candidates.rend(); ++it) reversed_text += "1. " + *it + "\n";
  EXPECT_EQ(parse_one_shot_response(reversed_text, state.candidates, state.selected),
            std::vector<std::string>(state.candidates.rbegin(), state.candidates.rend()));

  try {
    parse_one_shot_response("genres\nage\ngender\noccupation\ntimestamp\nzip\n", state.candidates, state.selected);
    FAIL();
  } catch (const ParseFailure& err) {
    EXPECT_NE(std::string(err.what()).find("title"), std::string::npos);
  }
  EXPECT_THROW(parse_one_shot_response("user_id\n" + reversed_text, state.candidates, state.selected), ParseFailure);
  EXPECT_THROW(parse_one_shot_response("genres\n" + reversed_text, state.candidates, state.selected), ParseFailure);
}

TEST(OneShot, HttpOmissionIsAProtocolError) {
  const HttpTransport partial = [](const std::string&, const std::string&, const std::string&, double) {
    return HttpResponse{200, chat_body("genres\nage\n")};
  };
  HttpExpert e("p", quick(), partial, ExpertKind::one_shot_http);
  try {
    run_one_shot(e, movielens());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::protocol);
  }
}

TEST(PerturbOrder, ShufflesTheRequestedShare) {
  std::vector<std::string> order;
  for (int i = 0; i < 20; ++i) order.push_back("f" + std::to_string(i));
  const auto p = perturb_order(order, 0.3, 5);
  EXPECT_EQ(std::multiset<std::string>(p.begin(), p.end()), std::multiset<std::string>(order.begin(), order.end()));
  std::size_t moved = 0;
  for (std::size_t i = 0; i < order.size(); ++i) moved += p[i] != order[i] ? 1 : 0;
  EXPECT_LE(moved, 6u);
  EXPECT_EQ(perturb_order(order, 0.0, 5), order);
  EXPECT_EQ(perturb_order(order, 0.3, 5), p);
}

}  // namespace
}  // namespace fsel
