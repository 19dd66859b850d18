#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "natprog/http_service.hpp"
#include "natprog/natprog.hpp"

namespace natprog {
namespace {

using nlohmann::json;
using namespace std::chrono_literals;

// Sleeps on texts containing "slow", which keeps a solve busy long enough to
// be observed and cancelled.
class SlowEmbedder final : public Embedder {
 public:
  std::vector<double> embed(std::string_view text) const override {
    if (text.find("slow") != std::string_view::npos) std::this_thread::sleep_for(400ms);
    return inner_.embed(text);
  }

 private:
  HashingEmbedder inner_;
};

ServiceConfig manual_config() {
  ServiceConfig c;
  c.realtime = false;
  c.embedder = std::make_shared<SlowEmbedder>();
  c.rate_constant = 1000;
  c.solver_seconds = 20;
  c.progress_every = 1;
  return c;
}

SessionRequest request(Condition c, double r = 0.0, std::uint64_t seed = 0) {
  SessionRequest req;
  req.condition = c;
  req.r = r;
  req.seed = seed;
  return req;
}

// Reads events until one of type `type` arrives after `after`.
std::optional<SessionEvent> wait_for(const EventFeed& feed, const std::string& type, std::uint64_t after = 0,
                                     std::chrono::milliseconds limit = 20s) {
  auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    for (const SessionEvent& e : feed.since(after, 100ms)) {
      after = e.seq;
      if (e.type == type) return e;
    }
    if (feed.closed() && feed.since(after).empty()) break;
  }
  return std::nullopt;
}

void wait_idle(SessionManager& m, const std::string& id) {
  for (int i = 0; i < 400 && m.snapshot(id)["busy"].get<bool>(); ++i) std::this_thread::sleep_for(25ms);
  ASSERT_FALSE(m.snapshot(id)["busy"].get<bool>());
}

ServiceError::Kind error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ServiceError thrown";
  return ServiceError::Kind::bad_request;
}

// ---------------------------------------------------------------- manager

TEST(Session, CreateBuildsAGenerationContext) {
  SessionManager m(manual_config());
  std::string a = m.create(request(Condition::np));
  std::string b = m.create(request(Condition::ds));
  EXPECT_NE(a, b);
  json s = m.snapshot(a);
  EXPECT_EQ(s["id"], a);
  EXPECT_EQ(s["condition"], "NP");
  EXPECT_EQ(s["submissions"], 0);
  EXPECT_EQ(s["ended"], false);
  EXPECT_EQ(s["remaining_seconds"], 600.0);
  EXPECT_EQ(s["goals"].size(), 6u);
  EXPECT_EQ(s["inventory"].size(), kItemCount);
  for (ItemId raw : kRawMaterials) EXPECT_EQ(s["inventory"][std::string(item_name(raw))], 20);
  EXPECT_EQ(s["inventory"]["brick"], 0);
  EXPECT_TRUE(s["slots"].empty());
  EXPECT_TRUE(s["output"].is_null());
  // Same seed and generation as the simulated chains.
  ChainConfig chain;
  auto gc = make_generation(chain, 0);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(s["goals"][i]["item"], item_name(gc.context.goal.items[i]));
  EXPECT_EQ(m.snapshot(b)["goals"], s["goals"]);
}

TEST(Session, RejectsBadRequests) {
  SessionManager m(manual_config());
  EXPECT_EQ(error_kind([&] { m.create(request(Condition::np, 1.5)); }), ServiceError::Kind::bad_request);
  EXPECT_EQ(error_kind([&] { m.snapshot("s99"); }), ServiceError::Kind::not_found);
  EXPECT_EQ(error_kind([&] { parse_session_request(json{{"condition", "xy"}}); }), ServiceError::Kind::bad_request);
  EXPECT_EQ(error_kind([&] { parse_session_request(json{{"r", "high"}}); }), ServiceError::Kind::bad_request);
  SessionRequest req = request(Condition::np);
  req.library = "garbage";
  EXPECT_EQ(error_kind([&] { m.create(req); }), ServiceError::Kind::bad_request);
  std::string id = m.create(request(Condition::np));
  EXPECT_EQ(error_kind([&] { m.submit(id, json::array()); }), ServiceError::Kind::bad_request);
  EXPECT_EQ(error_kind([&] { m.submit(id, json{{"hint", "x"}, {"goal", "unobtainium"}}); }),
            ServiceError::Kind::bad_request);
}

TEST(Session, RecipesListTheActiveRules) {
  SessionManager m(manual_config());
  std::string id = m.create(request(Condition::dp, 0.5, 3));
  json rules = m.recipes(id);
  ChainConfig chain;
  chain.r = 0.5;
  chain.batch_seed = 3;
  RecipeBook book = make_generation(chain, 0).context.book;
  ASSERT_EQ(rules.size(), kCraftableCount);
  for (const json& r : rules) {
    ItemId out = *parse_item(r["output"].get<std::string>());
    RecipeRule rule = *book.active_rule(out);
    EXPECT_EQ(r["inputs"][0], item_name(rule.first));
    EXPECT_EQ(r["inputs"][1], item_name(rule.second));
    EXPECT_EQ(r["rule"], book.uses_rule_b(out) ? "B" : "A");
  }
}

TEST(Session, DpDefineExecuteAndErrors) {
  SessionManager m(manual_config());
  std::string id = m.create(request(Condition::dp));
  json d = m.submit(id, {{"define", {{"name", "make_plank"}, {"body", {"input_wood", "input_wood", "craft"}}}}});
  EXPECT_EQ(d["status"], "defined");
  EXPECT_EQ(error_kind([&] { m.submit(id, {{"define", {{"name", "make_plank"}, {"body", {"craft"}}}}}); }),
            ServiceError::Kind::duplicate_name);
  EXPECT_EQ(error_kind([&] { m.submit(id, {{"execute", "make_house"}}); }), ServiceError::Kind::unknown_name);
  EXPECT_EQ(error_kind([&] { m.submit(id, {{"define", {{"name", "p"}, {"body", {"nope"}}}}}); }),
            ServiceError::Kind::unknown_name);
  EXPECT_EQ(error_kind([&] { m.submit(id, {{"hint", "x"}}); }), ServiceError::Kind::bad_request);
  EXPECT_EQ(m.snapshot(id)["submissions"], 0);

  json r = m.submit(id, {{"execute", "make_plank"}});
  EXPECT_EQ(r["status"], "executed");
  EXPECT_EQ(r["actions"], json({"input_wood", "input_wood", "craft"}));
  EXPECT_TRUE(r["errors"].empty());
  json s = m.snapshot(id);
  EXPECT_EQ(s["inventory"]["wood_plank"], 1);
  EXPECT_EQ(s["inventory"]["wood"], 18);
  EXPECT_EQ(s["submissions"], 1);
  EXPECT_EQ(s["library_size"], 1);

  // A failing step is reported and skipped.
  m.submit(id, {{"define", {{"name", "bad"}, {"body", {"input_brick", "craft"}}}}});
  json bad = m.submit(id, {{"execute", "bad"}});
  ASSERT_EQ(bad["errors"].size(), 2u);
  EXPECT_EQ(bad["errors"][0]["action"], "input_brick");
  EXPECT_EQ(m.snapshot(id)["submissions"], 2);
}

TEST(Session, ClearReturnsSlottedItems) {
  SessionManager m(manual_config());
  std::string id = m.create(request(Condition::dp));
  m.submit(id, {{"define", {{"name", "two"}, {"body", {"input_wood", "input_wood"}}}}});
  m.submit(id, {{"execute", "two"}});
  json s = m.snapshot(id);
  EXPECT_EQ(s["slots"], json({"wood", "wood"}));
  EXPECT_EQ(s["output"], "wood_plank");
  EXPECT_EQ(m.submit(id, {{"clear", true}})["status"], "cleared");
  s = m.snapshot(id);
  EXPECT_TRUE(s["slots"].empty());
  EXPECT_EQ(s["inventory"]["wood"], 20);
}

TEST(Session, NpSolveCommitsAndReportsInOrder) {
  SessionManager m(manual_config());
  std::string id = m.create(request(Condition::np));
  auto feed = m.events(id);
  json accepted = m.submit(id, {{"hint", "please craft 'wood_plank' with 'wood' and 'wood'"}, {"goal", "wood_plank"}});
  EXPECT_EQ(accepted["status"], "accepted");
  EXPECT_EQ(accepted["budget"], 20000);
  auto result = wait_for(*feed, "result");
  ASSERT_TRUE(result);
  EXPECT_EQ(result->data["status"], "success");
  EXPECT_EQ(result->data["actions"], json({"input_wood", "input_wood", "craft"}));
  wait_idle(m, id);
  json s = m.snapshot(id);
  EXPECT_EQ(s["inventory"]["wood_plank"], 1);
  EXPECT_EQ(s["library_size"], 1);
  EXPECT_EQ(s["submissions"], 1);

  // started, then strictly rising progress, then the result and a snapshot.
  auto events = feed->since(0);
  std::size_t started = 0, last_expansions = 0;
  bool saw_result = false, snapshot_after = false;
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].seq, i + 1);
    const auto& e = events[i];
    if (e.type == "started") {
      started = e.seq;
      EXPECT_EQ(e.data["goal"], json({"wood_plank"}));
    } else if (e.type == "progress") {
      EXPECT_GT(started, 0u);
      EXPECT_FALSE(saw_result);
      std::size_t x = e.data["expansions"];
      if (last_expansions) EXPECT_GT(x, last_expansions);
      last_expansions = x;
    } else if (e.type == "result") {
      saw_result = true;
    } else if (e.type == "snapshot" && saw_result) {
      snapshot_after = true;
    }
  }
  EXPECT_TRUE(saw_result);
  EXPECT_TRUE(snapshot_after);

  json lib = m.library_view(id, "");
  ASSERT_EQ(lib.size(), kPrimitiveActionCount + 1);
  EXPECT_EQ(lib.back()["kind"], "decomposition");
  EXPECT_EQ(lib.back()["name"], "please craft 'wood_plank' with 'wood' and 'wood'");
  EXPECT_EQ(lib.back()["steps"], json({"input_wood", "input_wood", "craft"}));
}

TEST(Session, SuggestionsComeFromTheClosestHint) {
  SessionManager m(manual_config());
  std::string id = m.create(request(Condition::np));
  json none = m.submit(id, {{"hint", "please craft 'wood_plank' with 'wood' and 'wood'"}});
  EXPECT_EQ(none["status"], "suggestion");
  EXPECT_TRUE(none["goal"].is_null());
  auto feed = m.events(id);
  m.submit(id, {{"hint", "please craft 'wood_plank' with 'wood' and 'wood'"}, {"goal", {"wood_plank"}}});
  ASSERT_TRUE(wait_for(*feed, "result"));
  wait_idle(m, id);
  json sug = m.submit(id, {{"hint", "make me some wood planks"}});
  EXPECT_EQ(sug["goal"], json({"wood_plank"}));
  EXPECT_EQ(m.snapshot(id)["submissions"], 1);
}

TEST(Session, BusyCancelAndResubmit) {
  SessionManager m(manual_config());
  std::string id = m.create(request(Condition::np));
  auto feed = m.events(id);
  EXPECT_EQ(m.cancel(id)["status"], "idle");
  json before = m.snapshot(id);

  m.submit(id, {{"hint", "slow planks"}, {"goal", "wood_plank"}});
  EXPECT_TRUE(m.snapshot(id)["busy"].get<bool>());
  EXPECT_EQ(error_kind([&] { m.submit(id, {{"hint", "again"}, {"goal", "wood_plank"}}); }),
            ServiceError::Kind::solver_busy);
  EXPECT_EQ(m.cancel(id)["status"], "cancelled");
  auto result = wait_for(*feed, "result");
  ASSERT_TRUE(result);
  EXPECT_EQ(result->data["status"], "failure");
  EXPECT_EQ(result->data["reason"], "cancelled");
  json after = m.snapshot(id);
  EXPECT_FALSE(after["busy"].get<bool>());
  EXPECT_EQ(after["inventory"], before["inventory"]);
  EXPECT_EQ(after["library_size"], 0);
  EXPECT_EQ(after["submissions"], 1);

  m.submit(id, {{"hint", "please craft 'wood_plank' with 'wood' and 'wood'"}, {"goal", "wood_plank"}});
  auto second = wait_for(*feed, "result", result->seq);
  ASSERT_TRUE(second);
  EXPECT_EQ(second->data["status"], "success");
  wait_idle(m, id);
  EXPECT_EQ(m.snapshot(id)["submissions"], 2);
}

TEST(Session, DsSolveStoresProgram) {
  SessionManager m(manual_config());
  std::string id = m.create(request(Condition::ds));
  auto feed = m.events(id);
  m.submit(id, {{"hint", "please craft 'wood_plank' with 'wood' and 'wood'"}, {"goal", "wood_plank"}});
  auto result = wait_for(*feed, "result");
  ASSERT_TRUE(result);
  EXPECT_EQ(result->data["status"], "success");
  EXPECT_EQ(result->data["stored"], "please craft 'wood_plank' with 'wood' and 'wood'");
  wait_idle(m, id);
  json lib = m.library_view(id, "plank");
  ASSERT_EQ(lib.size(), 2u);  // input_wood_plank and the new program
  EXPECT_EQ(lib[1]["kind"], "program");
  EXPECT_EQ(lib[1]["goal"], json({"wood_plank"}));
}

TEST(Session, LibraryFilter) {
  SessionManager m(manual_config());
  std::string id = m.create(request(Condition::np));
  json cl = m.library_view(id, "cl");
  std::vector<std::string> names;
  for (const json& e : cl) names.push_back(e["name"]);
  EXPECT_NE(std::find(names.begin(), names.end(), "input_clay"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "input_clock"), names.end());
  for (const std::string& n : names) EXPECT_NE(n.find("cl"), std::string::npos);
  EXPECT_EQ(m.library_view(id, "").size(), kPrimitiveActionCount);
  EXPECT_TRUE(m.library_view(id, "zzz").empty());
}

TEST(Session, StartsFromAGivenLibrary) {
  Library lib;
  lib.add({SearchProblem{Goal{ItemId::wood_plank}, "planks"}, {Action::input(ItemId::wood), Action::input(ItemId::wood), Action::craft()}});
  SessionManager m(manual_config());
  SessionRequest req = request(Condition::np);
  req.library = serialize(lib);
  std::string id = m.create(req);
  EXPECT_EQ(m.snapshot(id)["library_size"], 1);
  EXPECT_EQ(m.library_view(id, "planks").size(), 1u);
}

TEST(Session, TimerEndsTheSession) {
  SessionManager m(manual_config());
  SessionRequest req = request(Condition::np);
  req.duration = 10;
  std::string id = m.create(req);
  auto feed = m.events(id);
  m.submit(id, {{"hint", "slow planks"}, {"goal", "wood_plank"}});
  m.tick(4);
  EXPECT_EQ(m.snapshot(id)["remaining_seconds"], 6.0);
  m.tick(7);
  json s = m.snapshot(id);
  EXPECT_TRUE(s["ended"].get<bool>());
  EXPECT_FALSE(s["busy"].get<bool>());
  EXPECT_EQ(s["remaining_seconds"], 0.0);
  EXPECT_TRUE(feed->closed());
  auto events = feed->since(0);
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.back().type, "end");
  EXPECT_EQ(error_kind([&] { m.submit(id, {{"clear", true}}); }), ServiceError::Kind::session_ended);
  std::size_t ticks = 0;
  for (const auto& e : events) ticks += e.type == "tick";
  EXPECT_EQ(ticks, 2u);
}

TEST(Session, RealtimeTicker) {
  ServiceConfig c = manual_config();
  c.realtime = true;
  c.tick_interval = 50ms;
  SessionManager m(c);
  SessionRequest req = request(Condition::dp);
  req.duration = 0.3;
  std::string id = m.create(req);
  auto end = wait_for(*m.events(id), "end", 0, 5s);
  ASSERT_TRUE(end);
  EXPECT_TRUE(end->data["ended"].get<bool>());
}

TEST(Session, BudgetFollowsRateConstant) {
  ServiceConfig c;
  c.rate_constant = 1234.4;
  c.solver_seconds = 10;
  EXPECT_EQ(c.solver_budget(), 12344u);
  c.rate_constant = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_GT(measure_rate_constant(500), 0.0);
}

TEST(EventFeed, SequenceAndClose) {
  EventFeed f;
  EXPECT_EQ(f.publish("a", 1), 1u);
  EXPECT_EQ(f.publish("b", 2), 2u);
  auto after1 = f.since(1);
  ASSERT_EQ(after1.size(), 1u);
  EXPECT_EQ(after1[0].type, "b");
  EXPECT_TRUE(f.since(2, 10ms).empty());
  f.close();
  EXPECT_EQ(f.publish("c", 3), 0u);
  EXPECT_EQ(f.since(0).size(), 2u);
}

// ---------------------------------------------------------------- HTTP

class Http : public ::testing::Test {
 protected:
  void SetUp() override {
    manager = std::make_unique<SessionManager>(manual_config());
    service = std::make_unique<HttpService>(*manager);
    port = service->bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    thread = std::thread([this] { service->listen(); });
    service->wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(20, 0);
  }
  void TearDown() override {
    service->stop();
    if (thread.joinable()) thread.join();
    service.reset();
    manager.reset();
  }

  json post(const std::string& path, const json& body, int expect) {
    auto res = client->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }
  json get(const std::string& path, int expect) {
    auto res = client->Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  std::unique_ptr<SessionManager> manager;
  std::unique_ptr<HttpService> service;
  std::unique_ptr<httplib::Client> client;
  std::thread thread;
  int port = 0;
};

TEST_F(Http, SessionLifecycleAndErrorCodes) {
  json created = post("/sessions", {{"condition", "dp"}, {"seed", 1}}, 201);
  std::string id = created["id"];
  EXPECT_EQ(created["condition"], "DP");
  EXPECT_EQ(get("/sessions/" + id, 200)["id"], id);

  json missing = get("/sessions/nope", 404);
  EXPECT_EQ(missing["error"], "NotFound");
  EXPECT_EQ(post("/sessions", {{"r", 2}}, 400)["error"], "BadRequest");

  auto raw = client->Post("/sessions/" + id + "/submit", "{not json", "application/json");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->status, 400);

  std::string submit = "/sessions/" + id + "/submit";
  post(submit, {{"define", {{"name", "make_plank"}, {"body", {"input_wood", "input_wood", "craft"}}}}}, 200);
  EXPECT_EQ(post(submit, {{"define", {{"name", "make_plank"}, {"body", {"craft"}}}}}, 409)["error"], "DuplicateName");
  EXPECT_EQ(post(submit, {{"execute", "nothing"}}, 404)["error"], "UnknownName");
  EXPECT_EQ(post(submit, {{"execute", "make_plank"}}, 200)["status"], "executed");
  EXPECT_EQ(get("/sessions/" + id, 200)["inventory"]["wood_plank"], 1);

  EXPECT_EQ(get("/sessions/" + id + "/recipes", 200).size(), kCraftableCount);
  json lib = get("/sessions/" + id + "/library?filter=plank", 200);
  EXPECT_EQ(lib.size(), 2u);
  EXPECT_EQ(post("/sessions/" + id + "/cancel", json::object(), 200)["status"], "idle");
}

TEST_F(Http, BusyAndEndedAreConflicts) {
  std::string id = post("/sessions", {{"condition", "np"}, {"duration", 5}}, 201)["id"];
  std::string submit = "/sessions/" + id + "/submit";
  EXPECT_EQ(post(submit, {{"hint", "slow"}, {"goal", "wood_plank"}}, 200)["status"], "accepted");
  EXPECT_EQ(post(submit, {{"hint", "slow"}, {"goal", "wood_plank"}}, 409)["error"], "SolverBusy");
  EXPECT_EQ(post("/sessions/" + id + "/cancel", json::object(), 200)["status"], "cancelled");
  manager->tick(5);
  EXPECT_EQ(post(submit, {{"clear", true}}, 409)["error"], "SessionEnded");
}

TEST_F(Http, EventStreamRunsToSessionEnd) {
  std::string id = post("/sessions", {{"condition", "np"}, {"duration", 2}}, 201)["id"];
  post("/sessions/" + id + "/submit",
       {{"hint", "please craft 'wood_plank' with 'wood' and 'wood'"}, {"goal", "wood_plank"}}, 200);

  std::thread ender([&] {
    std::this_thread::sleep_for(500ms);
    manager->tick(1);
    manager->tick(1);
  });
  std::string body;
  std::string content_type;
  httplib::Client sse("127.0.0.1", port);
  sse.set_read_timeout(20, 0);
  auto res = sse.Get(
      "/sessions/" + id + "/events?since=0",
      [&](const httplib::Response& r) {
        content_type = r.get_header_value("Content-Type");
        return true;
      },
      [&](const char* data, std::size_t n) {
        body.append(data, n);
        return true;
      });
  ender.join();
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(content_type.find("text/event-stream"), std::string::npos);

  // Parse the stream back into events.
  std::vector<SessionEvent> events;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = body.find("\n\n", pos);
    if (end == std::string::npos) break;
    std::string block = body.substr(pos, end - pos);
    pos = end + 2;
    SessionEvent e;
    std::istringstream lines(block);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind("id: ", 0) == 0) e.seq = std::stoull(line.substr(4));
      if (line.rfind("event: ", 0) == 0) e.type = line.substr(7);
      if (line.rfind("data: ", 0) == 0) e.data = json::parse(line.substr(6));
    }
    events.push_back(e);
  }
  EXPECT_EQ(pos, body.size());
  ASSERT_GE(events.size(), 5u);
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, i + 1);
  EXPECT_EQ(events.front().type, "snapshot");
  EXPECT_EQ(events.back().type, "end");
  std::vector<std::string> types;
  for (const auto& e : events) types.push_back(e.type);
  auto at = [&](const std::string& t) { return std::find(types.begin(), types.end(), t) - types.begin(); };
  EXPECT_LT(at("started"), at("result"));
  EXPECT_LT(at("result"), at("end"));
  EXPECT_EQ(std::count(types.begin(), types.end(), "tick"), 2);

  // Resuming after the last seen event yields nothing more.
  auto again = client->Get("/sessions/" + id + "/events?since=" + std::to_string(events.size()));
  ASSERT_TRUE(again);
  EXPECT_TRUE(again->body.empty());
  EXPECT_EQ(get("/sessions/" + id + "/events?since=x", 400)["error"], "BadRequest");
}

TEST(SseFormat, OneBlockPerEvent) {
  SessionEvent e{7, "tick", json{{"remaining_seconds", 12.5}}};
  EXPECT_EQ(format_sse(e), "id: 7\nevent: tick\ndata: {\"remaining_seconds\":12.5}\n\n");
}

TEST(StatusCodes, Mapping) {
  EXPECT_EQ(http_status(ServiceError::Kind::bad_request), 400);
  EXPECT_EQ(http_status(ServiceError::Kind::not_found), 404);
  EXPECT_EQ(http_status(ServiceError::Kind::unknown_name), 404);
  EXPECT_EQ(http_status(ServiceError::Kind::solver_busy), 409);
  EXPECT_EQ(http_status(ServiceError::Kind::duplicate_name), 409);
  EXPECT_EQ(http_status(ServiceError::Kind::session_ended), 409);
}

}  // namespace
}  // namespace natprog
