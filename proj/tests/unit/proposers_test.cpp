#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace natprog;
using namespace natprog::fixtures;
using I = ItemId;
using namespace std::chrono_literals;

namespace {

std::vector<CandidateSequence> drain(CandidateStream& s, std::size_t limit = SIZE_MAX) {
  std::vector<CandidateSequence> out;
  while (out.size() < limit) {
    auto c = s.next();
    if (!c) break;
    out.push_back(std::move(*c));
  }
  return out;
}

class ThrowingEmbedder final : public Embedder {
 public:
  std::vector<double> embed(std::string_view) const override { throw std::runtime_error("offline"); }
};

Library library_of(std::initializer_list<std::pair<ItemId, std::string>> entries) {
  Library lib;
  for (const auto& [item, hint] : entries) lib.add(decomp(Goal{item}, hint, {in(item), craft()}));
  return lib;
}

TEST(Embedder, UnitNormAndDeterministic) {
  HashingEmbedder e;
  for (std::string_view text : {"please craft 'brick' with 'clay' and 'clay'", "", "the and of", "x"}) {
    auto v = e.embed(text);
    ASSERT_EQ(v.size(), 256u);
    double n = 0;
    for (double x : v) n += x * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
    EXPECT_EQ(v, e.embed(text));
  }
  EXPECT_NEAR(cosine(e.embed("Make a BRICK!"), e.embed("make brick")), 1.0, 1e-12);
}

TEST(Embedder, HeadTokenDominates) {
  HashingEmbedder e;
  auto q = e.embed("please craft 'clay' with 'sand' and 'pickaxe'");
  double same_head = cosine(q, e.embed("please craft 'clay' with 'sand' and 'grass'"));
  double same_inputs = cosine(q, e.embed("please craft 'glass' with 'sand' and 'pickaxe'"));
  EXPECT_GT(same_head, same_inputs);
}

TEST(Naive, EmptyLibraryEnumeratesPrimitives) {
  ProposerParams params;
  params.max_len = 2;
  Library lib;
  auto s = outer_propose_naive({Goal{I::hut}, ""}, lib, params);
  auto all = drain(*s);
  ASSERT_EQ(all.size(), 30u + 900u);
  for (std::size_t i = 0; i < 30; ++i) {
    ASSERT_EQ(all[i].size(), 1u);
    EXPECT_EQ(std::get<Action>(all[i].items[0]), primitive_actions()[i]);
  }
  EXPECT_EQ(all[30].items, (std::vector<CandidateItem>{primitive_actions()[0], primitive_actions()[0]}));
  EXPECT_EQ(all[31].items, (std::vector<CandidateItem>{primitive_actions()[0], primitive_actions()[1]}));
}

TEST(Naive, OneEntryLeadsTheBeam) {
  Library lib = library_of({{I::brick, "brick"}});
  auto s = outer_propose_naive({Goal{I::hut}, ""}, lib, ProposerParams{});
  auto first = drain(*s, 31);
  EXPECT_EQ(first[0].items[0], CandidateItem{LibraryRef{0}});
  for (std::size_t i = 1; i <= 30; ++i) EXPECT_EQ(std::get<Action>(first[i].items[0]), primitive_actions()[i - 1]);
}

TEST(Naive, CountsAndLengths) {
  Library lib = library_of({{I::brick, "a"}, {I::hut, "b"}});
  ProposerParams params;
  params.max_len = 2;
  auto s = outer_propose_naive({Goal{I::hut}, ""}, lib, params);
  auto all = drain(*s);
  EXPECT_EQ(all.size(), EnumerationStream::total_count(32, 2));
  EXPECT_EQ(EnumerationStream::total_count(32, 2), 32u + 32u * 32u);
  for (std::size_t i = 1; i < all.size(); ++i) ASSERT_GE(all[i].size(), all[i - 1].size());
}

TEST(Naive, BeamKeepsTwelveMostRecent) {
  Library lib;
  for (int i = 0; i < 20; ++i) lib.add(decomp(Goal{I::hut}, "h" + std::to_string(i), {in(I::wood), sub(I::hut)}));
  ASSERT_EQ(lib.size(), 1u);  // same identity
  Library many;
  for (std::size_t i = 0; i < 20; ++i)
    many.add(decomp(Goal{I::hut}, "h" + std::to_string(i), {primitive_actions()[i], craft()}));
  Beam beam = naive_beam(many, ProposerParams{});
  ASSERT_EQ(beam.library_units, 12u);
  ASSERT_EQ(beam.items.size(), 42u);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(std::get<LibraryRef>(beam.items[k]).index, 19 - k);
}

TEST(Naive, DeadPrefixSkipsBlock) {
  Library lib;
  ProposerParams params;
  params.max_len = 2;
  auto s = outer_propose_naive({Goal{I::hut}, ""}, lib, params);
  drain(*s, 30);
  auto c = s->next();  // [p0, p0]
  ASSERT_TRUE(c);
  s->mark_dead_prefix(1);
  auto d = s->next();
  ASSERT_TRUE(d);
  EXPECT_EQ(d->items, (std::vector<CandidateItem>{primitive_actions()[1], primitive_actions()[0]}));
  EXPECT_EQ(drain(*s).size(), 900u - 30u - 1u);
}

Library same_tick_library(std::initializer_list<std::pair<ItemId, std::string>> entries) {
  std::vector<LibraryEntry> out;
  for (const auto& [item, hint] : entries) {
    LibraryEntry e;
    e.decomposition = decomp(Goal{item}, hint, {in(item), craft()});
    e.insertion_tick = e.last_used_tick = 1;
    out.push_back(std::move(e));
  }
  return Library::restore(std::move(out), 1);
}

TEST(Distance, IdenticalHintRanksFirst) {
  Library lib = same_tick_library({{I::hut, "please craft 'hut' with 'string' and 'grass'"},
                                   {I::brick, "please craft 'brick' with 'clay' and 'clay'"},
                                   {I::paper, "please craft 'paper' with 'grass' and 'grass'"}});
  HashingEmbedder e;
  Beam beam = distance_beam({Goal{I::brick}, "please craft 'brick' with 'clay' and 'clay'"}, lib, e, ProposerParams{});
  EXPECT_EQ(std::get<LibraryRef>(beam.items[0]).index, 1u);
  EXPECT_EQ(beam.library_units, 3u);
  EXPECT_EQ(beam.items.size(), 33u);
}

TEST(Distance, RecencyAndSimilarityAdd) {
  // brick: recency 0 + similarity 1; paper: recency 1 + similarity > 0.
  Library lib = library_of({{I::brick, "please craft 'brick' with 'clay' and 'clay'"},
                            {I::hut, "please craft 'hut' with 'string' and 'grass'"},
                            {I::paper, "please craft 'paper' with 'clay' and 'grass'"}});
  HashingEmbedder e;
  SearchProblem p{Goal{I::brick}, "please craft 'brick' with 'clay' and 'clay'"};
  auto q = e.embed(p.hint);
  std::vector<double> expected;
  for (std::size_t i = 0; i < 3; ++i) expected.push_back(i / 2.0 + cosine(q, e.embed(lib.at(i).hint())));
  std::vector<std::size_t> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { 
    if (expected[a] != expected[b]) return expected[a] > expected[b];
    return a > b;
  });
  EXPECT_EQ(order[0], 2u);
  Beam beam = distance_beam(p, lib, e, ProposerParams{});
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(std::get<LibraryRef>(beam.items[k]).index, order[k]);
}

TEST(Distance, EmptyHintsReduceToRecency) {
  Library lib = library_of({{I::brick, ""}, {I::hut, ""}, {I::paper, ""}});
  HashingEmbedder e;
  Beam d = distance_beam({Goal{I::brick}, ""}, lib, e, ProposerParams{});
  Beam n = naive_beam(lib, ProposerParams{});
  EXPECT_EQ(d.items, n.items);
}

TEST(Distance, EmbedderFailureDegradesToNaive) {
  Library lib = library_of({{I::brick, "x"}, {I::hut, "y"}});
  ThrowingEmbedder bad;
  testing::internal::CaptureStderr();
  auto s = outer_propose_distance({Goal{I::brick}, "x"}, lib, bad, ProposerParams{});
  std::string log = testing::internal::GetCapturedStderr();
  EXPECT_NE(log.find("warning"), std::string::npos);
  EXPECT_EQ(s->beam().items, naive_beam(lib, ProposerParams{}).items);
}

TEST(Distance, DeterministicBeam) {
  Library lib = library_of({{I::brick, "brick please"}, {I::hut, "hut now"}, {I::clock, "clock"}});
  HashingEmbedder e;
  SearchProblem p{Goal{I::hut}, "make hut"};
  EXPECT_EQ(distance_beam(p, lib, e, ProposerParams{}).items, distance_beam(p, lib, e, ProposerParams{}).items);
}

TEST(Prompt, ZeroExamples) {
  Library lib = library_of({{I::brick, "please craft 'brick' with 'clay' and 'clay'"}});
  HashingEmbedder e;
  std::string p = build_prompt({Goal{I::clock}, "make clock with gears and cables"}, lib, e, 0, default_catalog());
  EXPECT_NE(p.find("\"place wood\""), std::string::npos);
  EXPECT_NE(p.find("\"collect\""), std::string::npos);
  EXPECT_NE(p.find("[\\\"clock\\\"]"), std::string::npos);
  EXPECT_EQ(p.find("Here are some examples"), std::string::npos);
  EXPECT_EQ(p.find("END"), std::string::npos);
}

TEST(Prompt, ExampleBlocksAndQuery) {
  Library lib;
  lib.add(decomp(Goal{I::brick}, "please craft 'brick' with 'clay' and 'clay'", {in(I::clay), in(I::clay), craft()}));
  lib.add(decomp(Goal{I::hut}, "please craft 'hut' with 'string' and 'grass'",
                 {sub(I::string), in(I::grass), in(I::string), craft()}));
  HashingEmbedder e;
  std::string p = build_prompt({Goal{I::clock}, "make clock with gears and cables"}, lib, e, 10, default_catalog());
  auto brick = p.find("START\n{\"name\":\"please craft 'brick' with 'clay' and 'clay'\"");
  ASSERT_NE(brick, std::string::npos);
  EXPECT_NE(p.find("place clay\n    place clay\n    collect\nEND", brick), std::string::npos);
  EXPECT_NE(p.find("    {\"post_condition\":\"[\\\"string\\\"]\"}"), std::string::npos);
  std::string tail = "START\n{\"name\":\"make clock with gears and cables\",\"post_condition\":\"[\\\"clock\\\"]\"}\n";
  ASSERT_GE(p.size(), tail.size());
  EXPECT_EQ(p.substr(p.size() - tail.size()), tail);
}

TEST(Prompt, ExamplesOrderedBySimilarity) {
  Library lib;
  lib.add(decomp(Goal{I::hut}, "please craft 'hut' with 'string' and 'grass'", {in(I::string), craft()}));
  lib.add(decomp(Goal{I::brick}, "please craft 'brick' with 'clay' and 'clay'", {in(I::clay), craft()}));
  HashingEmbedder e;
  std::string p = build_prompt({Goal{I::hut}, "hut from string"}, lib, e, 1, default_catalog());
  EXPECT_NE(p.find("'hut' with"), std::string::npos);
  EXPECT_EQ(p.find("'brick' with"), std::string::npos);
}

TEST(Completion, HutBlock) {
  std::string text =
      "START\n{\"name\":\"please craft 'hut' with 'string' and 'grass'\",\"post_condition\":\"[\\\"hut\\\"]\"}\n"
      "    {\"post_condition\": [\"string\"]}\n    place grass\n    place string\n    collect\nEND\n";
  auto seqs = parse_completion(text);
  ASSERT_EQ(seqs.size(), 1u);
  ASSERT_EQ(seqs[0].size(), 4u);
  EXPECT_EQ(std::get<SearchProblem>(seqs[0].items[0]), (SearchProblem{Goal{I::string}, ""}));
  EXPECT_EQ(std::get<Action>(seqs[0].items[1]), Action::input(I::grass));
  EXPECT_EQ(std::get<Action>(seqs[0].items[3]), Action::craft());
}

TEST(Completion, EmptyAndGarbage) {
  EXPECT_TRUE(parse_completion("").empty());
  auto seqs = parse_completion("START\nplace wood\nfly to the moon\nplace unobtainium\ncollect\nEND\nSTART\nnonsense\nEND");
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0].size(), 2u);
}

TEST(Completion, ContinuesOpenBlock) {
  auto seqs = parse_completion("    place wool\n    place wool\n    collect\nEND\nSTART\nplace grass\nEND\n");
  ASSERT_EQ(seqs.size(), 2u);
  EXPECT_EQ(seqs[0].size(), 3u);
  EXPECT_EQ(seqs[1].size(), 1u);
}

TEST(Race, SampleServedFirst) {
  Library lib;
  auto sampler = std::make_shared<MockSampler>(std::vector<std::string>{"place wool\nplace wool\ncollect\nEND\n"});
  HashingEmbedder e;
  RaceOptions opt;
  opt.initial_wait = 2000ms;
  auto s = outer_propose_llm({Goal{I::string}, "string"}, lib, e, sampler, default_catalog(), ProposerParams{}, opt);
  auto c = s->next();
  ASSERT_TRUE(c);
  EXPECT_FALSE(s->last_was_enumerated());
  EXPECT_EQ(c->size(), 3u);
  EXPECT_EQ(s->last_positions(), nullptr);
  auto d = s->next();
  ASSERT_TRUE(d);
  EXPECT_TRUE(s->last_was_enumerated());
  EXPECT_EQ(sampler->prompts().size(), 1u);
}

TEST(Race, SamplerFailureEqualsDistance) {
  Library lib = library_of({{I::brick, "x"}, {I::hut, "y"}});
  HashingEmbedder e;
  ProposerParams params;
  params.max_len = 2;
  SearchProblem p{Goal{I::hut}, "y"};
  auto sampler = std::make_shared<MockSampler>(std::vector<std::string>{"place wood"}, 0ms, true);
  RaceOptions opt;
  opt.initial_wait = 2000ms;
  testing::internal::CaptureStderr();
  auto race = outer_propose_llm(p, lib, e, sampler, default_catalog(), params, opt);
  auto got = drain(*race);
  testing::internal::GetCapturedStderr();
  auto reference = outer_propose_distance(p, lib, e, params);
  EXPECT_EQ(got, drain(*reference));
}

TEST(Race, SlowSamplerDoesNotBlockEnumeration) {
  Library lib;
  HashingEmbedder e;
  auto sampler = std::make_shared<MockSampler>(std::vector<std::string>{"place wood"}, 300ms);
  auto s = outer_propose_llm({Goal{I::hut}, ""}, lib, e, sampler, default_catalog(), ProposerParams{});
  auto start = std::chrono::steady_clock::now();
  auto c = s->next();
  EXPECT_LT(std::chrono::steady_clock::now() - start, 200ms);
  ASSERT_TRUE(c);
  EXPECT_TRUE(s->last_was_enumerated());
  std::this_thread::sleep_for(400ms);
  auto d = s->next();
  ASSERT_TRUE(d);
  EXPECT_FALSE(s->last_was_enumerated());
  EXPECT_EQ(d->items, (std::vector<CandidateItem>{Action::input(I::wood)}));
}

TEST(Race, DestroyedStreamAbandonsSampler) {
  Library lib;
  HashingEmbedder e;
  auto sampler = std::make_shared<MockSampler>(std::vector<std::string>{"place wood"}, 200ms);
  {
    auto s = outer_propose_llm({Goal{I::hut}, ""}, lib, e, sampler, default_catalog(), ProposerParams{});
    ASSERT_TRUE(s->next());
  }
  std::this_thread::sleep_for(300ms);
  EXPECT_EQ(sampler->prompts().size(), 1u);
}

}  // namespace
