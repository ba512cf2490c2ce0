#include <gtest/gtest.h>
#include <json.hpp>

#include "pubrank/errors.hpp"
#include "pubrank/files.hpp"
#include "pubrank/rerank.hpp"
#include "pubrank/testkit/backend.hpp"
#include "pubrank/testkit/e2e.hpp"
#include "support/snapshots.hpp"

using namespace pubrank;
using namespace pubrank::rerank;
using nlohmann::json;
using testkit::ScriptedChannel;

namespace {

struct Setup {
  std::vector<Document> docs;
  RankedRun run;
  DocumentStore store;
  Question question;
};

Setup make_setup(std::size_t n) {
  Setup s;
  s.question.id = "q1";
  s.question.body = "Which gene regulates microglial activation?";
  s.run.question_id = "q1";
  for (std::size_t i = 0; i < n; ++i) {
    auto pmid = std::to_string(1000 + i * 7);
    s.docs.push_back({pmid, "Title " + std::to_string(i), "Abstract of document " + std::to_string(i) + "."});
    s.run.items.push_back({pmid, 1.0 - static_cast<double>(i) / 2000.0});
  }
  s.store = DocumentStore(s.docs);
  return s;
}

std::shared_ptr<ServiceClient> service(std::shared_ptr<Channel> ch) {
  RetryPolicy r;
  r.attempts = 1;
  return std::make_shared<ServiceClient>(std::move(ch), r);
}

std::shared_ptr<ScriptedChannel> constant_scores(double value) {
  return std::make_shared<ScriptedChannel>([value](Endpoint, const std::string& body) {
    auto n = json::parse(body).at("docs").size();
    return Reply{200, json{{"scores", std::vector<double>(n, value)}}.dump()};
  });
}

std::shared_ptr<ScriptedChannel> chat_reply(std::string content) {
  return std::make_shared<ScriptedChannel>([content](Endpoint, const std::string&) {
    return Reply{200, json{{"content", content}}.dump()};
  });
}

}  // namespace

TEST(Pointwise, KeepsExactlyK) {
  auto s = make_setup(1000);
  auto ch = std::make_shared<ScriptedChannel>([](Endpoint, const std::string& body) {
    auto req = json::parse(body);
    json scores = json::array();
    for (const auto& d : req.at("docs")) scores.push_back(static_cast<double>(std::stoul(d.at("id").get<std::string>()) % 97) / 97.0);
    return Reply{200, json{{"scores", scores}}.dump()};
  });
  auto out = pointwise_rerank(s.question, s.run, s.store, ScoreClient(service(ch)), {10, 64});
  EXPECT_EQ(out.size(), 10u);
  EXPECT_EQ(out.stage, Stage::crossencoder);
  EXPECT_EQ(ch->total_calls(), 16u);  // ceil(1000 / 64)
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_TRUE(ranks_before(out.items[i - 1], out.items[i]));
}

TEST(Pointwise, AllZeroScoresOrderByPmid) {
  auto s = make_setup(40);
  std::reverse(s.run.items.begin(), s.run.items.end());
  auto out = pointwise_rerank(s.question, s.run, s.store, ScoreClient(service(constant_scores(0.0))), {10, 64});
  ASSERT_EQ(out.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(out.items[i].pmid, std::to_string(1000 + i * 7));
}

TEST(Pointwise, SingleCandidateAndErrors) {
  auto s = make_setup(1);
  auto out = pointwise_rerank(s.question, s.run, s.store, ScoreClient(service(constant_scores(0.5))), {10, 64});
  EXPECT_EQ(out.size(), 1u);
  auto failing = std::make_shared<ScriptedChannel>([](Endpoint, const std::string&) { return Reply{500, ""}; });
  try {
    pointwise_rerank(s.question, s.run, s.store, ScoreClient(service(failing)), {10, 64});
    FAIL();
  } catch (const UpstreamError& e) {
    EXPECT_NE(std::string(e.what()).find("q1"), std::string::npos);
  }
}

TEST(ListwisePrompt, EnumeratesCandidates) {
  auto s = make_setup(30);
  auto msgs = build_listwise_prompt(s.question, s.run, s.store);
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[1].role, Role::user);
  for (int i = 1; i <= 30; ++i) EXPECT_NE(msgs[1].content.find("[" + std::to_string(i) + "] "), std::string::npos);
  EXPECT_EQ(msgs[1].content.find("[31]"), std::string::npos);
  EXPECT_NE(msgs[1].content.find("exactly the 10 most"), std::string::npos);

  auto seven = make_setup(7);
  auto m7 = build_listwise_prompt(seven.question, seven.run, seven.store);
  EXPECT_NE(m7[1].content.find("exactly the 7 most"), std::string::npos);
}

TEST(ListwisePrompt, Snapshot) {
  auto s = make_setup(12);
  auto text = messages_to_json(build_listwise_prompt(s.question, s.run, s.store), 2) + "\n";
  auto path = snapshots::data_dir() / "listwise_prompt.json";
  if (snapshots::update_requested()) write_file(path, text);
  EXPECT_EQ(read_file(path), text);
}

TEST(ListwisePrompt, DocumentBudgetInCodePoints) {
  auto s = make_setup(2);
  s.docs[0].abstract = "\xCE\xB1\xCE\xB1\xCE\xB1" + std::string(50, 'a');
  s.store = DocumentStore(s.docs);
  ListwiseOptions o;
  o.doc_char_budget = 14;  // "Title 0 — " is 10 code points
  auto msgs = build_listwise_prompt(s.question, s.run, s.store, o);
  EXPECT_NE(msgs[1].content.find("[1] Title 0 \xE2\x80\x94 \xCE\xB1\xCE\xB1\xCE\xB1" "a\n"), std::string::npos);
}

TEST(ParseListwise, Examples) {
  EXPECT_EQ(parse_listwise_response("[3, 1, 7]", 30, 10), (std::vector<std::size_t>{3, 1, 7}));
  EXPECT_EQ(parse_listwise_response("Sure! [2,2,31,5]", 30, 10), (std::vector<std::size_t>{2, 5}));
  EXPECT_TRUE(parse_listwise_response("no list here", 30, 10).empty());
  EXPECT_EQ(parse_listwise_response("see [note] then [4, 2]", 30, 10), (std::vector<std::size_t>{4, 2}));
  EXPECT_EQ(parse_listwise_response("[1,2,3,4,5]", 30, 3), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(parse_listwise_response("[0, 99999999999999999999, 2]", 30, 10), (std::vector<std::size_t>{2}));
}

TEST(LlmRerank, ParsedOrderFillAndFallback) {
  auto s = make_setup(30);
  auto pm = [&](std::size_t ordinal) { return s.run.items[ordinal - 1].pmid; };

  auto full = llm_rerank(s.question, s.run, s.store, ChatClient(service(chat_reply("[3, 1, 7, 30, 12, 5, 9, 2, 22, 14]"))));
  EXPECT_EQ(full.run.items[0].pmid, pm(3));
  EXPECT_EQ(full.run.items[9].pmid, pm(14));
  EXPECT_EQ(full.exchange.fallback_fill, 0u);
  EXPECT_DOUBLE_EQ(full.run.items[0].score, 10.0);
  EXPECT_DOUBLE_EQ(full.run.items[9].score, 1.0);

  auto part = llm_rerank(s.question, s.run, s.store, ChatClient(service(chat_reply("[4, 8, 2, 6]"))));
  std::vector<std::string> want{pm(4), pm(8), pm(2), pm(6), pm(1), pm(3), pm(5), pm(7), pm(9), pm(10)};
  EXPECT_EQ(part.run.pmids(), want);
  EXPECT_EQ(part.exchange.fallback_fill, 6u);

  auto junk = llm_rerank(s.question, s.run, s.store, ChatClient(service(chat_reply("Sorry."))));
  EXPECT_EQ(junk.run.pmids(), truncated(s.run, 10).pmids());
  EXPECT_EQ(junk.exchange.fallback_fill, 10u);
}

TEST(LlmRerank, AuditFile) {
  auto s = make_setup(3);
  auto res = llm_rerank(s.question, s.run, s.store, ChatClient(service(chat_reply("[2]"))));
  testkit::TempDir tmp;
  write_audit(tmp.path() / "audit", res.exchange);
  auto j = json::parse(read_file(tmp.path() / "audit" / "q1.json"));
  EXPECT_EQ(j.at("raw_response"), "[2]");
  EXPECT_EQ(j.at("fallback_fill"), 2);
  EXPECT_EQ(j.at("prompt").size(), 2u);
}
