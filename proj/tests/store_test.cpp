#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "neurovec/store.hpp"
#include "oracle.hpp"

namespace nv = neurovec;

namespace {

std::vector<nv::Token> toks(std::initializer_list<std::pair<const char*, const char*>> pairs) {
  std::vector<nv::Token> out;
  for (const auto& [f, v] : pairs) out.push_back(nv::make_token(f, v));
  return out;
}

nv::NeurovectorRecord counters(std::string label, std::uint64_t use, std::uint64_t success) {
  nv::NeurovectorRecord r;
  r.target = std::move(label);
  r.use = use;
  r.success = success;
  return r;
}

// NV0:{a1,b2}, NV1:{a1,c3}, NV2:{b9,c3}
nv::NeurovectorStore three_nv_store() {
  nv::NeurovectorStore s(nv::Task::kClassification);
  s.insert(toks({{"a", "1"}, {"b", "2"}}), std::string("x"));
  s.insert(toks({{"a", "1"}, {"c", "3"}}), std::string("y"));
  s.insert(toks({{"b", "9"}, {"c", "3"}}), std::string("z"));
  return s;
}

}  // namespace

TEST(Insert, FirstRecordAndPostings) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  const auto id = s.insert(toks({{"a", "1"}, {"b", "2"}, {"c", "3"}}), std::string("pos"), 4);
  EXPECT_EQ(id, 0u);
  EXPECT_EQ(s.token_count(), 3u);
  for (const auto& t : s.tokens_of(0)) {
    ASSERT_NE(s.postings(t), nullptr);
    EXPECT_EQ(s.postings(t)->size(), 1u);
  }
  const auto& r = s.record(0);
  EXPECT_EQ(r.use, 0u);
  EXPECT_EQ(r.success, 0u);
  EXPECT_EQ(r.cumAbsError, 0.0);
  EXPECT_EQ(r.sourceRow, 4u);
}

TEST(Insert, SharedTokenPostingInCreationOrder) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  s.insert(toks({{"a", "1"}, {"b", "2"}}), std::string("p"));
  s.insert(toks({{"a", "1"}, {"b", "5"}}), std::string("q"));
  const auto* post = s.postings(nv::make_token("a", "1"));
  ASSERT_NE(post, nullptr);
  EXPECT_EQ(*post, (std::vector<nv::NeurovectorId>{0, 1}));
}

TEST(Insert, IdsAreDenseOrdinals) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  nv::NeurovectorId last = 0;
  for (int i = 0; i < 456; ++i) {
    last = s.insert(toks({{"f", std::to_string(i).c_str()}}), std::string("c"));
  }
  EXPECT_EQ(last, 455u);
  EXPECT_EQ(s.size(), 456u);
}

TEST(Insert, RejectsWrongTargetKindAndEmptyTokens) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  EXPECT_THROW(s.insert(toks({{"a", "1"}}), 1.5), nv::StoreError);
  EXPECT_THROW(s.insert({}, std::string("p")), nv::StoreError);
  nv::NeurovectorStore r(nv::Task::kRegression);
  EXPECT_THROW(r.insert(toks({{"a", "1"}}), std::string("p")), nv::StoreError);
}

TEST(CandidateSet, PartialQueryAndUnseenTokens) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  s.insert(toks({{"a", "1"}, {"b", "2"}}), std::string("p"));
  const auto c = nv::candidate_set(s, toks({{"a", "1"}, {"b", "2"}, {"c", "3"}}));
  EXPECT_EQ(c, (nv::CandidateSet{{0, 2}}));
  EXPECT_TRUE(nv::candidate_set(s, toks({{"z", "0"}})).empty());
}

TEST(CandidateSet, ThreeStoreMatchesBruteForce) {
  const auto s = three_nv_store();
  const auto query = toks({{"a", "1"}, {"b", "2"}, {"c", "3"}});
  // Brute force: intersect every stored token set with the query.
  nv::CandidateSet expected;
  for (nv::NeurovectorId id = 0; id < s.size(); ++id) {
    std::uint32_t n = 0;
    for (const auto& t : s.tokens_of(id)) {
      for (const auto& q : query) n += t == q ? 1 : 0;
    }
    if (n) expected.push_back({id, n});
  }
  EXPECT_EQ(expected, (nv::CandidateSet{{0, 2}, {1, 2}, {2, 1}}));
  EXPECT_EQ(nv::candidate_set(s, query), expected);
}

TEST(CandidateSet, OneLookupPerToken) {
  const auto s = three_nv_store();
  nv::CostCounters c;
  nv::candidate_set(s, toks({{"a", "1"}, {"q", "0"}, {"c", "3"}, {"b", "9"}}), &c);
  EXPECT_EQ(c.indexLookups, 4u);
  EXPECT_EQ(c.hashOps, 4u);
  EXPECT_EQ(c.searches, 1u);
}

TEST(Energy, Examples) {
  const nv::EnergyParams p1{1.0, 0.0};
  EXPECT_DOUBLE_EQ(nv::energy(counters("c", 5, 5), nv::Task::kClassification, p1), 5.0);
  EXPECT_DOUBLE_EQ(nv::energy(counters("c", 4, 2), nv::Task::kClassification, p1), 1.0);
  EXPECT_DOUBLE_EQ(nv::energy(counters("c", 0, 0), nv::Task::kClassification, p1), 0.0);

  nv::NeurovectorRecord r;
  r.target = 3.0;
  r.use = 1;
  r.success = 1;
  EXPECT_DOUBLE_EQ(nv::energy(r, nv::Task::kRegression, p1), 1.0);
  r.cumAbsError = 2.0;
  EXPECT_NEAR(nv::energy(r, nv::Task::kRegression, {0.5, 0.0}), 0.3679, 1e-4);
}

TEST(Select, CountWinsThenEnergyThenLowestId) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  s.restore(toks({{"a", "1"}}), counters("p", 4, 2));  // energy 1
  s.restore(toks({{"a", "2"}}), counters("q", 4, 4));  // energy 4
  const nv::EnergyParams p;
  EXPECT_EQ(nv::select_neurovector(nv::CandidateSet{{0, 2}, {1, 1}}, s, p)->id, 0u);
  const auto tie = nv::select_neurovector(nv::CandidateSet{{0, 2}, {1, 2}}, s, p);
  EXPECT_EQ(tie->id, 1u);
  EXPECT_DOUBLE_EQ(tie->energy, 4.0);

  nv::NeurovectorStore fresh(nv::Task::kClassification);
  fresh.insert(toks({{"a", "1"}}), std::string("p"));
  fresh.insert(toks({{"a", "2"}}), std::string("q"));
  EXPECT_EQ(nv::select_neurovector(nv::CandidateSet{{0, 2}, {1, 2}}, fresh, p)->id, 0u);
  EXPECT_EQ(nv::select_neurovector(nv::CandidateSet{{1, 2}, {0, 2}}, fresh, p)->id, 0u);
  EXPECT_FALSE(nv::select_neurovector(nv::CandidateSet{}, fresh, p).has_value());
}

TEST(Predict, ExactMatch) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  s.insert(toks({{"a", "1"}, {"b", "2"}}), std::string("pos"));
  const auto out = nv::predict_one(s, toks({{"a", "1"}, {"b", "2"}}), {}, nv::FallbackPolicy::none());
  EXPECT_EQ(std::get<std::string>(out.predicted), "pos");
  EXPECT_EQ(out.matchCount, 2u);
  EXPECT_EQ(out.selectedId, 0u);
  EXPECT_FALSE(out.usedFallback);
}

TEST(Predict, FallbackWhenNothingMatches) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  s.insert(toks({{"a", "1"}}), std::string("pos"));
  const auto out = nv::predict_one(s, toks({{"a", "7"}}), {}, nv::FallbackPolicy::constant(std::string("neg")));
  EXPECT_EQ(std::get<std::string>(out.predicted), "neg");
  EXPECT_TRUE(out.usedFallback);
  EXPECT_FALSE(out.selectedId.has_value());
  EXPECT_THROW(nv::predict_one(s, toks({{"a", "7"}}), {}, nv::FallbackPolicy::none()), nv::NoModelError);
}

TEST(Predict, EmptyStoreWithoutFallbackIsNoModel) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  EXPECT_THROW(nv::predict_one(s, toks({{"a", "1"}}), {}, nv::FallbackPolicy::none()), nv::NoModelError);
  const auto out = nv::predict_one(s, toks({{"a", "1"}}), {}, nv::FallbackPolicy::constant(std::string("B")));
  EXPECT_TRUE(out.usedFallback);
}

TEST(Predict, ThreeStoreTieGoesToLowestId) {
  const auto s = three_nv_store();
  const auto q = toks({{"a", "1"}, {"b", "2"}, {"c", "3"}});
  std::vector<oracle::Nv> brute = {{{"a\x1f" "1", "b\x1f" "2"}, "x"},
                                   {{"a\x1f" "1", "c\x1f" "3"}, "y"},
                                   {{"b\x1f" "9", "c\x1f" "3"}, "z"}};
  std::vector<std::string> qk;
  for (const auto& t : q) qk.push_back(t.key());
  const auto pick = oracle::brute_force_select(brute, qk);
  ASSERT_TRUE(pick.has_value());
  EXPECT_EQ(pick->id, 0u);
  const auto out = nv::predict_one(s, q, {}, nv::FallbackPolicy::none());
  EXPECT_EQ(out.selectedId, pick->id);
  EXPECT_EQ(std::get<std::string>(out.predicted), "x");
  EXPECT_EQ(out.candidateCount, 3u);
}

TEST(RecordOutcome, Classification) {
  nv::NeurovectorStore s(nv::Task::kClassification);
  s.restore(toks({{"a", "1"}}), counters("p", 3, 2));
  s.restore(toks({{"a", "2"}}), counters("p", 3, 2));
  const auto& right = s.record_outcome(0, std::string("p"), {});
  EXPECT_EQ(right.use, 4u);
  EXPECT_EQ(right.success, 3u);
  const auto& wrong = s.record_outcome(1, std::string("q"), {});
  EXPECT_EQ(wrong.use, 4u);
  EXPECT_EQ(wrong.success, 2u);
  EXPECT_THROW(s.record_outcome(9, std::string("p"), {}), nv::StoreError);
}

TEST(RecordOutcome, RegressionAccumulatesError) {
  nv::NeurovectorStore s(nv::Task::kRegression);
  s.insert(toks({{"a", "1"}}), 5.0);
  const auto& r = s.record_outcome(0, 7.5, {1.0, 0.0});
  EXPECT_EQ(r.use, 1u);
  EXPECT_EQ(r.success, 0u);
  EXPECT_DOUBLE_EQ(r.cumAbsError, 2.5);
  s.record_outcome(0, 5.0, {1.0, 0.0});
  EXPECT_EQ(r.success, 1u);
  s.record_outcome(0, 5.4, {1.0, 0.5});
  EXPECT_EQ(r.success, 2u);
  EXPECT_NEAR(r.cumAbsError, 2.9, 1e-12);
}

TEST(RecordOutcome, SuccessNeverExceedsUse) {
  std::mt19937_64 rng(11);
  nv::NeurovectorStore s(nv::Task::kRegression);
  for (int i = 0; i < 20; ++i) s.insert(toks({{"a", std::to_string(i).c_str()}}), double(i % 3));
  for (int step = 0; step < 5000; ++step) {
    const auto id = static_cast<nv::NeurovectorId>(rng() % 20);
    const auto before = s.record(id);
    const auto& after = s.record_outcome(id, double(rng() % 3), {1.0, double(rng() % 2)});
    ASSERT_LE(after.success, after.use);
    ASSERT_GE(after.use, before.use);
    ASSERT_GE(after.success, before.success);
    ASSERT_GE(after.cumAbsError, before.cumAbsError);
  }
}

// Randomised stores with small value alphabets so overlaps and ties are common.
TEST(Property, IndexedSelectionEqualsLinearScan) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 300; ++round) {
    const bool regression = round % 3 == 0;
    const auto task = regression ? nv::Task::kRegression : nv::Task::kClassification;
    const nv::EnergyParams params{0.25 + (rng() % 4) * 0.5, 0.0};
    const std::size_t d = 1 + rng() % 12;
    const std::size_t n = rng() % 201;
    const std::size_t alphabet = 1 + rng() % 4;
    nv::NeurovectorStore store(task);
    std::vector<oracle::Nv> brute;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<nv::Token> t;
      oracle::Nv o;
      for (std::size_t f = 0; f < d; ++f) {
        if (rng() % 5 == 0) continue;
        t.push_back(nv::make_token("f" + std::to_string(f), std::to_string(rng() % alphabet)));
        o.tokens.insert(t.back().key());
      }
      if (t.empty()) continue;
      nv::NeurovectorRecord rec;
      rec.use = rng() % 4;
      rec.success = rec.use ? rng() % (rec.use + 1) : 0;
      if (regression) {
        rec.target = double(rng() % 5);
        rec.cumAbsError = double(rng() % 3);
        o.value = std::get<double>(rec.target);
        o.absError = rec.cumAbsError;
      } else {
        rec.target = std::string(1, char('a' + rng() % 3));
        o.label = std::get<std::string>(rec.target);
      }
      o.use = rec.use;
      o.success = rec.success;
      store.restore(std::move(t), std::move(rec));
      brute.push_back(std::move(o));
    }
    for (int q = 0; q < 10; ++q) {
      std::vector<nv::Token> query;
      std::vector<std::string> keys;
      for (std::size_t f = 0; f < d; ++f) {
        query.push_back(nv::make_token("f" + std::to_string(f), std::to_string(rng() % (alphabet + 1))));
        keys.push_back(query.back().key());
      }
      const auto expected = oracle::brute_force_select(brute, keys, regression, params.alpha);
      nv::CostCounters c;
      const auto cands = nv::candidate_set(store, query, &c);
      ASSERT_EQ(c.indexLookups, d);
      for (const auto& cand : cands) {
        ASSERT_GT(cand.matchCount, 0u);
        ASSERT_LE(cand.matchCount, d);
      }
      const auto sel = nv::select_neurovector(cands, store, params);
      ASSERT_EQ(sel.has_value(), expected.has_value());
      if (sel) {
        ASSERT_EQ(sel->id, expected->id);
        ASSERT_EQ(sel->matchCount, expected->count);
      }
    }
  }
}

TEST(Property, StoredInstanceMatchesItselfFully) {
  std::mt19937_64 rng(5);
  nv::NeurovectorStore s(nv::Task::kClassification);
  std::vector<std::vector<nv::Token>> rows;
  for (int i = 0; i < 100; ++i) {
    std::vector<nv::Token> t;
    for (int f = 0; f < 8; ++f) t.push_back(nv::make_token("f" + std::to_string(f), std::to_string(rng() % 3)));
    s.insert(t, std::string("c"));
    rows.push_back(t);
  }
  for (const auto& r : rows) {
    const auto out = nv::predict_one(s, r, {}, nv::FallbackPolicy::none());
    EXPECT_EQ(out.matchCount, r.size());
  }
}

TEST(Property, PostingsAreConsistentWithRecords) {
  std::mt19937_64 rng(8);
  nv::NeurovectorStore s(nv::Task::kClassification);
  for (int i = 0; i < 150; ++i) {
    std::vector<nv::Token> t;
    for (int f = 0; f < 6; ++f) t.push_back(nv::make_token("f" + std::to_string(f), std::to_string(rng() % 4)));
    s.insert(t, std::string("c"));
  }
  for (nv::NeurovectorId id = 0; id < s.size(); ++id) {
    for (const auto& t : s.tokens_of(id)) {
      const auto* post = s.postings(t);
      ASSERT_NE(post, nullptr);
      EXPECT_TRUE(std::is_sorted(post->begin(), post->end()));
      EXPECT_EQ(std::adjacent_find(post->begin(), post->end()), post->end());
      EXPECT_EQ(std::count(post->begin(), post->end(), id), 1);
      for (auto other : *post) EXPECT_LT(other, s.size());
    }
  }
}

TEST(Property, EnergyIdentities) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 20000; ++i) {
    nv::NeurovectorRecord r;
    r.target = 0.0;
    r.use = 1 + rng() % 50;
    r.success = rng() % (r.use + 1);
    r.cumAbsError = (rng() % 1000) / 10.0;
    const nv::EnergyParams p{0.01 + (rng() % 300) / 100.0, 0.0};
    const double cls = nv::energy(r, nv::Task::kClassification, p);
    const double reg = nv::energy(r, nv::Task::kRegression, p);
    ASSERT_LE(reg, cls);
    if (r.cumAbsError == 0.0) {
      ASSERT_EQ(reg, cls);
    }
    if (r.success > 0 && r.cumAbsError > 0.0 && std::isnormal(reg)) {
      ASSERT_LT(reg, cls);
    }
    auto more = r;
    more.cumAbsError += 0.5;
    ASSERT_LE(nv::energy(more, nv::Task::kRegression, p), reg);
    if (r.success < r.use) {
      auto better = r;
      ++better.success;
      ASSERT_GE(nv::energy(better, nv::Task::kClassification, p), cls);
    }
    auto perfect = r;
    perfect.success = perfect.use;
    ASSERT_DOUBLE_EQ(nv::energy(perfect, nv::Task::kClassification, p), double(perfect.success));
  }
}
