// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "rgse/conllu.hpp"
#include "rgse/dep_graph.hpp"
#include "rgse/errors.hpp"
#include "rgse/rng.hpp"

namespace rgse {
namespace {

constexpr const char* kMonkey =
    "# sent_id = monkey\n"
    "1\tmonkey\t_\t_\t_\t_\t2\tnsubj\t_\t_\n"
    "2\tlikes\t_\t_\t_\t_\t0\troot\t_\t_\n"
    "3\teating\t_\t_\t_\t_\t2\txcomp\t_\t_\n"
    "4\tbananas\t_\t_\t_\t_\t3\tobj\t_\t_\n"
    "\n";

DepGraph monkey() { return parse_conllu(kMonkey).at(0); }

std::set<std::pair<std::size_t, Temporal>> tagged(const std::vector<EdgeRef>& edges) {
  std::set<std::pair<std::size_t, Temporal>> out;
  for (const auto& e : edges) out.emplace(e.source, e.temporal);
  return out;
}

TEST(Conllu, MonkeySentenceEdges) {
  const auto g = monkey();
  EXPECT_EQ(g.sentence_id(), "monkey");
  EXPECT_EQ(g.tokens(), (std::vector<std::string>{"monkey", "likes", "eating", "bananas"}));
  ASSERT_EQ(g.edges().size(), 3u);
  EXPECT_EQ(g.edges()[0], (DepEdge{0, 1, "nsubj"}));
  EXPECT_EQ(g.edges()[1], (DepEdge{2, 1, "xcomp"}));
  EXPECT_EQ(g.edges()[2], (DepEdge{3, 2, "obj"}));
  EXPECT_TRUE(g.is_tree());
}

TEST(Conllu, EmptyInput) { EXPECT_TRUE(parse_conllu("").empty()); }

TEST(Conllu, SingleRootToken) {
  const auto gs = parse_conllu("1\thello\t_\t_\t_\t_\t0\troot\t_\t_\n");
  ASSERT_EQ(gs.size(), 1u);
  EXPECT_EQ(gs[0].size(), 1u);
  EXPECT_TRUE(gs[0].edges().empty());
  EXPECT_EQ(gs[0].sentence_id(), "1");
}

TEST(Conllu, SkipsMultiwordRangesAndEmptyNodes) {
  const auto gs = parse_conllu(
      "1-2\tdella\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdi\t_\t_\t_\t_\t2\tcase\t_\t_\n"
      "2\tla\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n");
  ASSERT_EQ(gs.size(), 1u);
  EXPECT_EQ(gs[0].tokens(), (std::vector<std::string>{"di", "la"}));
}

TEST(Conllu, ColumnCountErrorCarriesLine) {
  try {
    parse_conllu("# c\n1\tonly\tthree\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Conllu, HeadOutOfRange) {
  EXPECT_THROW(parse_conllu("1\ta\t_\t_\t_\t_\t5\tdep\t_\t_\n"), ParseError);
}

TEST(Conllu, MultipleSentencesNumbered) {
  const std::string two = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n\n1\tb\t_\t_\t_\t_\t0\troot\t_\t_\n";
  const auto gs = parse_conllu(two);
  ASSERT_EQ(gs.size(), 2u);
  EXPECT_EQ(gs[1].sentence_id(), "2");
}

TEST(Conllu, WriteThenParseKeepsTokensAndEdges) {
  const auto gs = parse_conllu(kMonkey);
  const auto back = parse_conllu(write_conllu(gs));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].tokens(), gs[0].tokens());
  EXPECT_EQ(back[0].edges(), gs[0].edges());
}

TEST(DepGraph, RejectsBadEdges) {
  EXPECT_THROW(DepGraph({"a", "b"}, {{0, 2, ""}}), ArgumentError);
  EXPECT_THROW(DepGraph({"a", "b"}, {{1, 1, ""}}), ArgumentError);
}

TEST(DepGraph, DuplicatePairKeepsFirstLabel) {
  DepGraph g({"a", "b"}, {{0, 1, "x"}, {0, 1, "y"}});
  EXPECT_EQ(g.edges().size(), 1u);
  EXPECT_EQ(g.label_of(0, 1), "x");
}

TEST(IncomingEdges, LikesForwardTotal) {
  const auto edges = incoming_edges(monkey(), 1, Traversal::forward, EdgeFilter::total);
  EXPECT_EQ(edges, (std::vector<EdgeRef>{{0, 1, Temporal::past}, {1, 1, Temporal::self}, {2, 1, Temporal::future}}));
}

TEST(IncomingEdges, LikesBackwardPastOnly) {
  const auto edges = incoming_edges(monkey(), 1, Traversal::backward, EdgeFilter::past_only);
  EXPECT_EQ(edges, (std::vector<EdgeRef>{{1, 1, Temporal::self}, {2, 1, Temporal::past}}));
}

TEST(IncomingEdges, IsolatedTokenHasOnlySelf) {
  DepGraph g({"a", "b", "c"}, {{0, 1, ""}});
  for (auto f : {EdgeFilter::total, EdgeFilter::past_only, EdgeFilter::future_only}) {
    EXPECT_EQ(incoming_edges(g, 2, Traversal::forward, f), (std::vector<EdgeRef>{{2, 2, Temporal::self}}));
  }
}

TEST(IncomingEdges, InvalidPosition) {
  EXPECT_THROW(incoming_edges(monkey(), 4, Traversal::forward, EdgeFilter::total), ArgumentError);
}

DepGraph random_graph(Rng& rng, std::size_t n) {
  std::vector<std::string> tokens(n, "t");
  std::vector<DepEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && rng.bernoulli(0.25)) edges.push_back({i, j, "dep"});
    }
  }
  return DepGraph(tokens, edges);
}

TEST(IncomingEdges, TraversalsAgreeAsSets) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_graph(rng, 1 + rng.below(8));
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto f = incoming_edges(g, j, Traversal::forward, EdgeFilter::total);
      const auto b = incoming_edges(g, j, Traversal::backward, EdgeFilter::total);
      ASSERT_EQ(f.size(), b.size());
      for (std::size_t k = 0; k < f.size(); ++k) {
        EXPECT_EQ(f[k].source, b[k].source);
        const bool self = f[k].source == j;
        EXPECT_EQ(f[k].temporal == Temporal::self, self);
        if (!self) {
          EXPECT_NE(f[k].temporal, b[k].temporal);
          EXPECT_EQ(f[k].temporal == Temporal::past, f[k].source < j);
        }
      }
    }
  }
}

TEST(IncomingEdges, PastAndFutureReconstructTotal) {
  Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_graph(rng, 1 + rng.below(8));
    for (std::size_t j = 0; j < g.size(); ++j) {
      for (auto dir : {Traversal::forward, Traversal::backward}) {
        auto past = tagged(incoming_edges(g, j, dir, EdgeFilter::past_only));
        const auto future = tagged(incoming_edges(g, j, dir, EdgeFilter::future_only));
        EXPECT_TRUE(past.count({j, Temporal::self}));
        EXPECT_TRUE(future.count({j, Temporal::self}));
        past.insert(future.begin(), future.end());
        EXPECT_EQ(past, tagged(incoming_edges(g, j, dir, EdgeFilter::total)));
      }
    }
  }
}

}  // namespace
}  // namespace rgse
