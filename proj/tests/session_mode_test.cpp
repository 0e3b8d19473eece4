#include "debugrepair/session_mode.hpp"

#include "session_harness.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace debugrepair;
using testsupport::M;
using testsupport::E;
using testsupport::expected_transition;

TEST(Transition, AllFortyFiveCasesMatchOracle) {
  int cases = 0;
  for (auto m : kAllModes)
    for (auto e : kAllEvents) {
      EXPECT_EQ(transition(m, e), expected_transition(m, e))
          << to_string(m) << " x " << to_string(e);
      ++cases;
    }
  EXPECT_EQ(cases, 45);
}

TEST(Transition, TableIsTheExportedData) {
  const auto &table = transition_table();
  ASSERT_EQ(table.size(), 5u);
  for (std::size_t m = 0; m < table.size(); ++m) {
    ASSERT_EQ(table[m].size(), 9u);
    for (std::size_t e = 0; e < table[m].size(); ++e)
      EXPECT_EQ(table[m][e], transition(kAllModes[m], kAllEvents[e]));
  }
}

TEST(Transition, DocumentedExamples) {
  EXPECT_EQ(transition(M::RuntimeState, E::UncaughtException).next, M::PostMortem);
  EXPECT_EQ(transition(M::PostMortem, E::RestartIssued).next, M::Start);
  EXPECT_EQ(transition(M::RuntimeState, E::ProgramExitOk).next, M::Start);
}

TEST(Transition, AnomalyKeepsMode) {
  for (auto m : kAllModes)
    for (auto e : kAllEvents) {
      const auto r = transition(m, e);
      if (r.anomaly) {
        EXPECT_EQ(r.next, m);
      }
    }
}

TEST(Transition, DoneOnlyViaClosureOrFailure) {
  for (auto m : kAllModes) {
    if (m == M::Done)
      continue;
    for (auto e : kAllEvents)
      if (transition(m, e).next == M::Done) {
        EXPECT_TRUE(e == E::SessionClosed || e == E::BackendFailure);
      }
  }
}

TEST(StateWords, RoundTripAndDistinct) {
  std::set<std::string_view> words;
  for (auto m : kAllModes) {
    const auto w = state_word(m);
    EXPECT_EQ(w.find(' '), std::string_view::npos);
    EXPECT_TRUE(words.insert(w).second);
    EXPECT_EQ(mode_from_state_word(w), m);
  }
  EXPECT_FALSE(mode_from_state_word("paused").has_value());
}

TEST(Names, DisplayNames) {
  EXPECT_EQ(to_string(M::Start), "Start");
  EXPECT_EQ(to_string(M::RuntimeState), "Runtime State");
  EXPECT_EQ(to_string(M::RuntimeError), "Runtime Error");
  EXPECT_EQ(to_string(M::PostMortem), "Post Mortem");
  EXPECT_EQ(to_string(M::Done), "Done");
}
