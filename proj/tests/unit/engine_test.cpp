#include <gtest/gtest.h>

#include <set>

#include "chartduel/engine.hpp"
#include "chartduel/errors.hpp"

using namespace chartduel;
using namespace chartduel::engine;

namespace {

series::ReturnSequence walk(std::size_t n, std::uint64_t seed, double base = 100.0) {
  SplitMix64 rng(seed);
  series::ReturnSequence r;
  r.base_price = base;
  r.returns.resize(n);
  for (auto& v : r.returns) v = standard_normal(rng);
  return r;
}

ContestConfig small(Mode mode, std::string id = "c1") {
  ContestConfig c;
  c.contest_id = std::move(id);
  c.dataset_codename = "Lynx";
  c.mode = mode;
  c.points_per_chart = 10;
  c.points_per_screen = 5;
  c.charts_per_subject = 4;
  c.tick_interval = std::chrono::milliseconds(100);
  c.seed = 42;
  return c;
}

// Plays every trial of a session, guessing the real slot on the first
// `correct` trials and the wrong one afterwards.
void play(Engine& e, const std::string& sid, int correct, TimestampMs& now) {
  auto s = e.session(sid);
  for (std::size_t k = 0; k < s.trials.size(); ++k) {
    auto charts = e.begin_trial(sid, now);
    const Slot real = real_slot(e.session(sid).trials[k].placement);
    const Slot other = real == Slot::kTop ? Slot::kBottom : Slot::kTop;
    e.submit_guess(sid, charts.trial_id, static_cast<int>(k) < correct ? real : other, ++now);
  }
}

}  // namespace

TEST(CreateContest, TickCapacityArithmetic) {
  Engine e;
  ContestConfig c = small(Mode::kTick);
  c.points_per_chart = 80;
  c.points_per_screen = 40;
  c.charts_per_subject = 35;
  e.create_contest(c, walk(280'000, 1));
  EXPECT_EQ(e.plan_capacity("c1"), 100u);  // 280000 / (35*80)
  EXPECT_EQ(e.plans_remaining("c1"), 100u);
}

TEST(CreateContest, TickTooShortIsCapacityError) {
  Engine e;
  EXPECT_THROW(e.create_contest(small(Mode::kTick), walk(39, 1)), CapacityError);
}

TEST(CreateContest, DailyNeedsOneChart) {
  Engine e;
  EXPECT_NO_THROW(e.create_contest(small(Mode::kDaily), walk(10, 1)));
  EXPECT_THROW(e.create_contest(small(Mode::kDaily, "c2"), walk(9, 1)), CapacityError);
}

TEST(CreateContest, AllZeroReturnsRejected) {
  Engine e;
  series::ReturnSequence zeros{std::vector<double>(1000, 0.0), 100, 0};
  EXPECT_THROW(e.create_contest(small(Mode::kDaily), zeros), std::invalid_argument);
  EXPECT_THROW(e.create_contest(small(Mode::kTick), zeros), std::invalid_argument);
}

TEST(CreateContest, DuplicateIdRejected) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(100, 1));
  EXPECT_THROW(e.create_contest(small(Mode::kDaily), walk(100, 2)), std::invalid_argument);
}

TEST(CreateContest, DegenerateChunksSkipped) {
  Engine e;
  auto r = walk(80, 3);
  std::fill(r.returns.begin() + 10, r.returns.begin() + 20, 0.5);  // chunk 1 is flat
  e.create_contest(small(Mode::kTick), r);
  EXPECT_EQ(e.plan_capacity("c1"), 1u);  // 7 usable chunks, 4 per plan
}

TEST(ContestConfig, DefaultDeadline) {
  ContestConfig c;
  EXPECT_EQ(c.effective_deadline(), std::chrono::milliseconds(80 * 1000 + 10'000));
  c.guess_deadline = std::chrono::milliseconds(5000);
  EXPECT_EQ(c.effective_deadline(), std::chrono::milliseconds(5000));
}

TEST(StartSession, TickPoolExhaustsAndRejectsDuplicates) {
  Engine e;
  e.create_contest(small(Mode::kTick), walk(80, 1));
  EXPECT_EQ(e.plan_capacity("c1"), 2u);
  e.start_session("alice", "c1", false, 0);
  EXPECT_THROW(e.start_session("alice", "c1", false, 0), StateError);
  e.start_session("bob", "c1", false, 0);
  EXPECT_THROW(e.start_session("carol", "c1", false, 0), StateError);
  EXPECT_EQ(e.plans_remaining("c1"), 0u);
}

TEST(StartSession, ClosedContestRejected) {
  Engine e;
  auto c = small(Mode::kDaily);
  c.start_ms = 1000;
  c.end_ms = 2000;
  e.create_contest(c, walk(50, 1));
  EXPECT_THROW(e.start_session("a", "c1", false, 999), StateError);
  EXPECT_THROW(e.start_session("a", "c1", false, 2001), StateError);
  EXPECT_NO_THROW(e.start_session("a", "c1", false, 1500));
}

TEST(StartSession, SurrogateSharesEndpoints) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  for (const auto& t : e.session(sid).trials) {
    const auto real = t.real_segment.prices();
    ASSERT_EQ(real.size(), 11u);
    ASSERT_EQ(t.surrogate_segment.prices.front(), real.front());
    ASSERT_TRUE(series::approx_equal(t.surrogate_segment.prices.back(), real.back()));
  }
}

TEST(SubmitGuess, ScoringByDefinition) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  auto charts = e.begin_trial(sid, 0);
  const auto placement = e.session(sid).trials[0].placement;
  const Slot real = real_slot(placement);
  auto fb = e.submit_guess(sid, charts.trial_id, real, 1);
  EXPECT_EQ(fb.outcome, Outcome::kCorrect);
  EXPECT_EQ(fb.score, 1);
  EXPECT_EQ(fb.real_slot, real);

  charts = e.begin_trial(sid, 2);
  const Slot wrong = real_slot(e.session(sid).trials[1].placement) == Slot::kTop ? Slot::kBottom
                                                                                 : Slot::kTop;
  fb = e.submit_guess(sid, charts.trial_id, wrong, 3);
  EXPECT_EQ(fb.outcome, Outcome::kIncorrect);
  EXPECT_EQ(fb.score, 1);
}

TEST(SubmitGuess, TopBottomMatchesPlacement) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  auto charts = e.begin_trial(sid, 0);
  const auto sess = e.session(sid);
  const auto& t = sess.trials[0];
  const auto real = t.real_segment.prices();
  const auto& shown = t.placement == Placement::kRealOnTop ? charts.top : charts.bottom;
  EXPECT_TRUE(std::equal(real.begin(), real.end(), shown.begin(), shown.end()));
}

TEST(SubmitGuess, SecondSubmitRejectedWithoutChange) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  auto charts = e.begin_trial(sid, 0);
  e.submit_guess(sid, charts.trial_id, Slot::kTop, 1);
  const auto before = e.session(sid);
  EXPECT_THROW(e.submit_guess(sid, charts.trial_id, Slot::kTop, 2), StateError);
  EXPECT_THROW(e.submit_guess(sid, charts.trial_id, Slot::kBottom, 2), StateError);
  const auto after = e.session(sid);
  EXPECT_EQ(after.score, before.score);
  EXPECT_EQ(after.cursor, before.cursor);
}

TEST(SubmitGuess, UnknownAndOutOfOrderRejected) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  EXPECT_THROW(e.submit_guess(sid, "nope", Slot::kTop, 0), StateError);
  // pending trial: not yet streaming
  EXPECT_THROW(e.submit_guess(sid, sid + "-t0", Slot::kTop, 0), StateError);
  e.begin_trial(sid, 0);
  EXPECT_THROW(e.submit_guess(sid, sid + "-t1", Slot::kTop, 0), StateError);
  EXPECT_EQ(e.session(sid).cursor, 0u);
}

TEST(ExpireTrial, TimeoutFolding) {
  Engine e;
  auto cfg = small(Mode::kDaily);
  cfg.charts_per_subject = 35;
  e.create_contest(cfg, walk(500, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  const auto deadline = cfg.effective_deadline().count();
  TimestampMs now = 0;
  int correct = 0;
  for (int k = 0; k < 35; ++k) {
    auto charts = e.begin_trial(sid, now);
    const Slot real = real_slot(e.session(sid).trials[k].placement);
    if (k < 5) {
      EXPECT_THROW(e.expire_trial(sid, charts.trial_id, now + deadline - 1), StateError);
      e.expire_trial(sid, charts.trial_id, now + deadline);
      now += deadline;
    } else if (correct < 20) {
      e.submit_guess(sid, charts.trial_id, real, ++now);
      ++correct;
    } else {
      e.submit_guess(sid, charts.trial_id, real == Slot::kTop ? Slot::kBottom : Slot::kTop, ++now);
    }
  }
  auto recs = e.subject_records("c1");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].correct, 20);
  EXPECT_EQ(recs[0].assigned, 35);
  EXPECT_EQ(recs[0].answered, 30);
}

TEST(ExpireTrial, AllTimedOut) {
  Engine e;
  auto cfg = small(Mode::kDaily);
  cfg.charts_per_subject = 35;
  e.create_contest(cfg, walk(500, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  e.forfeit(sid, 10);
  auto recs = e.subject_records("c1");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].correct, 0);
  EXPECT_EQ(recs[0].assigned, 35);
  EXPECT_EQ(recs[0].answered, 0);
}

TEST(ExpireTrial, LateGuessRejected) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  auto charts = e.begin_trial(sid, 0);
  const auto deadline = e.trial_deadline(sid);
  EXPECT_THROW(e.submit_guess(sid, charts.trial_id, Slot::kTop, deadline + 1), StateError);
  e.expire_trial(sid, charts.trial_id, deadline);
  EXPECT_THROW(e.submit_guess(sid, charts.trial_id, Slot::kTop, deadline), StateError);
  EXPECT_EQ(e.session(sid).trials[0].state, TrialState::kResolvedTimeout);
}

TEST(Leaderboard, TieBrokenByCompletionTime) {
  Engine e;
  auto cfg = small(Mode::kDaily);
  cfg.charts_per_subject = 30;
  e.create_contest(cfg, walk(500, 5));
  TimestampMs now = 0;
  auto late = e.start_session("zed", "c1", false, 0);
  auto early = e.start_session("amy", "c1", false, 0);
  auto low = e.start_session("bo", "c1", false, 0);
  play(e, early, 30, now);
  play(e, late, 30, now);
  play(e, low, 12, now);
  auto lb = e.leaderboard("c1");
  ASSERT_EQ(lb.size(), 3u);
  EXPECT_EQ(lb[0].subject_id, "amy");
  EXPECT_EQ(lb[1].subject_id, "zed");
  EXPECT_EQ(lb[2].subject_id, "bo");
  EXPECT_EQ(lb[0].score, 30);
  EXPECT_LT(lb[0].completed_at, lb[1].completed_at);
}

TEST(Leaderboard, EmptyWithoutCompletedSessions) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  e.start_session("a", "c1", false, 0);
  EXPECT_TRUE(e.leaderboard("c1").empty());
}

TEST(Practice, NeverReachesAggregate) {
  std::vector<GuessEvent> events;
  Engine e([&](const GuessEvent& ev) { events.push_back(ev); });
  e.create_contest(small(Mode::kTick), walk(80, 1), walk(50, 2));
  TimestampMs now = 0;
  auto p1 = e.start_session("a", "c1", true, 0);
  auto p2 = e.start_session("a", "c1", true, 0);  // practice may repeat
  play(e, p1, 4, now);
  play(e, p2, 4, now);
  EXPECT_EQ(e.plans_remaining("c1"), 2u);  // practice takes no plan
  EXPECT_TRUE(e.subject_records("c1").empty());
  EXPECT_TRUE(e.leaderboard("c1").empty());
  EXPECT_FALSE(e.live_result("c1").result.has_value());
  ASSERT_EQ(events.size(), 8u);
  for (const auto& ev : events) EXPECT_TRUE(ev.practice);
}

TEST(Practice, UsesReservedSliceOnly) {
  Engine e;
  auto scoring = walk(80, 1);
  auto practice = walk(50, 2);
  practice.origin_index = 80;
  e.create_contest(small(Mode::kTick), scoring, practice);
  auto sid = e.start_session("a", "c1", true, 0);
  for (const auto& t : e.session(sid).trials) {
    for (double r : t.real_returns.returns) {
      ASSERT_NE(std::find(practice.returns.begin(), practice.returns.end(), r),
                practice.returns.end());
    }
  }
}

TEST(Practice, UnavailableWithoutSlice) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  EXPECT_FALSE(e.contest_info("c1").practice_available);
  EXPECT_THROW(e.start_session("a", "c1", true, 0), StateError);
}

TEST(Disjointness, TickPlansShareNoIndex) {
  Engine e;
  auto cfg = small(Mode::kTick);
  e.create_contest(cfg, walk(100 * 4 * 10, 9));
  std::set<std::size_t> used;
  for (int s = 0; s < 100; ++s) {
    auto sid = e.start_session("s" + std::to_string(s), "c1", false, 0);
    for (const auto& t : e.session(sid).trials) {
      for (std::size_t i = 0; i < t.real_returns.size(); ++i) {
        ASSERT_TRUE(used.insert(t.real_returns.origin_index + i).second);
      }
    }
  }
  EXPECT_EQ(used.size(), 4000u);
}

TEST(Daily, WindowsAreRotationsOfSharedData) {
  Engine e;
  auto data = walk(37, 4);
  e.create_contest(small(Mode::kDaily), data);
  for (int s = 0; s < 5; ++s) {
    auto sid = e.start_session("s" + std::to_string(s), "c1", false, 0);
    const auto sess = e.session(sid);
    const auto rotated = series::rotate(data, sess.rotation);
    for (std::size_t k = 0; k < sess.trials.size(); ++k) {
      const auto expect = series::circular_window(rotated, k * 10, 10);
      ASSERT_EQ(sess.trials[k].real_returns.returns, expect.returns);
    }
  }
}

TEST(Seeds, PermutationSeedsUniqueAcrossSessions) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  std::set<std::uint64_t> seeds;
  for (int s = 0; s < 50; ++s) {
    auto sid = e.start_session("s" + std::to_string(s), "c1", false, 0);
    for (const auto& t : e.session(sid).trials)
      ASSERT_TRUE(seeds.insert(t.surrogate_segment.permutation.seed).second);
  }
}

TEST(Seeds, SameSeedSameContest) {
  auto build = [] {
    Engine e;
    e.create_contest(small(Mode::kDaily), walk(200, 5));
    auto sid = e.start_session("a", "c1", false, 0);
    return e.session(sid);
  };
  auto a = build(), b = build();
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t k = 0; k < a.trials.size(); ++k) {
    EXPECT_EQ(a.trials[k].placement, b.trials[k].placement);
    EXPECT_EQ(a.trials[k].surrogate_segment.prices, b.trials[k].surrogate_segment.prices);
  }
}

TEST(Fairness, PlacementCoinNearHalf) {
  Engine e;
  auto cfg = small(Mode::kDaily);
  cfg.charts_per_subject = 100;
  e.create_contest(cfg, walk(1000, 5));
  int top = 0, total = 0;
  for (int s = 0; s < 100; ++s) {
    auto sid = e.start_session("s" + std::to_string(s), "c1", false, 0);
    for (const auto& t : e.session(sid).trials) {
      top += t.placement == Placement::kRealOnTop;
      ++total;
    }
  }
  EXPECT_EQ(total, 10'000);
  EXPECT_NEAR(static_cast<double>(top) / total, 0.5, 0.015);
}

TEST(Events, TimestampsStrictlyIncreasePerSession) {
  std::vector<GuessEvent> events;
  Engine e([&](const GuessEvent& ev) { events.push_back(ev); });
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  auto sid = e.start_session("a", "c1", false, 0);
  e.forfeit(sid, 500);
  ASSERT_EQ(events.size(), 4u);
  for (std::size_t i = 1; i < events.size(); ++i)
    EXPECT_GT(events[i].timestamp, events[i - 1].timestamp);
  EXPECT_EQ(events[0].choice, Choice::kTimeout);
  EXPECT_EQ(events[0].outcome, Outcome::kIncorrect);
}

TEST(LiveResult, ExcludesLowResponders) {
  Engine e;
  e.create_contest(small(Mode::kDaily), walk(200, 5));
  TimestampMs now = 0;
  auto a = e.start_session("a", "c1", false, 0);
  play(e, a, 3, now);
  auto b = e.start_session("b", "c1", false, now);
  e.forfeit(b, now);
  auto live = e.live_result("c1");
  ASSERT_TRUE(live.result);
  EXPECT_EQ(live.result->subjects, 1);
  EXPECT_EQ(live.result->correct_guesses, 3);
  ASSERT_EQ(live.excluded.size(), 1u);
  EXPECT_EQ(live.excluded[0].subject_id, "b");
}

TEST(EnumStrings, RoundTrip) {
  for (auto m : {Mode::kTick, Mode::kDaily}) EXPECT_EQ(mode_from_string(to_string(m)), m);
  for (auto c : {Choice::kTop, Choice::kBottom, Choice::kTimeout})
    EXPECT_EQ(choice_from_string(to_string(c)), c);
  for (auto p : {Placement::kRealOnTop, Placement::kRealOnBottom})
    EXPECT_EQ(placement_from_string(to_string(p)), p);
  EXPECT_THROW(mode_from_string("weekly"), std::invalid_argument);
}
