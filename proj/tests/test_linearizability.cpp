#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "rmwsnap/linearizability.hpp"
#include "rmwsnap/scenario.hpp"

namespace rmwsnap {
namespace {

SequentialSnapshotSpec spec_for(std::vector<std::string> types, std::vector<std::int64_t> init = {}) {
  std::vector<std::optional<ObjectState>> initial;
  for (auto v : init) initial.emplace_back(ObjectState{v});
  return SequentialSnapshotSpec(make_layout(types, initial));
}

LinearizabilityResult check(const std::string& text, const SequentialSnapshotSpec& spec) {
  return check_linearizable(History::parse(text), spec);
}

TEST(Checker, SequentialHistory) {
  auto spec = spec_for({"register", "register"});
  auto r = check(
      "initial [0,0]\n"
      "1 inv p1 update 1 write 7\n"
      "2 res p1 update 1 write 7 -> 0\n"
      "3 inv p1 scan\n"
      "4 res p1 scan -> [7,0]\n",
      spec);
  EXPECT_EQ(r.verdict, Verdict::Linearizable);
  EXPECT_EQ(r.witness, (std::vector<std::size_t>{0, 1}));
}

TEST(Checker, MixedCollectIsRejected) {
  // old MEM[2] with new MEM[3], the MEM[2] change happening first
  auto spec = spec_for({"counter", "counter", "counter", "counter"}, {1, 2, 3, 4});
  auto r = check(
      "initial [1,2,3,4]\n"
      "1 inv p3 scan\n"
      "2 inv p1 update 2 add 1\n"
      "3 res p1 update 2 add 1 -> 3\n"
      "4 inv p2 update 3 add 1\n"
      "5 res p2 update 3 add 1 -> 4\n"
      "6 res p3 scan -> [1,2,4,4]\n",
      spec);
  EXPECT_EQ(r.verdict, Verdict::Violation);
  EXPECT_EQ(r.violating_prefix, 6u);
}

TEST(Checker, PendingUpdateObservedIsCompleted) {
  auto spec = spec_for({"counter", "counter"});
  auto r = check(
      "initial [0,0]\n"
      "1 inv p1 update 1 add 1\n"
      "2 inv p2 scan\n"
      "3 res p2 scan -> [1,0]\n",
      spec);
  EXPECT_EQ(r.verdict, Verdict::Linearizable);
  EXPECT_EQ(r.witness, (std::vector<std::size_t>{0, 1}));
}

TEST(Checker, PendingUpdateMayBeDropped) {
  auto spec = spec_for({"counter"});
  auto r = check(
      "initial [0]\n"
      "1 inv p1 update 1 add 1\n"
      "2 inv p2 scan\n"
      "3 res p2 scan -> [0]\n",
      spec);
  EXPECT_TRUE(r.linearizable());
}

TEST(Checker, StaleScanAfterCompletedUpdate) {
  auto spec = spec_for({"counter"});
  auto r = check(
      "initial [0]\n"
      "1 inv p1 update 1 add 1\n"
      "2 res p1 update 1 add 1 -> 1\n"
      "3 inv p2 scan\n"
      "4 res p2 scan -> [0]\n",
      spec);
  EXPECT_EQ(r.verdict, Verdict::Violation);
  EXPECT_EQ(r.violating_prefix, 4u);
}

TEST(Checker, MinimalPrefixIsShortest) {
  auto spec = spec_for({"counter"});
  auto r = check(
      "initial [0]\n"
      "1 inv p1 update 1 add 1\n"
      "2 res p1 update 1 add 1 -> 5\n"
      "3 inv p2 scan\n"
      "4 res p2 scan -> [1]\n"
      "5 inv p2 scan\n"
      "6 res p2 scan -> [1]\n",
      spec);
  EXPECT_EQ(r.verdict, Verdict::Violation);
  EXPECT_EQ(r.violating_prefix, 2u);
}

TEST(Checker, WrongResultRejected) {
  auto spec = spec_for({"counter"});
  EXPECT_FALSE(check("initial [0]\n1 inv p1 update 1 fetch_add 2\n2 res p1 update 1 fetch_add 2 -> 2\n", spec)
                   .linearizable());
  EXPECT_TRUE(check("initial [0]\n1 inv p1 update 1 fetch_add 2\n2 res p1 update 1 fetch_add 2 -> 0\n", spec)
                  .linearizable());
}

TEST(Checker, OkResultsMatchAnything) {
  auto spec = spec_for({"counter"});
  EXPECT_TRUE(check("initial [0]\n1 inv p1 update 1 add 2\n2 res p1 update 1 add 2 -> ok\n"
                    "3 inv p1 scan\n4 res p1 scan -> [2]\n",
                    spec)
                  .linearizable());
}

TEST(Checker, MalformedHistoryNamesEvent) {
  auto spec = spec_for({"counter"});
  auto h = History::parse("initial [0]\n1 inv p1 scan\n2 inv p1 scan\n");
  try {
    check_linearizable(h, spec);
    FAIL() << "expected a rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("event 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(History::parse("initial [0]\n1 res p1 scan -> [0]\n").validate(), std::invalid_argument);
  EXPECT_THROW(History::parse("initial [0]\n2 inv p1 scan\n1 res p1 scan -> [0]\n"), std::invalid_argument);
}

TEST(Checker, Deterministic) {
  auto spec = spec_for({"counter", "counter"});
  auto text =
      "initial [0,0]\n1 inv p1 update 1 add 1\n2 inv p2 update 2 add 1\n3 inv p3 scan\n"
      "4 res p1 update 1 add 1 -> 1\n5 res p3 scan -> [0,1]\n6 res p2 update 2 add 1 -> 1\n";
  auto a = check(text, spec);
  auto b = check(text, spec);
  EXPECT_EQ(a.verdict, b.verdict);
  EXPECT_EQ(a.witness, b.witness);
  EXPECT_EQ(a.nodes, b.nodes);
}

// ---- timeline oracle

TEST(Timeline, QuiescentScanPasses) {
  auto spec = spec_for({"counter"});
  auto h = History::parse("initial [3]\n1 inv p1 scan\n2 step p1 rM 1 3\n3 res p1 scan -> [3]\n");
  EXPECT_TRUE(timeline_oracle_check(h, spec).pass);
}

TEST(Timeline, SingleMutationDuringCollectEitherValue) {
  auto spec = spec_for({"counter", "counter"});
  for (const char* seen : {"[0,0]", "[1,0]"}) {
    auto h = History::parse(std::string("initial [0,0]\n"
                                        "1 inv p2 scan\n"
                                        "2 inv p1 update 1 add 1\n"
                                        "3 step p1 aM 1 add 1 -> 1 = 1\n"
                                        "4 res p1 update 1 add 1 -> 1\n"
                                        "5 res p2 scan -> ") +
                            seen + "\n");
    EXPECT_TRUE(timeline_oracle_check(h, spec).pass) << seen;
    EXPECT_TRUE(cross_validate(h, spec).clean()) << seen;
  }
}

TEST(Timeline, MixedCollectFails) {
  auto spec = spec_for({"counter", "counter", "counter", "counter"}, {1, 2, 3, 4});
  auto h = History::parse(
      "initial [1,2,3,4]\n"
      "1 inv p3 scan\n"
      "2 inv p1 update 2 add 1\n"
      "3 step p1 aM 2 add 1 -> 3 = 3\n"
      "4 res p1 update 2 add 1 -> 3\n"
      "5 inv p2 update 3 add 1\n"
      "6 step p2 aM 3 add 1 -> 4 = 4\n"
      "7 res p2 update 3 add 1 -> 4\n"
      "8 res p3 scan -> [1,2,4,4]\n");
  auto t = timeline_oracle_check(h, spec);
  EXPECT_FALSE(t.pass);
  EXPECT_EQ(t.operation, 0u);
}

TEST(Timeline, ViewValidOutsideIntervalFailsBoth) {
  auto spec = spec_for({"counter"});
  auto h = History::parse(
      "initial [0]\n"
      "1 inv p1 update 1 add 1\n"
      "2 step p1 aM 1 add 1 -> 1 = 1\n"
      "3 res p1 update 1 add 1 -> 1\n"
      "4 inv p2 scan\n"
      "5 step p2 rM 1 1\n"
      "6 res p2 scan -> [0]\n");
  auto cv = cross_validate(h, spec);
  EXPECT_FALSE(cv.timeline.pass);
  EXPECT_EQ(cv.checker.verdict, Verdict::Violation);
  EXPECT_TRUE(cv.agree);
}

TEST(Timeline, UpdateWithoutMutationFails) {
  auto spec = spec_for({"counter"});
  auto h = History::parse("initial [0]\n1 inv p1 update 1 add 1\n2 res p1 update 1 add 1 -> 1\n");
  EXPECT_FALSE(timeline_oracle_check(h, spec).pass);
}

TEST(Timeline, StricterThanChecker) {
  // the scan may be ordered before the update, but MEM already changed
  auto spec = spec_for({"counter"});
  auto h = History::parse(
      "initial [0]\n"
      "1 inv p1 update 1 add 1\n"
      "2 step p1 aM 1 add 1 -> 1 = 1\n"
      "3 inv p2 scan\n"
      "4 res p2 scan -> [0]\n"
      "5 res p1 update 1 add 1 -> 1\n");
  auto cv = cross_validate(h, spec);
  EXPECT_FALSE(cv.timeline.pass);
  EXPECT_TRUE(cv.checker.linearizable());
  EXPECT_TRUE(cv.agree);
}

TEST(HistoryText, RoundTrip) {
  auto text = std::string(
      "initial [0,[]]\n"
      "1 inv p1 update 2 append 4\n"
      "2 step p1 rT 1 0\n"
      "3 step p1 wH 1 [0,[]]\n"
      "4 step p1 aM 2 append 4 -> 1 = [4]\n"
      "5 res p1 update 2 append 4 -> 1\n"
      "6 inv p2 scan\n"
      "7 step p2 rH 1 bottom\n"
      "8 res p2 scan -> [0,[4]]\n");
  auto h = History::parse(text);
  EXPECT_EQ(h.serialize(), text);
  EXPECT_EQ(h.mutations().size(), 1u);
  EXPECT_EQ(h.state_at(3), (std::vector<ObjectState>{std::int64_t{0}, std::vector<std::int64_t>{}}));
  EXPECT_EQ(h.state_at(4), (std::vector<ObjectState>{std::int64_t{0}, std::vector<std::int64_t>{4}}));
}

TEST(HistoryText, ParseErrorNamesLine) {
  try {
    History::parse("initial [0]\n1 inv p1 scan\n2 bogus p1\n");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

// ---- brute force over completions and permutations

struct Op {
  ProcessId p;
  Operation op;
  StepIndex inv = 0;
  std::optional<StepIndex> res;
  OpResult result = 0;
  std::vector<std::int64_t> view;
};

// counter + register, written out independently of the library's types
bool legal_sequence(const std::vector<const Op*>& order) {
  std::vector<std::int64_t> state{0, 0};
  for (const auto* o : order) {
    if (o->op.is_scan()) {
      if (o->res && o->view != state) return false;
      continue;
    }
    auto& cell = state[o->op.k];
    std::int64_t out = 0;
    const auto& name = o->op.op.name;
    auto arg = o->op.op.args[0];
    if (name == "add") {
      cell += arg;
      out = cell;
    } else if (name == "fetch_add") {
      out = cell;
      cell += arg;
    } else {
      cell = arg;
      out = 0;
    }
    if (o->res && out != o->result) return false;
  }
  return true;
}

bool brute_force(const std::vector<Op>& ops) {
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (!ops[i].res) pending.push_back(i);
  }
  for (std::uint32_t mask = 0; mask < (1u << pending.size()); ++mask) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (ops[i].res) chosen.push_back(i);
    }
    for (std::size_t b = 0; b < pending.size(); ++b) {
      if (mask & (1u << b)) chosen.push_back(pending[b]);
    }
    std::sort(chosen.begin(), chosen.end());
    do {
      bool real_time = true;
      for (std::size_t a = 0; a < chosen.size() && real_time; ++a) {
        for (std::size_t b = a + 1; b < chosen.size(); ++b) {
          const auto& later = ops[chosen[a]];
          const auto& earlier = ops[chosen[b]];
          if (earlier.res && *earlier.res < later.inv) {
            real_time = false;
            break;
          }
        }
      }
      if (!real_time) continue;
      std::vector<const Op*> order;
      for (auto i : chosen) order.push_back(&ops[i]);
      if (legal_sequence(order)) return true;
    } while (std::next_permutation(chosen.begin(), chosen.end()));
  }
  return false;
}

// Runs random operations through invoke / take effect / respond phases,
// then perhaps drops trailing responses and corrupts one result.
std::vector<Op> random_history(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto processes = pick(2, 3);
  auto total = pick(2, 8);
  std::vector<Op> ops;
  std::vector<std::int64_t> state{0, 0};
  std::vector<int> stage(processes, 0);
  std::vector<std::size_t> current(processes, 0);
  int started = 0;
  StepIndex clock = 0;
  while (true) {
    std::vector<int> ready;
    for (int p = 0; p < processes; ++p) {
      if (stage[p] != 0 || started < total) ready.push_back(p);
    }
    if (ready.empty()) break;
    auto p = ready[pick(0, static_cast<int>(ready.size()) - 1)];
    if (stage[p] == 0) {
      Op o;
      o.p = ProcessId(static_cast<std::uint32_t>(p + 1));
      auto kind = pick(0, 3);
      if (kind == 0) {
        o.op = Operation::scan();
      } else if (kind == 1) {
        o.op = Operation::update(0, {"add", {pick(1, 2)}});
      } else if (kind == 2) {
        o.op = Operation::update(0, {"fetch_add", {pick(1, 2)}});
      } else {
        o.op = Operation::update(1, {"write", {pick(0, 2)}});
      }
      o.inv = ++clock;
      current[p] = ops.size();
      ops.push_back(o);
      ++started;
      stage[p] = 1;
    } else if (stage[p] == 1) {
      auto& o = ops[current[p]];
      if (o.op.is_scan()) {
        o.view = state;
      } else if (o.op.op.name == "add") {
        state[0] += o.op.op.args[0];
        o.result = state[0];
      } else if (o.op.op.name == "fetch_add") {
        o.result = state[0];
        state[0] += o.op.op.args[0];
      } else {
        state[1] = o.op.op.args[0];
      }
      stage[p] = 2;
    } else {
      ops[current[p]].res = ++clock;
      stage[p] = 0;
    }
  }
  // drop some final responses
  for (int p = 0; p < processes; ++p) {
    if (pick(0, 4) != 0) continue;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
      if (it->p.index() == static_cast<std::uint32_t>(p + 1)) {
        it->res.reset();
        break;
      }
    }
  }
  if (pick(0, 1) == 0) {
    std::vector<std::size_t> done;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (ops[i].res) done.push_back(i);
    }
    if (!done.empty()) {
      auto& o = ops[done[pick(0, static_cast<int>(done.size()) - 1)]];
      auto delta = pick(0, 1) ? 1 : -1;
      if (o.op.is_scan()) {
        o.view[pick(0, 1)] += delta;
      } else {
        o.result += delta;
      }
    }
  }
  return ops;
}

History to_history(const std::vector<Op>& ops) {
  std::vector<Event> events;
  for (const auto& o : ops) {
    Event inv;
    inv.index = o.inv;
    inv.kind = EventKind::Invocation;
    inv.process = o.p;
    inv.operation = o.op;
    events.push_back(inv);
    if (!o.res) continue;
    Event res = inv;
    res.index = *o.res;
    res.kind = EventKind::Response;
    if (o.op.is_scan()) {
      res.view = std::make_shared<const SnapshotView>(std::vector<ObjectState>(o.view.begin(), o.view.end()));
    } else {
      res.result = o.result;
    }
    events.push_back(res);
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.index < b.index; });
  History h(std::vector<ObjectState>{std::int64_t{0}, std::int64_t{0}});
  for (auto& e : events) h.append(e);
  return h;
}

TEST(CheckerProperty, AgreesWithBruteForceOnSmallHistories) {
  auto spec = spec_for({"counter", "register"});
  std::mt19937_64 rng(20240611);
  int linearizable = 0;
  int violations = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    auto ops = random_history(rng);
    auto history = to_history(ops);
    bool expected = brute_force(ops);
    auto got = check_linearizable(history, spec);
    ASSERT_NE(got.verdict, Verdict::Unknown);
    ASSERT_EQ(got.linearizable(), expected) << history.serialize();
    (expected ? linearizable : violations)++;

    // the online monitor fed the same events ends with the same verdict
    LinearizabilityMonitor monitor(spec, 3);
    bool ok = true;
    for (const auto& e : history.events()) {
      if (e.kind == EventKind::Invocation) monitor.invoke(e.process, e.operation);
      if (e.kind == EventKind::Response) ok = monitor.respond(e.process, e.result, e.view) && ok;
    }
    ASSERT_EQ(ok && monitor.ok(), expected) << history.serialize();
  }
  // both outcomes are exercised
  EXPECT_GT(linearizable, 300);
  EXPECT_GT(violations, 150);
}

TEST(CheckerProperty, WitnessIsALegalOrder) {
  auto spec = spec_for({"counter", "register"});
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto ops = random_history(rng);
    auto r = check_linearizable(to_history(ops), spec);
    if (!r.linearizable()) continue;
    std::vector<const Op*> order;
    for (auto id : r.witness) order.push_back(&ops[id]);
    EXPECT_TRUE(legal_sequence(order));
    for (std::size_t a = 0; a < order.size(); ++a) {
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        if (order[b]->res) {
          EXPECT_FALSE(*order[b]->res < order[a]->inv);
        }
      }
    }
  }
}

}  // namespace
}  // namespace rmwsnap
