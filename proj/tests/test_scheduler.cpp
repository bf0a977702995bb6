#include <doctest.h>

#include "svm/error.hpp"
#include "svm/event.hpp"
#include "svm/peripherals.hpp"
#include "rendezvous_model.hpp"
#include "testkit.hpp"

using namespace svm;
using svmtest::records;

namespace {

// A VM whose main context is current, for driving the scheduler by hand.
struct Harness {
  Vm vm;
  Context* main;

  explicit Harness(RunConfig cfg = {}) : vm(assemble_program("main: STOP\n"), cfg) {
    main = vm.scheduler().dispatch_new_thread();
    REQUIRE(main);
  }
  Heap& heap() { return vm.heap(); }
  ChannelTable& channels() { return vm.channels(); }
};

svmtest::RunResult checked_run(const std::string& src, std::string_view scn = {}, RunConfig cfg = {}) {
  auto program = assemble_program(src);
  auto vm = std::make_unique<Vm>(program, cfg);
  std::uint64_t checks = 0;
  vm->set_step_observer([&](const Vm& v) {
    v.check_invariants();
    ++checks;
  });
  svmtest::RunResult r;
  if (scn.empty()) {
    r.report = run_scenario(*vm, nullptr);
  } else {
    Scenario sc = load_scenario(scn);
    r.report = run_scenario(*vm, &sc);
  }
  r.vm = std::move(vm);
  CHECK(checks == r.vm->steps());
  return r;
}

std::vector<std::string> field(const Trace& t, std::string_view kind, std::string_view key) {
  std::vector<std::string> out;
  for (const auto& r : records(t, kind)) out.emplace_back(r.get(key));
  return out;
}

// E = (((), ch0), go). main waits on go while s1 and s2 block sending 1 and
// 2 on ch0; s3 releases main through go and then sends 3.
const char* kFifo =
    ".const one 1\n.const two 2\n.const three 3\n"
    "main: PUSH\nCHANNEL\nCONS\nPUSH\nCHANNEL\nCONS\n"
    "    PUSH\n    SPAWN s1\n    SWAP\n    PUSH\n    SPAWN s2\n    SWAP\n    PUSH\n    SPAWN s3\n    SWAP\n"
    "    PUSH\n    ACC 0\n    RECVEVT\n    SYNC\n    SWAP\n"
    "    PUSH\n    ACC 1\n    RECVEVT\n    SYNC\n    SWAP\n"
    "    PUSH\n    ACC 1\n    RECVEVT\n    SYNC\n    SWAP\n"
    "    PUSH\n    ACC 1\n    RECVEVT\n    SYNC\n    STOP\n"
    "s1: FST\n    ACC 1\n    PUSH\n    LOADI one\n    SENDEVT\n    SYNC\n    STOP\n"
    "s2: FST\n    ACC 1\n    PUSH\n    LOADI two\n    SENDEVT\n    SYNC\n    STOP\n"
    "s3: FST\n    PUSH\n    ACC 0\n    PUSH\n    LOADI three\n    SENDEVT\n    SYNC\n"
    "    SWAP\n    ACC 1\n    PUSH\n    LOADI three\n    SENDEVT\n    SYNC\n    STOP\n";

const std::string kDrivers = "driver led0 led\ndriver led1 led\ndriver but0 button\ndriver but1 button\n";

}  // namespace

TEST_CASE("find on the empty event list finds nothing") {
  Harness h;
  CHECK_FALSE(h.vm.scheduler().find_synchronisable_event(Value::unit()));
}

TEST_CASE("block enqueues every base event under one dirty flag") {
  Harness h;
  ChannelId a = h.channels().create(), b = h.channels().create(), c = h.channels().create();
  Value ev = choose(h.heap(), recv_evt(h.heap(), h.channels(), a),
                    choose(h.heap(), send_evt(h.heap(), h.channels(), b, Value::integer(1)),
                           recv_evt(h.heap(), h.channels(), c)));
  h.main->env = ev;  // keep it rooted
  CHECK(h.vm.scheduler().sync(*h.main, ev) == SyncResult::Blocked);
  CHECK(h.main->state == ContextState::Blocked);
  CHECK(h.vm.scheduler().current() == nullptr);
  CHECK(h.vm.scheduler().asleep());

  const auto& qa = h.channels().at(a).recvq;
  const auto& qb = h.channels().at(b).sendq;
  const auto& qc = h.channels().at(c).recvq;
  REQUIRE(qa.size() == 1);
  REQUIRE(qb.size() == 1);
  REQUIRE(qc.size() == 1);
  CHECK(qa[0].dirty == qb[0].dirty);
  CHECK(qb[0].dirty == qc[0].dirty);
  CHECK_FALSE(h.heap().dirty(qa[0].dirty));
  CHECK(h.vm.scheduler().first_wait_channel(h.main->tid()) == a);
  CHECK(records(h.vm.trace(), "block").back().get("entries") == "3");
  CHECK(records(h.vm.trace(), "sleep").size() == 1);
}

TEST_CASE("a full channel queue is a resource error") {
  RunConfig cfg;
  cfg.chan_queue_cap = 1;
  Harness h(cfg);
  ChannelId a = h.channels().create();
  Value ev = recv_evt(h.heap(), h.channels(), a);
  h.channels().at(a).recvq.push_back(QueueEntry{ThreadId{7}, event_records(h.heap(), ev)[0],
                                                h.heap().alloc(Value::unit(), Value::unit())});
  CHECK_THROWS_WITH_AS(h.vm.scheduler().sync(*h.main, ev), doctest::Contains("ChannelQueueFull"), Error);
}

TEST_CASE("dirty entries are purged before a queue counts as full") {
  RunConfig cfg;
  cfg.chan_queue_cap = 1;
  Harness h(cfg);
  ChannelId a = h.channels().create();
  Value ev = recv_evt(h.heap(), h.channels(), a);
  CellRef flag = h.heap().alloc(Value::unit(), Value::unit());
  h.heap().set_dirty(flag);
  h.channels().at(a).recvq.push_back(QueueEntry{ThreadId{7}, event_records(h.heap(), ev)[0], flag});
  h.main->env = ev;
  CHECK(h.vm.scheduler().sync(*h.main, ev) == SyncResult::Blocked);
  REQUIRE(h.channels().at(a).recvq.size() == 1);
  CHECK(h.channels().at(a).recvq[0].tid == h.main->tid());
  CHECK(h.vm.scheduler().stats().dirty_discarded == 1);
}

TEST_CASE("dirty partners are discarded lazily during find") {
  Harness h;
  ChannelId a = h.channels().create();
  Value send = send_evt(h.heap(), h.channels(), a, Value::integer(1));
  CellRef flag = h.heap().alloc(Value::unit(), Value::unit());
  h.heap().set_dirty(flag);
  h.channels().at(a).sendq.push_back(QueueEntry{ThreadId{7}, event_records(h.heap(), send)[0], flag});
  Value recv = recv_evt(h.heap(), h.channels(), a);
  CHECK_FALSE(h.vm.scheduler().find_synchronisable_event(recv));
  CHECK(h.channels().at(a).sendq.empty());
}

TEST_CASE("senders pair with receivers in FIFO order") {
  auto r = checked_run(kFifo);
  REQUIRE(r.report.reason == ExitReason::Halted);
  std::vector<std::string> on_ch0;
  for (const auto& rec : records(r.vm->trace(), "rendezvous"))
    if (rec.get("ch") == "0") on_ch0.emplace_back(rec.get("msg"));
  CHECK(on_ch0 == std::vector<std::string>{"1", "2", "3"});
  CHECK(*r.vm->main_result() == Value::integer(3));
}

TEST_CASE("choose prefers the leftmost ready event") {
  // Both channels have a blocked sender when main chooses.
  const char* src =
      ".const one 1\n.const two 2\n"
      "main: PUSH\nCHANNEL\nCONS\nPUSH\nCHANNEL\nCONS\nPUSH\nCHANNEL\nCONS\n"  // ((((), a), b), go)
      "    PUSH\n    SPAWN sa\n    SWAP\n    PUSH\n    SPAWN sb\n    SWAP\n    PUSH\n    SPAWN go\n    SWAP\n"
      "    PUSH\n    ACC 0\n    RECVEVT\n    SYNC\n    SWAP\n"
      "    PUSH\n    ACC 2\n    RECVEVT\n    SWAP\n    ACC 1\n    RECVEVT\n    CHOOSE\n    SYNC\n    STOP\n"
      "sa: FST\n    ACC 2\n    PUSH\n    LOADI one\n    SENDEVT\n    SYNC\n    STOP\n"
      "sb: FST\n    ACC 1\n    PUSH\n    LOADI two\n    SENDEVT\n    SYNC\n    STOP\n"
      "go: FST\n    ACC 0\n    PUSH\n    SENDEVT\n    SYNC\n    STOP\n";
  auto r = checked_run(src);
  // sb is still blocked on b, so the run ends in deadlock naming it.
  REQUIRE(r.report.reason == ExitReason::Deadlock);
  CHECK(*r.vm->main_result() == Value::integer(1));
  REQUIRE(r.report.stuck.size() == 1);
  CHECK(r.report.stuck[0].second == ChannelId{1});
}

TEST_CASE("SEND rendezvous switches to the receiver") {
  // main receives; the child sends and must wait behind main.
  const char* src =
      ".const one 1\n"
      "main: PUSH\nCHANNEL\nCONS\n"
      "    PUSH\n    SPAWN child\n    SWAP\n"
      "    ACC 0\n    RECVEVT\n    SYNC\n    STOP\n"
      "child: FST\n    ACC 0\n    PUSH\n    LOADI one\n    SENDEVT\n    SYNC\n    STOP\n";
  auto r = checked_run(src);
  REQUIRE(r.report.reason == ExitReason::Halted);
  auto finishes = field(r.vm->trace(), "finish", "tid");
  CHECK(finishes == std::vector<std::string>{"0", "1"});
  auto rv = records(r.vm->trace(), "rendezvous");
  REQUIRE(rv.size() == 1);
  CHECK(rv[0].get("sender") == "1");
  CHECK(rv[0].get("receiver") == "0");
}

TEST_CASE("RECV rendezvous keeps the receiver running") {
  // main sends first and blocks; the child receives and finishes before main.
  const char* src =
      ".const one 1\n"
      "main: PUSH\nCHANNEL\nCONS\n"
      "    PUSH\n    SPAWN child\n    SWAP\n"
      "    ACC 0\n    PUSH\n    LOADI one\n    SENDEVT\n    SYNC\n    STOP\n"
      "child: FST\n    ACC 0\n    RECVEVT\n    SYNC\n    STOP\n";
  auto r = checked_run(src);
  REQUIRE(r.report.reason == ExitReason::Halted);
  CHECK(field(r.vm->trace(), "finish", "tid") == std::vector<std::string>{"1", "0"});
  CHECK(*r.vm->main_result() == Value::unit());
}

TEST_CASE("dispatch takes the ready queue in order") {
  const char* src =
      "main: PUSH\n    SPAWN a\n    SPAWN b\n    CHANNEL\n    RECVEVT\n    SYNC\n    STOP\n"
      "a: STOP\nb: STOP\n";
  auto r = checked_run(src);
  CHECK(r.report.reason == ExitReason::Deadlock);
  CHECK(field(r.vm->trace(), "dispatch", "tid") == std::vector<std::string>{"0", "1", "2"});
}

TEST_CASE("a send to an LED is always synchronisable") {
  auto r = checked_run(
      ".const one 1\n"
      "main: CHANNEL\n    PUSH\n    PUSH\n    SPAWNX led0\n    SWAP\n    PUSH\n    LOADI one\n    SENDEVT\n"
      "    SYNC\n    STOP\n",
      "driver led0 led\ndriver led1 led\ndriver but0 button\ndriver but1 button\n");
  REQUIRE(r.report.reason == ExitReason::Halted);
  CHECK(svmtest::driver_writes(r.vm->trace(), 0) == std::vector<std::string>{"1"});
  CHECK(records(r.vm->trace(), "block").empty());
}

TEST_CASE("sleep jumps the clock to the next interrupt") {
  auto r = checked_run(
      "main: CHANNEL\n    PUSH\n    SPAWNX but0\n    SWAP\n    RECVEVT\n    SYNC\n    STOP\n",
      kDrivers + std::string("100 but0 press\n"));
  REQUIRE(r.report.reason == ExitReason::Halted);
  CHECK(r.vm->clock().now() == 100);
  CHECK(*r.vm->main_result() == Value::integer(1));
  CHECK(r.vm->steps_while_asleep() == 0);
  auto sleeps = field(r.vm->trace(), "sleep", "steps");
  auto wakes = field(r.vm->trace(), "wake", "steps");
  REQUIRE(sleeps.size() == 1);
  CHECK(sleeps == wakes);
}

TEST_CASE("deadlock names the blocked thread and its channel") {
  auto r = checked_run("main: CHANNEL\n    CHANNEL\n    RECVEVT\n    SYNC\n    STOP\n");
  REQUIRE(r.report.reason == ExitReason::Deadlock);
  REQUIRE(r.report.stuck.size() == 1);
  CHECK(r.report.stuck[0].first == ThreadId{0});
  CHECK(r.report.stuck[0].second == ChannelId{1});
  auto d = records(r.vm->trace(), "deadlock");
  REQUIRE(d.size() == 1);
  CHECK(d[0].get("tid") == "0");
  CHECK(d[0].get("ch") == "1");
}

TEST_CASE("waiting only on drivers with nothing left to come is quiescent") {
  auto r = checked_run("main: CHANNEL\n    PUSH\n    SPAWNX but0\n    SWAP\n    RECVEVT\n    SYNC\n    STOP\n",
                       kDrivers);
  CHECK(r.report.reason == ExitReason::Quiescent);
  CHECK(exit_code(r.report.reason) == 0);
}

TEST_CASE("button data with no receiver is latched once and the excess dropped") {
  // main waits on but1 first; two but0 edges arrive meanwhile.
  const char* src =
      "main: PUSH\nCHANNEL\nCONS\nPUSH\nCHANNEL\nCONS\n"  // (((), b0), b1)
      "    PUSH\n    ACC 1\n    SPAWNX but0\n    SWAP\n    PUSH\n    ACC 0\n    SPAWNX but1\n    SWAP\n"
      "    PUSH\n    ACC 0\n    RECVEVT\n    SYNC\n    SWAP\n"
      "    ACC 1\n    RECVEVT\n    SYNC\n    STOP\n";
  const char* scn =
      "driver led0 led\ndriver led1 led\ndriver but0 button\ndriver but1 button\n"
      "100 but0 press\n150 but0 release\n200 but1 press\n";
  auto r = checked_run(src, scn);
  REQUIRE(r.report.reason == ExitReason::Halted);
  CHECK(*r.vm->main_result() == Value::integer(1));
  auto latch = records(r.vm->trace(), "latch");
  REQUIRE(latch.size() == 1);
  CHECK(latch[0].get("drv") == "2");
  auto drop = records(r.vm->trace(), "drop");
  REQUIRE(drop.size() == 1);
  CHECK(drop[0].get("val") == "0");
  CHECK(drop[0].get("where") == "slot");
  auto reads = records(r.vm->trace(), "drv_read");
  REQUIRE(reads.size() == 1);
  CHECK(reads[0].get("val") == "1");
}

TEST_CASE("a chosen branch leaves its siblings dirty and they never fire") {
  // main repeatedly chooses between a and b; the child only ever sends on a.
  // With room for one entry per queue, b's stale entries must be purged.
  const char* src =
      ".const yes true\n.const one 1\n.const five 5\n"
      "main: PUSH\nCHANNEL\nCONS\nPUSH\nCHANNEL\nCONS\n"  // (((), a), b)
      "    PUSH\n    SPAWN child\n    SWAP\n"
      "loop: PUSH\n    PUSH\n    ACC 1\n    RECVEVT\n    SWAP\n    ACC 0\n    RECVEVT\n    CHOOSE\n    SYNC\n"
      "    PUSH\n    LOADI five\n    EQ\n    GOTOFALSE loop\n    STOP\n"
      "child: FST\n    PUSH\n    LOADI one\n    CONS\n"  // S = (E, n)
      "send: PUSH\n    PUSH\n    FST\n    ACC 1\n    SWAP\n    ACC 0\n    SENDEVT\n    SYNC\n"
      "    LOADI yes\n    GOTOFALSE send\n"  // drops the sync result, env = S
      "    PUSH\n    ACC 0\n    PUSH\n    LOADI five\n    EQ\n    GOTOFALSE next\n    STOP\n"
      "next: PUSH\n    FST\n    SWAP\n    ACC 0\n    PUSH\n    LOADI one\n    ADD\n    CONS\n    GOTO send\n";
  RunConfig cfg;
  cfg.chan_queue_cap = 1;
  auto r = checked_run(src, {}, cfg);
  INFO(r.report.message);
  REQUIRE(r.report.reason == ExitReason::Halted);
  CHECK(field(r.vm->trace(), "rendezvous", "ch") == std::vector<std::string>(5, "0"));
  CHECK(r.vm->scheduler().stats().dirty_discarded >= 3);
}

TEST_CASE("generated sync programs match the reference model") {
  std::mt19937 rng(99);
  for (int i = 0; i < 100; ++i) {
    svmtest::GenLimits lim;
    lim.max_branches = i % 2 ? 4 : 1;
    auto gp = svmtest::random_program(rng, lim, i % 2 == 1);
    std::string src = svmtest::to_assembly(gp);
    INFO(svmtest::describe(gp));
    INFO(src);
    auto r = checked_run(src);
    REQUIRE((r.report.reason == ExitReason::Halted || r.report.reason == ExitReason::Deadlock));
    CHECK(svmtest::observe(*r.vm, r.report, gp) == svmtest::reference_run(gp));
  }
}

TEST_CASE("a message posted while running waits for the next dispatch boundary") {
  Harness h;
  DriverId but = h.vm.bridge().register_driver("but0", std::make_unique<Button>());
  ChannelId c = h.channels().create();
  h.vm.bridge().spawn_external(h.channels(), c, but);
  REQUIRE(h.vm.bridge().queue().post(DriverMessage{but, Value::integer(1)}));
  CHECK(h.vm.bridge().queue().size() == 1);
  CHECK_FALSE(h.vm.bridge().driver(but).pending);  // nothing consumed mid-run

  Value ev = recv_evt(h.heap(), h.channels(), c);
  h.main->env = ev;
  // main blocks; the dispatch that follows drains the queue and wakes it
  CHECK(h.vm.scheduler().sync(*h.main, ev) == SyncResult::Blocked);
  CHECK(h.vm.bridge().queue().size() == 0);
  CHECK(h.vm.scheduler().current() == h.main);
  CHECK(h.main->env == Value::integer(1));
  auto rv = records(h.vm.trace(), "rendezvous");
  REQUIRE(rv.size() == 1);
  CHECK(rv[0].get("sender") == "x0");
}
