#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "testkit.hpp"

using namespace svm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "svm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int status = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("svm_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
    return (path / name).string();
  }
};

std::string fixture_path(const char* name) { return std::string(SVM_FIXTURES) + "/" + name; }

}  // namespace

TEST_CASE("run echoes the configuration and the exit") {
  auto o = cli({"run", fixture_path("button_blinky.sasm"), "--scenario", fixture_path("button_blinky.scn")});
  CHECK(o.status == 0);
  CHECK(o.out.find("heap: 1024 B = 85 cells x 12 B") != std::string::npos);
  CHECK(o.out.find("stacks: 1024 B x 4 contexts") != std::string::npos);
  CHECK(o.out.find("channels: 100 x 96 B = 9600 B arena; 2 in use = 192 B") != std::string::npos);
  CHECK(o.out.find("drivers: 16 slots; 4 registered, 2 bound") != std::string::npos);
  CHECK(o.out.find("exit: quiescent (status 0)") != std::string::npos);
  CHECK(o.out.find("gc collections") == std::string::npos);  // no stats unless asked
}

TEST_CASE("run options change the echoed configuration") {
  auto o = cli({"run", fixture_path("button_blinky.sasm"), "--scenario", fixture_path("button_blinky.scn"),
                "--heap-bytes", "2400", "--channels", "10", "--stats"});
  CHECK(o.status == 0);
  CHECK(o.out.find("heap: 2400 B = 200 cells x 12 B") != std::string::npos);
  CHECK(o.out.find("channels: 10 x 96 B = 960 B arena") != std::string::npos);
  CHECK(o.out.find("gc collections") != std::string::npos);
  CHECK(o.out.find("while asleep: 0") != std::string::npos);
}

TEST_CASE("exit statuses follow the run outcome") {
  TempDir dir;
  CHECK(cli({"run", dir.write("halt.sasm", "main: STOP\n")}).status == 0);

  auto dead = cli({"run", dir.write("dead.sasm", "main: CHANNEL\nRECVEVT\nSYNC\nSTOP\n")});
  CHECK(dead.status == 2);
  CHECK(dead.err.find("deadlock: thread 0 blocked on channel 0") != std::string::npos);

  auto oom = cli({"run", dir.write("oom.sasm", "main: CLEAR\nloop: PUSH\nCONS\nGOTO loop\n"), "--heap-bytes", "120"});
  CHECK(oom.status == 3);
  CHECK(oom.err.find("OutOfMemory") != std::string::npos);
  CHECK(oom.out.find("gc collections") != std::string::npos);  // stats come with exhaustion

  auto spin = cli({"run", dir.write("spin.sasm", "main: GOTO main\n"), "--max-steps", "50"});
  CHECK(spin.status == 4);
  CHECK(spin.out.find("after 50 steps") != std::string::npos);

  auto fault = cli({"run", dir.write("fault.sasm", "main: FST\nSTOP\n")});
  CHECK(fault.status == 1);
  CHECK(fault.err.find("TypeConfusion") != std::string::npos);
}

TEST_CASE("usage and input errors exit 1") {
  TempDir dir;
  CHECK(cli({}).status != 0);
  CHECK(cli({"run"}).status != 0);
  CHECK(cli({"run", (dir.path / "missing.sasm").string()}).status == 1);
  auto bad = cli({"run", dir.write("bad.sasm", "main: FROB\n")});
  CHECK(bad.status == 1);
  CHECK(bad.err.find("line 1") != std::string::npos);
  CHECK(cli({"run", dir.write("ok.sasm", "main: STOP\n"), "--heap-bytes", "0"}).status == 1);
  auto scn = cli({"run", dir.write("ok2.sasm", "main: STOP\n"), "--scenario", dir.write("s.scn", "driver x motor\n")});
  CHECK(scn.status == 1);
  CHECK(scn.err.find("UnknownDriverKind") != std::string::npos);
}

TEST_CASE("asm writes an image that disasm lists and run accepts") {
  TempDir dir;
  std::string img = (dir.path / "bb.svmb").string();
  CHECK(cli({"asm", fixture_path("button_blinky.sasm"), "-o", img}).status == 0);
  auto bytes = svmtest::read_file(img);
  REQUIRE(bytes.size() > 16);
  CHECK(bytes.substr(0, 4) == "SVMB");

  auto listing = cli({"disasm", img});
  CHECK(listing.status == 0);
  CHECK(listing.out.find("SPAWNX 2") != std::string::npos);
  std::string relisted = dir.write("relisted.sasm", listing.out);
  std::string img2 = (dir.path / "bb2.svmb").string();
  CHECK(cli({"asm", relisted, "-o", img2}).status == 0);
  CHECK(svmtest::read_file(img2) == bytes);

  std::string trace = (dir.path / "trace.txt").string();
  auto run = cli({"run", img, "--scenario", fixture_path("button_blinky.scn"), "--trace", trace});
  CHECK(run.status == 0);
  CHECK(svmtest::read_file(trace).find("ev=drv_write drv=0 ch=1 val=1") != std::string::npos);
}

TEST_CASE("disasm rejects a corrupt image") {
  TempDir dir;
  auto o = cli({"disasm", dir.write("junk.svmb", "NOPE0000000000000000")});
  CHECK(o.status == 1);
  CHECK(o.err.find("BadMagic") != std::string::npos);
}
