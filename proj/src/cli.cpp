#include "svm/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "svm/assembler.hpp"
#include "svm/error.hpp"

namespace svm {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// An image if it carries the magic, assembly source otherwise.
Program load_any(const std::string& path) {
  std::string bytes = read_text(path);
  if (bytes.size() >= 4 && bytes.compare(0, 4, kImageMagic, 4) == 0) {
    std::vector<std::uint8_t> image(bytes.begin(), bytes.end());
    return load_program(image);
  }
  return assemble_program(bytes);
}

}  // namespace

RunReport run_scenario(Vm& vm, const Scenario* scenario) {
  if (!scenario) return vm.run(nullptr);
  register_drivers(*scenario, vm.bridge());
  ScenarioEngine engine(*scenario, vm.bridge(), vm.clock(), vm.trace());
  return vm.run(&engine);
}

std::string format_config(const Vm& vm) {
  const RunConfig& c = vm.config();
  const ChannelTable& ch = vm.channels();
  std::ostringstream o;
  o << "heap: " << c.heap_bytes << " B = " << vm.heap().capacity() << " cells x " << kCellBytes << " B\n"
    << "stacks: " << c.stack_bytes << " B x " << c.contexts << " contexts\n"
    << "channels: " << ch.capacity() << " x " << ChannelTable::kChannelBytes << " B = " << ch.arena_bytes()
    << " B arena; " << ch.used() << " in use = " << ch.used_bytes() << " B\n"
    << "drivers: " << c.drivers << " slots; " << vm.bridge().size() << " registered, " << vm.bridge().bound_count()
    << " bound\n"
    << "queues: bridge " << c.queue_cap << ", channel " << c.chan_queue_cap << " per direction\n";
  return o.str();
}

std::string format_stats(const Vm& vm) {
  const HeapStats& h = vm.heap().stats();
  const SchedulerStats& s = vm.scheduler().stats();
  std::uint64_t slot_drops = 0;
  for (const auto& d : vm.bridge().drivers()) slot_drops += d.slot_drops;
  std::ostringstream o;
  o << "steps: " << vm.steps() << " (while asleep: " << vm.steps_while_asleep() << ")\n"
    << "virtual time: " << vm.clock().now() << " ms\n"
    << "dispatches: " << s.dispatches << "\n"
    << "rendezvous: " << s.rendezvous << "\n"
    << "driver reads: " << s.driver_reads << ", writes: " << s.driver_writes << "\n"
    << "sleeps: " << s.sleeps << ", wakes: " << s.wakes << "\n"
    << "driver messages: " << s.messages << "; dropped: " << vm.bridge().queue().dropped() << " at queue, "
    << slot_drops << " at pending slot\n"
    << "gc collections: " << h.collections << "; cells reclaimed: " << h.reclaimed << "; peak live cells: "
    << h.peak_live << "\n"
    << "mark steps: last " << h.last_mark_steps << ", total " << h.total_mark_steps << "\n"
    << "allocations: " << h.allocations << "\n";
  for (const auto& [tid, t] : vm.threads())
    o << "thread " << tid << ": steps " << t.steps << ", peak stack " << t.peak_stack << " entries ("
      << t.peak_stack * kValueBytes << " B), syncs " << t.completions << (t.done ? ", done" : "") << "\n";
  return o.str();
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bytecode VM for message-passing device programs"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string prog, scenario_path, trace_path;
  bool stats = false;
  std::uint64_t max_steps = 0;
  auto* run = app.add_subcommand("run", "Run a program image or assembly source");
  run->add_option("prog", prog, "Program (.svmb image or assembly)")->required();
  run->add_option("--scenario", scenario_path, "Scenario file");
  run->add_option("--heap-bytes", cfg.heap_bytes, "Heap size in bytes")->capture_default_str();
  run->add_option("--stack-bytes", cfg.stack_bytes, "Stack bytes per context")->capture_default_str();
  run->add_option("--contexts", cfg.contexts, "Context slots")->capture_default_str();
  run->add_option("--channels", cfg.channels, "Channel slots")->capture_default_str();
  run->add_option("--drivers", cfg.drivers, "Driver slots")->capture_default_str();
  run->add_option("--queue-cap", cfg.queue_cap, "Bridge queue capacity")->capture_default_str();
  run->add_option("--chan-queue", cfg.chan_queue_cap, "Channel queue bound per direction")->capture_default_str();
  run->add_option("--step-cost", cfg.step_cost_ms, "Virtual ms charged per instruction")->capture_default_str();
  auto* max_opt = run->add_option("--max-steps", max_steps, "Stop after this many instructions");
  run->add_option("--trace", trace_path, "Write the trace to this file");
  run->add_flag("--stats", stats, "Print run statistics");

  std::string src, img_out, img_in;
  auto* as = app.add_subcommand("asm", "Assemble source to an image");
  as->add_option("src", src, "Assembly source")->required();
  as->add_option("-o", img_out, "Output image")->required();

  auto* dis = app.add_subcommand("disasm", "List an image as assembly");
  dis->add_option("img", img_in, "Image file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*as) {
      auto image = assemble(read_text(src));
      std::ofstream f(img_out, std::ios::binary);
      f.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
      if (!f) throw std::runtime_error("cannot write " + img_out);
      return 0;
    }
    if (*dis) {
      std::string bytes = read_text(img_in);
      std::vector<std::uint8_t> image(bytes.begin(), bytes.end());
      out << disassemble(image);
      return 0;
    }

    if (*max_opt) cfg.max_steps = max_steps;
    cfg.validate();
    Program program = load_any(prog);
    std::optional<Scenario> scenario;
    if (!scenario_path.empty()) scenario = load_scenario(read_text(scenario_path));

    Vm vm(std::move(program), cfg);
    RunReport report = run_scenario(vm, scenario ? &*scenario : nullptr);
    if (!trace_path.empty()) {
      std::ofstream f(trace_path, std::ios::binary);
      f << vm.trace().text();
      if (!f) throw std::runtime_error("cannot write " + trace_path);
    }
    out << format_config(vm);
    out << "exit: " << to_string(report.reason) << " (status " << exit_code(report.reason) << ") after "
        << report.steps << " steps\n";
    if (!report.message.empty()) err << "error: " << report.message << "\n";
    for (const auto& [tid, ch] : report.stuck)
      err << "deadlock: thread " << to_string(tid) << " blocked on "
          << (ch ? "channel " + std::to_string(index_of(*ch)) : std::string("an empty event")) << "\n";
    if (stats || report.reason == ExitReason::ResourceExhausted) out << format_stats(vm);
    return exit_code(report.reason);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_resource_exhaustion(e.code()) ? 3 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace svm
