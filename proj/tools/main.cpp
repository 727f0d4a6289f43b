// Command-line front end. Talks to the library exclusively through the C
// interface in sesub/sesub.h.
//
// Exit codes: 0 subtype/accepted, 1 not-subtype/still-running,
// 2 fuel-exhausted/inconclusive, 3 anything that prevented an answer.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sesub/sesub.h"

namespace {

struct StringDeleter {
  void operator()(char* s) const { sesub_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct TypeDeleter {
  void operator()(sesub_type* t) const { sesub_type_free(t); }
};
using OwnedType = std::unique_ptr<sesub_type, TypeDeleter>;

struct QmDeleter {
  void operator()(sesub_qm* m) const { sesub_qm_free(m); }
};
using OwnedQm = std::unique_ptr<sesub_qm, QmDeleter>;

struct CfsmDeleter {
  void operator()(sesub_cfsm* g) const { sesub_cfsm_free(g); }
};
using OwnedCfsm = std::unique_ptr<sesub_cfsm, CfsmDeleter>;

[[noreturn]] void die() {
  std::cerr << "error: " << sesub_last_error() << "\n";
  std::exit(3);
}

OwnedType load_type(const std::string& path) {
  sesub_type* t = nullptr;
  if (sesub_type_load(path.c_str(), &t) != SESUB_OK) die();
  return OwnedType(t);
}

OwnedQm load_machine(const std::string& path) {
  sesub_qm* m = nullptr;
  if (sesub_qm_load(path.c_str(), &m) != SESUB_OK) die();
  return OwnedQm(m);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(3);
  }
}

void print_line(const char* line, void*) { std::cout << line << "\n"; }

int exit_code(sesub_verdict v) {
  switch (v) {
    case SESUB_SUBTYPE:
      return 0;
    case SESUB_NOT_SUBTYPE:
      return 1;
    default:
      return 2;
  }
}

struct CheckArgs {
  std::string left;
  std::string right;
  std::string algo;  // empty: pick by fragment membership
  uint64_t fuel = 0;
  bool trace = false;
  bool json = false;
};

[[noreturn]] void run_check(const CheckArgs& a) {
  OwnedType left = load_type(a.left);
  OwnedType right = load_type(a.right);

  std::string algo = a.algo;
  if (algo.empty()) {
    int ok = 0;
    if (sesub_fragment_check(left.get(), right.get(), &ok, nullptr) !=
        SESUB_OK)
      die();
    algo = ok ? "decide" : "semi";
  }
  std::cerr << "algo: " << algo << "\n";

  sesub_check_options opt{};
  opt.algo = algo == "decide" ? SESUB_ALGO_DECIDE
             : algo == "oracle" ? SESUB_ALGO_ORACLE
                                : SESUB_ALGO_SEMI;
  opt.fuel = a.fuel;
  if (a.trace) opt.trace = print_line;

  sesub_check_result r{};
  if (sesub_check(left.get(), right.get(), &opt, &r) != SESUB_OK) die();

  if (a.json) {
    nlohmann::json j{{"verdict", sesub_verdict_name(r.verdict)},
                     {"rule_applications", r.rule_applications},
                     {"sigma_max", r.sigma_max},
                     {"algo", algo}};
    std::cout << j.dump() << "\n";
  } else {
    std::cout << sesub_verdict_name(r.verdict) << "\n";
  }
  std::exit(exit_code(r.verdict));
}

[[noreturn]] void run_classify(const std::string& file) {
  OwnedType t = load_type(file);
  uint32_t bits = 0;
  if (sesub_type_classify(t.get(), &bits) != SESUB_OK) die();
  auto yn = [&](uint32_t bit) { return (bits & bit) ? "yes" : "no"; };
  std::cout << "single-output: " << yn(SESUB_CLASS_SINGLE_OUTPUT) << "\n"
            << "single-input: " << yn(SESUB_CLASS_SINGLE_INPUT) << "\n"
            << "input-guarded: " << yn(SESUB_CLASS_INPUT_GUARDED) << "\n";
  std::exit(0);
}

struct QmRunArgs {
  std::string machine;
  std::string input;
  uint64_t max_steps = 1000000;
  bool trace = false;
};

[[noreturn]] void run_qm_run(const QmRunArgs& a) {
  OwnedQm m = load_machine(a.machine);
  sesub_run_result r{};
  if (sesub_qm_run(m.get(), a.input.c_str(), a.max_steps,
                   a.trace ? print_line : nullptr, nullptr, &r,
                   nullptr) != SESUB_OK)
    die();
  if (r.accepted) {
    std::cout << "accepted in " << r.steps << " steps\n";
    std::exit(0);
  }
  std::cout << "still running after " << r.steps << " steps\n";
  std::exit(1);
}

struct QmEncodeArgs {
  std::string machine;
  std::string input;
  std::string out_control;
  std::string out_queue;
};

[[noreturn]] void run_qm_encode(const QmEncodeArgs& a) {
  OwnedQm m = load_machine(a.machine);
  sesub_type* sub = nullptr;
  sesub_type* sup = nullptr;
  if (sesub_qm_reduction(m.get(), a.input.c_str(), &sub, &sup) != SESUB_OK)
    die();
  OwnedType control(sub), queue(sup);

  char* rendered = nullptr;
  if (sesub_type_render(control.get(), &rendered) != SESUB_OK) die();
  OwnedString control_text(rendered);
  if (sesub_type_render(queue.get(), &rendered) != SESUB_OK) die();
  OwnedString queue_text(rendered);

  if (a.out_control.empty() && a.out_queue.empty()) {
    std::cout << "control: " << control_text.get() << "\n"
              << "queue: " << queue_text.get() << "\n";
  } else {
    if (!a.out_control.empty())
      write_output(a.out_control, std::string(control_text.get()) + "\n");
    if (!a.out_queue.empty())
      write_output(a.out_queue, std::string(queue_text.get()) + "\n");
  }
  std::exit(0);
}

[[noreturn]] void run_export_dot(const std::string& file,
                                 const std::string& out) {
  OwnedType t = load_type(file);
  sesub_cfsm* g = nullptr;
  if (sesub_cfsm_build(t.get(), 0, &g) != SESUB_OK) die();
  OwnedCfsm graph(g);
  char* dot = nullptr;
  if (sesub_cfsm_to_dot(graph.get(), &dot) != SESUB_OK) die();
  OwnedString text(dot);
  write_output(out, text.get());
  std::exit(0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session-type subtype checker and queue-machine tool"};
  app.set_version_flag("--version", sesub_version());
  app.require_subcommand(1);

  CheckArgs check;
  auto* check_cmd =
      app.add_subcommand("check", "Check that the left type is a subtype");
  check_cmd->add_option("left", check.left, "Candidate subtype (.st file)")
      ->required();
  check_cmd->add_option("right", check.right, "Candidate supertype (.st file)")
      ->required();
  check_cmd
      ->add_option("--algo", check.algo,
                   "semi, decide or oracle (default: decide when the pair "
                   "is in its fragment, else semi)")
      ->check(CLI::IsMember({"semi", "decide", "oracle"}));
  check_cmd->add_option(
      "--fuel", check.fuel,
      "semi: rule budget (default 100000); decide: step ceiling (default "
      "none); oracle: pair bound (default 10000)");
  check_cmd->add_flag("--trace", check.trace, "Print each rule application");
  check_cmd->add_flag("--json", check.json,
                      "Print the result as one JSON object");

  std::string classify_file;
  auto* classify_cmd =
      app.add_subcommand("classify", "Report fragment memberships of a type");
  classify_cmd->add_option("file", classify_file, ".st file")->required();

  auto* qm_cmd = app.add_subcommand("qm", "Queue-machine commands");
  qm_cmd->require_subcommand(1);

  QmRunArgs qm_run;
  auto* qm_run_cmd = qm_cmd->add_subcommand("run", "Run a machine on a word");
  qm_run_cmd->add_option("machine", qm_run.machine, ".qm file")->required();
  qm_run_cmd->add_option("--input", qm_run.input,
                         "Input word, symbols concatenated (default empty)");
  qm_run_cmd->add_option("--max-steps", qm_run.max_steps,
                         "Step budget (default 1000000)");
  qm_run_cmd->add_flag("--trace", qm_run.trace,
                       "Print each configuration visited");

  QmEncodeArgs qm_encode;
  auto* qm_encode_cmd = qm_cmd->add_subcommand(
      "encode", "Encode a machine and an input word as a pair of types");
  qm_encode_cmd->add_option("machine", qm_encode.machine, ".qm file")
      ->required();
  qm_encode_cmd->add_option("--input", qm_encode.input,
                            "Input word (default empty)");
  qm_encode_cmd->add_option("--out-control", qm_encode.out_control,
                            "Write the control encoding here");
  qm_encode_cmd->add_option("--out-queue", qm_encode.out_queue,
                            "Write the queue encoding here");

  std::string dot_file;
  std::string dot_out;
  auto* dot_cmd = app.add_subcommand(
      "export-dot", "Write the communicating automaton of a type as DOT");
  dot_cmd->add_option("file", dot_file, ".st file")->required();
  dot_cmd->add_option("--out", dot_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  if (check_cmd->parsed()) run_check(check);
  if (classify_cmd->parsed()) run_classify(classify_file);
  if (qm_run_cmd->parsed()) run_qm_run(qm_run);
  if (qm_encode_cmd->parsed()) run_qm_encode(qm_encode);
  if (dot_cmd->parsed()) run_export_dot(dot_file, dot_out);

  std::cerr << "error: no command\n";
  return 3;
}
