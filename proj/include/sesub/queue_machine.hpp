#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sesub/type.hpp"

namespace sesub {

// States and queue symbols are plain tokens; symbols double as session-type
// labels in the encodings, so they are restricted to the label charset.
using State = std::string;
using Symbol = std::string;

class QueueMachineError : public std::runtime_error {
 public:
  explicit QueueMachineError(const std::string& what)
      : std::runtime_error(what) {}
};

struct Transition {
  State next;
  std::vector<Symbol> output;  // appended to the queue, left to right
};

// Six-tuple machine with a total transition function. The declaration order
// of queue_alphabet fixes the choice order used by the encodings.
struct QueueMachine {
  std::vector<State> states;
  std::vector<Symbol> input_alphabet;  // strict subset of queue_alphabet
  std::vector<Symbol> queue_alphabet;
  Symbol initial_symbol;  // in queue_alphabet, not in input_alphabet
  State start;
  std::map<std::pair<State, Symbol>, Transition> delta;

  const Transition& transition(const State& q, const Symbol& a) const;
  bool has_state(const State& q) const;
  bool has_queue_symbol(const Symbol& a) const;
  bool has_input_symbol(const Symbol& a) const;
};

// Checks every six-tuple invariant (alphabet containments, totality of
// delta, token well-formedness) and returns the machine; throws
// QueueMachineError otherwise.
QueueMachine validate(QueueMachine m);

// Line-based format: "states:", "input:", "queue:", "init:", "start:",
// one "delta: q a -> q' word" per (state, symbol) where word is
// whitespace-separated symbols or "." for the empty word; "#" comments.
QueueMachine parse_queue_machine(std::string_view text);
QueueMachine load_queue_machine(const std::string& path);

// The four-state machine accepting { a^n b^n | n >= 0 }.
QueueMachine anbn_machine();

struct Configuration {
  State state;
  std::vector<Symbol> queue;  // front at index 0
};

// "(state,symbols)" with the queue written as concatenated symbols and the
// empty queue as an epsilon.
std::string format_configuration(const Configuration& c);

// One transition; nullopt when the queue is empty (the accepting halt).
std::optional<Configuration> step(const QueueMachine& m,
                                  const Configuration& c);

struct RunOutcome {
  bool accepted = false;
  uint64_t steps = 0;  // transitions taken
  Configuration last;  // terminal configuration, or where the budget ran out
};

// Runs from (start, input . initial_symbol) for at most max_steps
// transitions. Input symbols must lie in the input alphabet.
RunOutcome run(const QueueMachine& m, const std::vector<Symbol>& input,
               uint64_t max_steps);

// Every configuration visited, starting configuration first.
std::vector<Configuration> run_trace(const QueueMachine& m,
                                     const std::vector<Symbol>& input,
                                     uint64_t max_steps);

// Splits concatenated text into symbols of the given alphabet, longest
// match first; throws QueueMachineError when the text does not tokenize.
std::vector<Symbol> parse_word(const std::vector<Symbol>& alphabet,
                               std::string_view text);

// Input chain of branchings for the queue content, ending in the recursive
// enqueue hub over the whole queue alphabet. Single-input and input-guarded
// by construction.
TypePtr encode_queue(const QueueMachine& m, const std::vector<Symbol>& content);

// Control encoding from an arbitrary state: one recursion binder per
// machine state, a branching over the queue alphabet, and a chain of
// single-choice selections for the written word. Single-output by
// construction.
TypePtr encode_control_from(const QueueMachine& m, const State& q);
TypePtr encode_control(const QueueMachine& m);

// (control encoding of start, queue encoding of input . initial_symbol).
std::pair<TypePtr, TypePtr> reduction(const QueueMachine& m,
                                      const std::vector<Symbol>& input);

}  // namespace sesub
