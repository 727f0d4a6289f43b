#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sesub/type.hpp"

namespace sesub {

class StateExplosionError : public std::runtime_error {
 public:
  explicit StateExplosionError(const std::string& what)
      : std::runtime_error(what) {}
};

struct CfsmTransition {
  size_t from;
  Label label;
  char polarity;  // '!' send, '?' receive
  size_t to;
};

// Labelled transition system of a session type. States are the reachable
// terms in canonical form, numbered in discovery (breadth-first) order;
// state 0 is the initial term.
struct Cfsm {
  std::vector<TypePtr> states;
  std::vector<CfsmTransition> transitions;
  std::vector<Label> alphabet;  // distinct labels in first-use order
};

/// Explores the transition relation: selections move on "l!", branchings on
// "l?", and a recursive definition borrows the moves of its unfolding.
// Reached terms are deduplicated up to renaming of bound variables. Throws
// StateExplosionError past max_states (a defensive ceiling; contractive
// closed types always have a finite reachable set).
Cfsm build_cfsm(const TypePtr& t, size_t max_states = 100000);

// Deterministic Graphviz rendering; byte-identical across runs for the
// same input. The initial state is drawn double-circled.
std::string to_dot(const Cfsm& c);

}  // namespace sesub
