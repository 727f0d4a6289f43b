#include "sesub/cfsm.hpp"

#include <deque>
#include <unordered_map>

namespace sesub {

Cfsm build_cfsm(const TypePtr& t, size_t max_states) {
  Cfsm out;
  std::unordered_map<Key128, size_t, Key128Hash> index;

  auto state_of = [&](const TypePtr& term) {
    Key128 k = alpha_key(term);
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    if (out.states.size() >= max_states)
      throw StateExplosionError("reachable state set exceeds " +
                                std::to_string(max_states));
    size_t id = out.states.size();
    out.states.push_back(canonicalized(term));
    index.emplace(k, id);
    return id;
  };
  auto note_label = [&](const Label& l) {
    for (const Label& seen : out.alphabet)
      if (seen == l) return;
    out.alphabet.push_back(l);
  };

  // Every state enters the queue exactly once, at creation.
  std::deque<size_t> work;
  work.push_back(state_of(t));
  while (!work.empty()) {
    size_t id = work.front();
    work.pop_front();

    // A recursive definition has the moves of its unfolding.
    TypePtr cur = out.states[id];
    while (cur->kind == TypeKind::Rec) cur = unfold(cur, 1);

    if (cur->kind != TypeKind::Select && cur->kind != TypeKind::Branch)
      continue;
    char polarity = cur->kind == TypeKind::Select ? '!' : '?';
    for (const Choice& c : cur->choices) {
      size_t before = out.states.size();
      size_t to = state_of(c.type);
      note_label(c.label);
      out.transitions.push_back(CfsmTransition{id, c.label, polarity, to});
      if (to == before) work.push_back(to);
    }
  }
  return out;
}

std::string to_dot(const Cfsm& c) {
  std::string out = "digraph cfsm {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (size_t i = 0; i < c.states.size(); ++i) {
    out += "  s" + std::to_string(i);
    if (i == 0) out += " [shape=doublecircle]";
    out += ";\n";
  }
  for (const CfsmTransition& tr : c.transitions) {
    out += "  s" + std::to_string(tr.from) + " -> s" + std::to_string(tr.to) +
           " [label=\"" + tr.label + tr.polarity + "\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace sesub
