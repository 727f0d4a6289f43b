#include "sesub/queue_machine.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace sesub {
namespace {

bool token_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '\'' || c == '$';
}

bool valid_token(const std::string& s) {
  if (s.empty() || s == "rec" || s == "end") return false;
  return std::all_of(s.begin(), s.end(), token_char);
}

[[noreturn]] void fail(const std::string& msg) {
  throw QueueMachineError(msg);
}

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

void check_distinct(const std::vector<std::string>& v, const char* what) {
  std::set<std::string> seen;
  for (const std::string& s : v)
    if (!seen.insert(s).second) fail(std::string("duplicate ") + what + " '" + s + "'");
}

// Recursion-variable name for a state: states already use the label
// charset, so only a bad leading character (digit or quote) needs fixing,
// plus the two keywords; primes keep the results distinct.
std::map<State, std::string> state_var_names(const QueueMachine& m) {
  std::map<State, std::string> out;
  std::set<std::string> used;
  for (const State& q : m.states) {
    std::string v = q;
    char c = v[0];
    bool ident_start = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                       c == '_' || c == '$';
    if (!ident_start || v == "rec" || v == "end") v = "q_" + v;
    while (!used.insert(v).second) v += "'";
    out[q] = v;
  }
  return out;
}

}  // namespace

const Transition& QueueMachine::transition(const State& q,
                                           const Symbol& a) const {
  auto it = delta.find({q, a});
  if (it == delta.end())
    fail("no transition for state '" + q + "' and symbol '" + a + "'");
  return it->second;
}

bool QueueMachine::has_state(const State& q) const {
  return contains(states, q);
}
bool QueueMachine::has_queue_symbol(const Symbol& a) const {
  return contains(queue_alphabet, a);
}
bool QueueMachine::has_input_symbol(const Symbol& a) const {
  return contains(input_alphabet, a);
}

QueueMachine validate(QueueMachine m) {
  if (m.states.empty()) fail("machine needs at least one state");
  if (m.queue_alphabet.empty()) fail("queue alphabet is empty");
  check_distinct(m.states, "state");
  check_distinct(m.input_alphabet, "input symbol");
  check_distinct(m.queue_alphabet, "queue symbol");
  for (const State& q : m.states)
    if (!valid_token(q)) fail("bad state name '" + q + "'");
  for (const Symbol& a : m.queue_alphabet)
    if (!valid_token(a)) fail("bad queue symbol '" + a + "'");
  for (const Symbol& a : m.input_alphabet)
    if (!m.has_queue_symbol(a))
      fail("input symbol '" + a + "' is not a queue symbol");
  if (m.input_alphabet.size() >= m.queue_alphabet.size())
    fail("input alphabet must be a strict subset of the queue alphabet");
  if (!m.has_queue_symbol(m.initial_symbol))
    fail("initial symbol '" + m.initial_symbol + "' is not a queue symbol");
  if (m.has_input_symbol(m.initial_symbol))
    fail("initial symbol '" + m.initial_symbol + "' must not be an input symbol");
  if (!m.has_state(m.start)) fail("start state '" + m.start + "' is unknown");

  for (const auto& [key, tr] : m.delta) {
    if (!m.has_state(key.first)) fail("delta uses unknown state '" + key.first + "'");
    if (!m.has_queue_symbol(key.second))
      fail("delta uses unknown symbol '" + key.second + "'");
    if (!m.has_state(tr.next)) fail("delta targets unknown state '" + tr.next + "'");
    for (const Symbol& b : tr.output)
      if (!m.has_queue_symbol(b))
        fail("delta writes unknown symbol '" + b + "'");
  }
  for (const State& q : m.states)
    for (const Symbol& a : m.queue_alphabet)
      if (!m.delta.count({q, a}))
        fail("delta is missing an entry for (" + q + ", " + a + ")");
  return m;
}

QueueMachine parse_queue_machine(std::string_view text) {
  QueueMachine m;
  bool saw_states = false, saw_input = false, saw_queue = false,
       saw_init = false, saw_start = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto at = [&] { return " (line " + std::to_string(lineno) + ")"; };

    auto rest_tokens = [&] {
      std::vector<std::string> toks;
      std::string t;
      while (ls >> t) toks.push_back(t);
      return toks;
    };
    auto one_token = [&](const char* what) {
      std::vector<std::string> toks = rest_tokens();
      if (toks.size() != 1)
        fail(std::string(what) + " wants exactly one token" + at());
      return toks[0];
    };
    auto set_section = [&](bool& seen, const char* what) {
      if (seen) fail(std::string("duplicate ") + what + " section" + at());
      seen = true;
    };

    if (key == "states:") {
      set_section(saw_states, "states");
      m.states = rest_tokens();
    } else if (key == "input:") {
      set_section(saw_input, "input");
      m.input_alphabet = rest_tokens();
    } else if (key == "queue:") {
      set_section(saw_queue, "queue");
      m.queue_alphabet = rest_tokens();
    } else if (key == "init:") {
      set_section(saw_init, "init");
      m.initial_symbol = one_token("init");
    } else if (key == "start:") {
      set_section(saw_start, "start");
      m.start = one_token("start");
    } else if (key == "delta:") {
      std::vector<std::string> toks = rest_tokens();
      if (toks.size() < 4 || toks[2] != "->")
        fail("delta wants 'state symbol -> state word'" + at());
      Transition tr;
      tr.next = toks[3];
      if (toks.size() == 5 && toks[4] == ".") {
        // "." is the empty word
      } else {
        for (size_t i = 4; i < toks.size(); ++i) {
          if (toks[i] == ".") fail("'.' cannot mix with symbols" + at());
          tr.output.push_back(toks[i]);
        }
      }
      if (!m.delta.emplace(std::make_pair(toks[0], toks[1]), std::move(tr))
               .second)
        fail("duplicate delta entry for (" + toks[0] + ", " + toks[1] + ")" +
             at());
    } else {
      fail("unknown directive '" + key + "'" + at());
    }
  }
  if (!saw_states) fail("missing states section");
  if (!saw_input) fail("missing input section");
  if (!saw_queue) fail("missing queue section");
  if (!saw_init) fail("missing init section");
  if (!saw_start) fail("missing start section");
  return validate(std::move(m));
}

QueueMachine load_queue_machine(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_queue_machine(buf.str());
}

QueueMachine anbn_machine() {
  QueueMachine m;
  m.states = {"q1", "q2", "q3", "qs"};
  m.input_alphabet = {"a", "b"};
  m.queue_alphabet = {"a", "b", "$"};
  m.initial_symbol = "$";
  m.start = "q1";
  auto d = [&](const char* q, const char* a, const char* q2,
               std::vector<Symbol> w) {
    m.delta[{q, a}] = Transition{q2, std::move(w)};
  };
  d("q1", "a", "q2", {});
  d("q1", "$", "q1", {});
  d("q1", "b", "qs", {"b"});
  d("q2", "a", "q2", {"a"});
  d("q2", "$", "qs", {"$"});
  d("q2", "b", "q3", {});
  d("q3", "a", "qs", {"a"});
  d("q3", "$", "q1", {"$"});
  d("q3", "b", "q3", {"b"});
  d("qs", "a", "qs", {"a"});
  d("qs", "b", "qs", {"b"});
  d("qs", "$", "qs", {"$"});
  return validate(std::move(m));
}

std::string format_configuration(const Configuration& c) {
  std::string out = "(" + c.state + ",";
  if (c.queue.empty()) {
    out += "ε";
  } else {
    for (const Symbol& s : c.queue) out += s;
  }
  out += ")";
  return out;
}

std::optional<Configuration> step(const QueueMachine& m,
                                  const Configuration& c) {
  if (c.queue.empty()) return std::nullopt;
  const Transition& tr = m.transition(c.state, c.queue.front());
  Configuration next;
  next.state = tr.next;
  next.queue.assign(c.queue.begin() + 1, c.queue.end());
  next.queue.insert(next.queue.end(), tr.output.begin(), tr.output.end());
  return next;
}

namespace {

Configuration starting_configuration(const QueueMachine& m,
                                     const std::vector<Symbol>& input) {
  for (const Symbol& a : input)
    if (!m.has_input_symbol(a))
      fail("input symbol '" + a + "' is not in the input alphabet");
  Configuration c;
  c.state = m.start;
  c.queue = input;
  c.queue.push_back(m.initial_symbol);
  return c;
}

}  // namespace

RunOutcome run(const QueueMachine& m, const std::vector<Symbol>& input,
               uint64_t max_steps) {
  RunOutcome out;
  out.last = starting_configuration(m, input);
  while (true) {
    if (out.last.queue.empty()) {
      out.accepted = true;
      return out;
    }
    if (out.steps >= max_steps) return out;
    out.last = *step(m, out.last);
    ++out.steps;
  }
}

std::vector<Configuration> run_trace(const QueueMachine& m,
                                     const std::vector<Symbol>& input,
                                     uint64_t max_steps) {
  std::vector<Configuration> out;
  out.push_back(starting_configuration(m, input));
  while (!out.back().queue.empty() && out.size() <= max_steps)
    out.push_back(*step(m, out.back()));
  return out;
}

std::vector<Symbol> parse_word(const std::vector<Symbol>& alphabet,
                               std::string_view text) {
  std::vector<Symbol> sorted = alphabet;
  std::sort(sorted.begin(), sorted.end(),
            [](const Symbol& a, const Symbol& b) {
              return a.size() != b.size() ? a.size() > b.size() : a < b;
            });
  std::vector<Symbol> out;
  size_t pos = 0;
  while (pos < text.size()) {
    bool matched = false;
    for (const Symbol& s : sorted)
      if (text.compare(pos, s.size(), s) == 0) {
        out.push_back(s);
        pos += s.size();
        matched = true;
        break;
      }
    if (!matched)
      fail("cannot tokenize '" + std::string(text) + "' at offset " +
           std::to_string(pos));
  }
  return out;
}

// --- Encodings ---------------------------------------------------------------

TypePtr encode_queue(const QueueMachine& m,
                     const std::vector<Symbol>& content) {
  for (const Symbol& a : content)
    if (!m.has_queue_symbol(a))
      fail("queue symbol '" + a + "' is not in the queue alphabet");
  // Enqueue hub: offer every symbol as an output, then read it back.
  std::vector<Choice> hub;
  hub.reserve(m.queue_alphabet.size());
  for (const Symbol& a : m.queue_alphabet)
    hub.push_back(
        Choice{a, make_branch({Choice{a, make_var("t")}}, std::nullopt)});
  TypePtr ty = make_rec("t", make_select(std::move(hub)));
  for (auto it = content.rbegin(); it != content.rend(); ++it)
    ty = make_branch({Choice{*it, std::move(ty)}}, std::nullopt);
  return ty;
}

TypePtr encode_control_from(const QueueMachine& m, const State& q) {
  if (!m.has_state(q)) fail("unknown state '" + q + "'");
  std::map<State, std::string> names = state_var_names(m);

  struct Builder {
    const QueueMachine& m;
    const std::map<State, std::string>& names;

    TypePtr build(const State& cur, std::set<State>& open) const {
      if (open.count(cur)) return make_var(names.at(cur));
      open.insert(cur);
      std::vector<Choice> choices;
      choices.reserve(m.queue_alphabet.size());
      for (const Symbol& a : m.queue_alphabet) {
        const Transition& tr = m.transition(cur, a);
        TypePtr cont = build(tr.next, open);
        for (auto it = tr.output.rbegin(); it != tr.output.rend(); ++it)
          cont = make_select({Choice{*it, std::move(cont)}});
        choices.push_back(Choice{a, std::move(cont)});
      }
      open.erase(cur);
      return make_rec(names.at(cur), make_branch(std::move(choices), std::nullopt));
    }
  };

  std::set<State> open;
  return Builder{m, names}.build(q, open);
}

TypePtr encode_control(const QueueMachine& m) {
  return encode_control_from(m, m.start);
}

std::pair<TypePtr, TypePtr> reduction(const QueueMachine& m,
                                      const std::vector<Symbol>& input) {
  std::vector<Symbol> queue = input;
  for (const Symbol& a : input)
    if (!m.has_input_symbol(a))
      fail("input symbol '" + a + "' is not in the input alphabet");
  queue.push_back(m.initial_symbol);
  return {encode_control(m), encode_queue(m, queue)};
}

}  // namespace sesub
