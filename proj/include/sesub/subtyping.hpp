#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sesub/type.hpp"

namespace sesub {

enum class Mode { Semi, Terminating };

enum class Rule { Asmp, Asmp2, Asmp3, End, Out, In, RecL, RecR1, RecR2 };

std::string_view rule_name(Rule r);

// Environment of previously visited (left, right) pairs. Values are
// immutable: extended() returns a new environment sharing structure with
// the old one, so sibling branches of the search never observe each
// other's additions.
//
// Membership (rule Asmp) is annotation-blind: the stored key combines the
// structural keys of both sides, and keys ignore annotations. In Semi mode
// the right-hand type is not retained (long runs would otherwise pin every
// superseded right-hand side in memory); membership then rests on the
// 128-bit pair key plus structural verification of the left component.
class Env {
 public:
  struct Entry {
    TypePtr left;
    TypePtr right;  // null when the environment does not retain rights
    Key128 pair_key;
    std::shared_ptr<const Entry> parent;
  };

  struct IndexNode;

  Env() = default;

  Env extended(const TypePtr& left, const TypePtr& right,
               bool keep_right) const;
  bool contains(const TypePtr& left, const TypePtr& right) const;

  // Newest entry first; parent pointers reach the rest of the path.
  const Entry* head() const { return head_.get(); }
  size_t size() const { return size_; }

  static Key128 pair_key(const Key128& left, const Key128& right);

 private:
  std::shared_ptr<const Entry> head_;
  std::shared_ptr<const IndexNode> index_;
  size_t size_ = 0;
};

struct Judgment {
  TypePtr left;   // plain
  TypePtr right;  // decorated in Terminating mode
  Env env;
};

// One rule application: zero premises close the branch, otherwise every
// premise must be discharged in turn.
struct StepResult {
  Rule rule;
  std::vector<Judgment> premises;
};

// Selects and applies the unique applicable rule, or nullopt when no rule
// applies (the judgment is stuck). Closing-rule priority in Terminating
// mode: Asmp2, Asmp3, Asmp; Semi mode knows only Asmp. The counter supplies
// fresh annotations for branchings exposed by right-hand unfoldings and is
// only touched in Terminating mode.
std::optional<StepResult> step(const Judgment& j, Mode mode,
                               AnnotationCounter& counter);

// A right-hand side viewed as its maximal leading chain of single-choice
// branchings plus the first node that breaks the chain.
struct ChainSplit {
  std::vector<const Node*> links;
  TypePtr tail;
};
ChainSplit split_input_chain(const TypePtr& s);

// Detection of the two loop-cutting matches. Both return the matching
// environment entry, newest first, or null.
const Env::Entry* match_asmp2(const Judgment& j);
const Env::Entry* match_asmp3(const Judgment& j);

enum class Verdict { Subtype, NotSubtype, FuelExhausted };

std::string_view verdict_name(Verdict v);

struct CheckStats {
  uint64_t applications = 0;   // total rule applications
  size_t sigma_max = 0;        // largest environment seen
  size_t distinct_pairs = 0;   // distinct (left, erased right) pairs visited
  size_t frontier = 0;         // judgments still open at exit
};

struct TraceEntry {
  Rule rule;
  std::string left;
  std::string right;
  size_t env_size;
};

std::string format_trace_entry(const TraceEntry& e);

struct CheckOutcome {
  Verdict verdict = Verdict::FuelExhausted;
  CheckStats stats;
  std::optional<Judgment> failing;  // set on NotSubtype: the stuck judgment
  std::vector<TraceEntry> trace;    // populated when requested
};

struct CheckOptions {
  uint64_t fuel = 100000;
  bool collect_trace = false;
  size_t trace_limit = 100000;
};

// Breadth-first search over the Semi-mode rules starting from
// (t, s, empty environment). NotSubtype is definitive; Subtype means every
// branch closed; FuelExhausted leaves the question open.
CheckOutcome semi_check(const TypePtr& t, const TypePtr& s,
                        const CheckOptions& opt = {});

class FragmentError : public std::runtime_error {
 public:
  explicit FragmentError(const std::string& what) : std::runtime_error(what) {}
};

// Reason decide() would reject the pair, or nullopt when the pair lies in
// the decidable fragment: t single-output and s single-input are always
// required, plus t single-input or s single-output.
std::optional<std::string> fragment_violation(const TypePtr& t,
                                              const TypePtr& s);

struct DecideOptions {
  // Safety ceiling on rule applications; 0 means unbounded. The algorithm
  // terminates on fragment inputs, so the ceiling exists purely to turn a
  // would-be hang into a visible FuelExhausted in harness code.
  uint64_t step_ceiling = 0;
  bool collect_trace = false;
  size_t trace_limit = 100000;
};

// Terminating-mode check from (t, decorate(s)). Throws FragmentError when
// the precondition fails.
CheckOutcome decide(const TypePtr& t, const TypePtr& s,
                    const DecideOptions& opt = {});

enum class OracleVerdict { Subtype, NotSubtype, Inconclusive };

std::string_view oracle_verdict_name(OracleVerdict v);

struct OracleOutcome {
  OracleVerdict verdict = OracleVerdict::Inconclusive;
  uint64_t pairs_visited = 0;
};

// Direct bounded exploration of the simulation game, independent of the
// rule engine above; used as a cross-checking oracle in tests. NotSubtype
// is reported only for violations that no amount of extra unfolding could
// repair; Subtype requires the whole closure to fit within pair_bound
// distinct pairs and every needed unfolding to stay within unfold_bound.
// Diverging games accumulate pending inputs, so the cost of pair k grows
// with k; the default bound keeps such runs around a second.
OracleOutcome oracle_check(const TypePtr& t, const TypePtr& s,
                           uint64_t pair_bound = 10000,
                           unsigned unfold_bound = 8);

}  // namespace sesub
