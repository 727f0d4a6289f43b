#include "sesub/subtyping.hpp"

#include <algorithm>
#include <unordered_set>

#include "sesub/syntax.hpp"

namespace sesub {
namespace {

uint64_t mix64(uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

int cmp_key(const Key128& a, const Key128& b) {
  if (a.hi != b.hi) return a.hi < b.hi ? -1 : 1;
  if (a.lo != b.lo) return a.lo < b.lo ? -1 : 1;
  return 0;
}

const Choice* find_choice(const Node& n, const Label& l) {
  for (const Choice& c : n.choices)
    if (c.label == l) return &c;
  return nullptr;
}

bool chain_tail_ok(const TypePtr& tail) {
  return tail->kind == TypeKind::Select || tail->kind == TypeKind::Rec;
}

bool same_type(const TypePtr& a, const TypePtr& b) {
  return a->key == b->key && alpha_equal(a, b);
}

}  // namespace

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::Asmp: return "Asmp";
    case Rule::Asmp2: return "Asmp2";
    case Rule::Asmp3: return "Asmp3";
    case Rule::End: return "End";
    case Rule::Out: return "Out";
    case Rule::In: return "In";
    case Rule::RecL: return "RecL";
    case Rule::RecR1: return "RecR1";
    case Rule::RecR2: return "RecR2";
  }
  return "?";
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Subtype: return "subtype";
    case Verdict::NotSubtype: return "not-subtype";
    case Verdict::FuelExhausted: return "fuel-exhausted";
  }
  return "?";
}

std::string_view oracle_verdict_name(OracleVerdict v) {
  switch (v) {
    case OracleVerdict::Subtype: return "subtype";
    case OracleVerdict::NotSubtype: return "not-subtype";
    case OracleVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string format_trace_entry(const TraceEntry& e) {
  std::string out(rule_name(e.rule));
  out += " | ";
  out += e.left;
  out += " | ";
  out += e.right;
  out += " | ";
  out += std::to_string(e.env_size);
  return out;
}

// --- Environment -----------------------------------------------------------

// Persistent treap keyed by the pair key; gives O(log n) membership along
// arbitrarily long derivation paths while older versions stay valid for
// sibling branches.
struct Env::IndexNode {
  Key128 key;
  uint64_t prio;
  TypePtr left_type;
  TypePtr right_type;
  std::shared_ptr<const IndexNode> lo, hi;
};

namespace {

using IdxPtr = std::shared_ptr<const Env::IndexNode>;

IdxPtr idx_clone(const Env::IndexNode& base, IdxPtr lo, IdxPtr hi) {
  auto n = std::make_shared<Env::IndexNode>(base);
  n->lo = std::move(lo);
  n->hi = std::move(hi);
  return n;
}

struct IdxSplit {
  IdxPtr lo, hi;
};

// Partitions by key; an equal key is dropped (the caller re-inserts its
// replacement, which is only reachable for hash-identical pairs).
IdxSplit idx_split(const IdxPtr& n, const Key128& k) {
  if (!n) return {nullptr, nullptr};
  int c = cmp_key(k, n->key);
  if (c == 0) return {n->lo, n->hi};
  if (c < 0) {
    IdxSplit r = idx_split(n->lo, k);
    return {std::move(r.lo), idx_clone(*n, std::move(r.hi), n->hi)};
  }
  IdxSplit r = idx_split(n->hi, k);
  return {idx_clone(*n, n->lo, std::move(r.lo)), std::move(r.hi)};
}

// Pre: every key in a is smaller than every key in b.
IdxPtr idx_merge(const IdxPtr& a, const IdxPtr& b) {
  if (!a) return b;
  if (!b) return a;
  if (a->prio >= b->prio) return idx_clone(*a, a->lo, idx_merge(a->hi, b));
  return idx_clone(*b, idx_merge(a, b->lo), b->hi);
}

const Env::IndexNode* idx_find(const IdxPtr& root, const Key128& k) {
  const Env::IndexNode* n = root.get();
  while (n) {
    int c = cmp_key(k, n->key);
    if (c == 0) return n;
    n = (c < 0 ? n->lo : n->hi).get();
  }
  return nullptr;
}

}  // namespace

Key128 Env::pair_key(const Key128& left, const Key128& right) {
  return Key128{mix64(left.hi + 0x9e3779b97f4a7c15ULL * right.hi),
                mix64(left.lo ^ (right.lo * 0x100000001b3ULL +
                                 0x9ae16a3b2f90404fULL))};
}

Env Env::extended(const TypePtr& left, const TypePtr& right,
                  bool keep_right) const {
  Key128 pk = pair_key(left->key, right->key);
  auto entry = std::make_shared<Entry>();
  entry->left = left;
  entry->right = keep_right ? right : nullptr;
  entry->pair_key = pk;
  entry->parent = head_;

  auto node = std::make_shared<IndexNode>();
  node->key = pk;
  node->prio = mix64(pk.hi ^ (pk.lo * 0x9e3779b97f4a7c15ULL));
  node->left_type = entry->left;
  node->right_type = entry->right;
  IdxSplit parts = idx_split(index_, pk);

  Env out;
  out.head_ = std::move(entry);
  out.index_ = idx_merge(idx_merge(parts.lo, node), parts.hi);
  out.size_ = size_ + 1;
  return out;
}

bool Env::contains(const TypePtr& left, const TypePtr& right) const {
  const IndexNode* n = idx_find(index_, pair_key(left->key, right->key));
  if (!n) return false;
  if (!alpha_equal(n->left_type, left)) return false;
  if (n->right_type && !alpha_equal(n->right_type, right)) return false;
  return true;
}

// --- Loop-cutting matches ---------------------------------------------------

ChainSplit split_input_chain(const TypePtr& s) {
  ChainSplit out;
  TypePtr cur = s;
  while (cur->kind == TypeKind::Branch && cur->choices.size() == 1) {
    out.links.push_back(cur.get());
    cur = cur->choices[0].type;
  }
  out.tail = cur;
  return out;
}

const Env::Entry* match_asmp2(const Judgment& j) {
  if (!j.left->has_branch) return nullptr;
  ChainSplit cur = split_input_chain(j.right);
  size_t m = cur.links.size();
  if (m == 0 || !chain_tail_ok(cur.tail)) return nullptr;
  if (!cur.links[0]->annotation) return nullptr;
  AnnotationId head_ann = *cur.links[0]->annotation;

  for (const Env::Entry* e = j.env.head(); e; e = e->parent.get()) {
    if (!e->right) continue;
    if (!same_type(e->left, j.left)) continue;
    ChainSplit st = split_input_chain(e->right);
    size_t n = st.links.size();
    if (n == 0 || m <= n) continue;
    if (!chain_tail_ok(st.tail)) continue;
    if (!same_type(st.tail, cur.tail)) continue;

    bool ann_found = false;
    for (const Node* link : st.links)
      if (link->annotation && *link->annotation == head_ann) {
        ann_found = true;
        break;
      }
    if (!ann_found) continue;

    // Both label sequences must repeat the same period word and stop at the
    // same offset inside it; take the smallest period that works.
    for (size_t p = 1; p <= n; ++p) {
      if (n % p != m % p) continue;
      bool ok = true;
      for (size_t i = p; i < n && ok; ++i)
        ok = st.links[i]->choices[0].label == st.links[i % p]->choices[0].label;
      for (size_t i = 0; i < m && ok; ++i)
        ok = cur.links[i]->choices[0].label ==
             st.links[i % p]->choices[0].label;
      if (ok) return e;
    }
  }
  return nullptr;
}

const Env::Entry* match_asmp3(const Judgment& j) {
  // The left side must keep emitting outputs while the right side grows:
  // a left without any selection (end, possibly under binders) terminates,
  // and the pair is about to get stuck rather than repeat forever.
  if (j.left->has_branch || !j.left->has_select) return nullptr;
  ChainSplit cur = split_input_chain(j.right);
  size_t m = cur.links.size();
  if (m == 0 || !chain_tail_ok(cur.tail)) return nullptr;

  for (const Env::Entry* e = j.env.head(); e; e = e->parent.get()) {
    if (!e->right) continue;
    if (!same_type(e->left, j.left)) continue;
    ChainSplit st = split_input_chain(e->right);
    size_t n = st.links.size();
    if (n >= m) continue;
    if (!chain_tail_ok(st.tail)) continue;
    if (!same_type(st.tail, cur.tail)) continue;
    bool prefix = true;
    for (size_t i = 0; i < n && prefix; ++i)
      prefix = st.links[i]->choices[0].label == cur.links[i]->choices[0].label;
    if (prefix) return e;
  }
  return nullptr;
}

// --- Rule selection ---------------------------------------------------------

std::optional<StepResult> step(const Judgment& j, Mode mode,
                               AnnotationCounter& counter) {
  const bool term = mode == Mode::Terminating;
  if (term) {
    if (match_asmp2(j)) return StepResult{Rule::Asmp2, {}};
    if (match_asmp3(j)) return StepResult{Rule::Asmp3, {}};
  }
  if (j.env.contains(j.left, j.right)) return StepResult{Rule::Asmp, {}};

  switch (j.left->kind) {
    case TypeKind::Rec: {
      Env env = j.env.extended(j.left, j.right, term);
      return StepResult{
          Rule::RecL, {Judgment{unfold(j.left, 1), j.right, std::move(env)}}};
    }

    case TypeKind::End: {
      if (j.right->kind == TypeKind::End) return StepResult{Rule::End, {}};
      if (j.right->kind == TypeKind::Rec) {
        Env env = j.env.extended(j.left, j.right, term);
        TypePtr next =
            term ? unfold(j.right, 1, counter) : unfold(j.right, 1);
        return StepResult{
            Rule::RecR1, {Judgment{j.left, std::move(next), std::move(env)}}};
      }
      return std::nullopt;
    }

    case TypeKind::Branch: {
      if (j.right->kind == TypeKind::Rec) {
        Env env = j.env.extended(j.left, j.right, term);
        TypePtr next =
            term ? unfold(j.right, 1, counter) : unfold(j.right, 1);
        return StepResult{
            Rule::RecR1, {Judgment{j.left, std::move(next), std::move(env)}}};
      }
      if (j.right->kind != TypeKind::Branch) return std::nullopt;
      // Contravariance: every right label must exist on the left.
      for (const Choice& rc : j.right->choices)
        if (!find_choice(*j.left, rc.label)) return std::nullopt;
      StepResult res{Rule::In, {}};
      res.premises.reserve(j.right->choices.size());
      for (const Choice& rc : j.right->choices)
        res.premises.push_back(
            Judgment{find_choice(*j.left, rc.label)->type, rc.type, j.env});
      return res;
    }

    case TypeKind::Select: {
      std::optional<uint64_t> d = depth(j.right);
      if (!d) return std::nullopt;
      if (*d >= 1) {
        Env env = j.env.extended(j.left, j.right, term);
        TypePtr next = term ? unfold(j.right, static_cast<unsigned>(*d), counter)
                            : unfold(j.right, static_cast<unsigned>(*d));
        return StepResult{
            Rule::RecR2, {Judgment{j.left, std::move(next), std::move(env)}}};
      }
      // Depth 0: every leaf of the maximal input context is an output
      // selection; covariance requires every left label in every leaf, and
      // any miss makes the whole rule inapplicable.
      StepResult res{Rule::Out, {}};
      res.premises.reserve(j.left->choices.size());
      for (const Choice& lc : j.left->choices) {
        std::optional<TypePtr> filled = project_input_leaves(j.right, lc.label);
        if (!filled) return std::nullopt;
        res.premises.push_back(Judgment{lc.type, std::move(*filled), j.env});
      }
      return res;
    }

    default:
      return std::nullopt;  // Var/Hole never appear in closed judgments
  }
}

// --- Worklist drivers -------------------------------------------------------

namespace {

// The counter must be the one that decorated the right-hand side, so ids
// minted for branchings exposed by later unfoldings stay distinct from the
// initial decoration.
CheckOutcome run_worklist(Judgment start, Mode mode, uint64_t fuel,
                          bool collect_trace, size_t trace_limit,
                          AnnotationCounter counter) {
  CheckOutcome out;
  std::deque<Judgment> work;
  work.push_back(std::move(start));
  std::unordered_set<Key128, Key128Hash> seen;

  while (!work.empty()) {
    if (out.stats.applications >= fuel) {
      out.verdict = Verdict::FuelExhausted;
      out.stats.frontier = work.size();
      out.stats.distinct_pairs = seen.size();
      return out;
    }
    Judgment j = std::move(work.front());
    work.pop_front();
    out.stats.sigma_max = std::max(out.stats.sigma_max, j.env.size());
    seen.insert(Env::pair_key(j.left->key, j.right->key));

    std::optional<StepResult> r = step(j, mode, counter);
    if (!r) {
      out.verdict = Verdict::NotSubtype;
      out.stats.frontier = work.size() + 1;
      out.stats.distinct_pairs = seen.size();
      out.failing = std::move(j);
      return out;
    }
    ++out.stats.applications;
    if (collect_trace && out.trace.size() < trace_limit)
      out.trace.push_back(
          TraceEntry{r->rule, render(j.left), render(j.right), j.env.size()});
    for (Judgment& p : r->premises) work.push_back(std::move(p));
  }

  out.verdict = Verdict::Subtype;
  out.stats.frontier = 0;
  out.stats.distinct_pairs = seen.size();
  return out;
}

}  // namespace

CheckOutcome semi_check(const TypePtr& t, const TypePtr& s,
                        const CheckOptions& opt) {
  return run_worklist(Judgment{t, s, Env{}}, Mode::Semi, opt.fuel,
                      opt.collect_trace, opt.trace_limit, AnnotationCounter{});
}

std::optional<std::string> fragment_violation(const TypePtr& t,
                                              const TypePtr& s) {
  if (!is_single_output(t)) return "left type is not single-output";
  if (!is_single_input(s)) return "right type is not single-input";
  if (!is_single_input(t) && !is_single_output(s))
    return "left type is not single-input and right type is not "
           "single-output (one of the two is required)";
  return std::nullopt;
}

CheckOutcome decide(const TypePtr& t, const TypePtr& s,
                    const DecideOptions& opt) {
  if (std::optional<std::string> why = fragment_violation(t, s))
    throw FragmentError(*why);
  AnnotationCounter counter;
  TypePtr right = decorate(s, counter);
  uint64_t fuel = opt.step_ceiling == 0 ? UINT64_MAX : opt.step_ceiling;
  return run_worklist(Judgment{t, std::move(right), Env{}}, Mode::Terminating,
                      fuel, opt.collect_trace, opt.trace_limit,
                      std::move(counter));
}

// --- Independent game oracle -------------------------------------------------

OracleOutcome oracle_check(const TypePtr& t, const TypePtr& s,
                           uint64_t pair_bound, unsigned unfold_bound) {
  struct GamePair {
    TypePtr l, r;
  };
  std::deque<GamePair> work;
  std::unordered_set<Key128, Key128Hash> visited;
  bool inconclusive = false;

  auto push = [&](TypePtr l, TypePtr r) {
    if (visited.insert(Env::pair_key(l->key, r->key)).second)
      work.push_back(GamePair{std::move(l), std::move(r)});
    return visited.size() <= pair_bound;
  };
  auto strip_rec = [&](TypePtr r) {
    unsigned k = 0;
    while (r->kind == TypeKind::Rec && k < unfold_bound) {
      r = unfold(r, 1);
      ++k;
    }
    return r;
  };

  push(t, s);
  while (!work.empty()) {
    GamePair p = std::move(work.front());
    work.pop_front();

    switch (p.l->kind) {
      case TypeKind::Rec:
        if (!push(unfold(p.l, 1), p.r))
          return {OracleVerdict::Inconclusive, visited.size()};
        break;

      case TypeKind::End: {
        TypePtr r = strip_rec(p.r);
        if (r->kind == TypeKind::Rec) {
          inconclusive = true;
          break;
        }
        // No unfolding turns a selection or branching into end.
        if (r->kind != TypeKind::End)
          return {OracleVerdict::NotSubtype, visited.size()};
        break;
      }

      case TypeKind::Branch: {
        TypePtr r = strip_rec(p.r);
        if (r->kind == TypeKind::Rec) {
          inconclusive = true;
          break;
        }
        // Unfolding never changes the root label set of a branching.
        if (r->kind != TypeKind::Branch)
          return {OracleVerdict::NotSubtype, visited.size()};
        for (const Choice& rc : r->choices)
          if (!find_choice(*p.l, rc.label))
            return {OracleVerdict::NotSubtype, visited.size()};
        for (const Choice& rc : r->choices)
          if (!push(find_choice(*p.l, rc.label)->type, rc.type))
            return {OracleVerdict::Inconclusive, visited.size()};
        break;
      }

      case TypeKind::Select: {
        std::optional<uint64_t> d = depth(p.r);
        // An undefined depth means no unfolding exposes selections under
        // every input path, so the required context does not exist.
        if (!d) return {OracleVerdict::NotSubtype, visited.size()};
        if (*d > unfold_bound) {
          inconclusive = true;
          break;
        }
        TypePtr u = *d == 0 ? p.r : unfold(p.r, static_cast<unsigned>(*d));
        // Leaf selections and their label sets are stable under further
        // unfolding, so a missing label can never be repaired.
        for (const Choice& lc : p.l->choices) {
          std::optional<TypePtr> filled = project_input_leaves(u, lc.label);
          if (!filled) return {OracleVerdict::NotSubtype, visited.size()};
          if (!push(lc.type, std::move(*filled)))
            return {OracleVerdict::Inconclusive, visited.size()};
        }
        break;
      }

      default:
        break;
    }
  }

  return {inconclusive ? OracleVerdict::Inconclusive : OracleVerdict::Subtype,
          visited.size()};
}

}  // namespace sesub
