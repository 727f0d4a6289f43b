#include "sesub/type.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace sesub {

namespace {

// -- fingerprint --------------------------------------------------------------

// Two independently seeded 64-bit lanes; mixed per structural token.
struct KeyAcc {
  std::uint64_t h1 = 0xcbf29ce484222325ULL;
  std::uint64_t h2 = 0x9ae16a3b2f90404fULL;

  void mix(std::uint64_t x) {
    h1 = (h1 ^ x) * 0x00000100000001b3ULL;
    h1 ^= h1 >> 29;
    h2 = (h2 + x) * 0x9e3779b97f4a7c15ULL;
    h2 ^= h2 >> 31;
  }

  void mix_string(const std::string& s) {
    mix(s.size());
    for (unsigned char c : s) mix(c);
  }
};

enum : std::uint64_t {
  kTagEnd = 1,
  kTagVarBound = 2,
  kTagRec = 3,
  kTagSelect = 4,
  kTagBranch = 5,
  kTagHole = 6,
  kTagSubKey = 7,
  kTagVarFree = 8,
};

struct BinderLevel {
  const std::string* name;
  std::uint32_t level;
  const BinderLevel* up;
};

const BinderLevel* find_binder(const BinderLevel* env, const std::string& n) {
  for (; env; env = env->up)
    if (*env->name == n) return env;
  return nullptr;
}

// root is hashed structurally even though its cached key is not yet filled in;
// any other closed node contributes its cached key.
void key_walk(const Node* n, const Node* root, const BinderLevel* env,
              std::uint32_t level, KeyAcc& acc) {
  if (n != root && n->closed) {
    acc.mix(kTagSubKey);
    acc.mix(n->key.hi);
    acc.mix(n->key.lo);
    return;
  }
  switch (n->kind) {
    case TypeKind::End:
      acc.mix(kTagEnd);
      return;
    case TypeKind::Var: {
      if (const BinderLevel* b = find_binder(env, n->name)) {
        acc.mix(kTagVarBound);
        acc.mix(level - b->level);
      } else {
        acc.mix(kTagVarFree);
        acc.mix_string(n->name);
      }
      return;
    }
    case TypeKind::Rec: {
      acc.mix(kTagRec);
      BinderLevel here{&n->name, level, env};
      key_walk(n->body.get(), root, &here, level + 1, acc);
      return;
    }
    case TypeKind::Select:
    case TypeKind::Branch: {
      acc.mix(n->kind == TypeKind::Select ? kTagSelect : kTagBranch);
      acc.mix(n->choices.size());
      for (const Choice& c : n->choices) {
        acc.mix_string(c.label);
        key_walk(c.type.get(), root, env, level, acc);
      }
      return;
    }
    case TypeKind::Hole:
      acc.mix(kTagHole);
      acc.mix(n->hole_index);
      return;
  }
}

Key128 compute_key(const Node* n) {
  KeyAcc acc;
  key_walk(n, n, nullptr, 0, acc);
  return {acc.h1, acc.h2};
}

// -- output depth -------------------------------------------------------------

struct RecScope {
  const std::string* name;
  const Node* rec;
  const RecScope* up;       // scope chain at the binder
};

constexpr std::int64_t kDepthUndef = -1;

std::int64_t depth_walk(const Node* n, const RecScope* env,
                        std::vector<const Node*>& visiting, const Node* root);

std::int64_t depth_of_rec(const Node* rec, const RecScope* env,
                          std::vector<const Node*>& visiting, const Node* root) {
  if (std::find(visiting.begin(), visiting.end(), rec) != visiting.end())
    return kDepthUndef;
  visiting.push_back(rec);
  RecScope here{&rec->name, rec, env};
  std::int64_t d = depth_walk(rec->body.get(), &here, visiting, root);
  visiting.pop_back();
  return d == kDepthUndef ? kDepthUndef : d + 1;
}

std::int64_t depth_walk(const Node* n, const RecScope* env,
                        std::vector<const Node*>& visiting, const Node* root) {
  if (n != root && n->closed) return n->out_depth;
  switch (n->kind) {
    case TypeKind::End:
    case TypeKind::Hole:
      return kDepthUndef;
    case TypeKind::Select:
      return 0;
    case TypeKind::Branch: {
      std::int64_t best = 0;
      for (const Choice& c : n->choices) {
        std::int64_t d = depth_walk(c.type.get(), env, visiting, root);
        if (d == kDepthUndef) return kDepthUndef;
        best = std::max(best, d);
      }
      return best;
    }
    case TypeKind::Var: {
      for (const RecScope* s = env; s; s = s->up)
        if (*s->name == n->name) return depth_of_rec(s->rec, s->up, visiting, root);
      return kDepthUndef;  // free variable: no output reachable through it
    }
    case TypeKind::Rec:
      return depth_of_rec(n, env, visiting, root);
  }
  return kDepthUndef;
}

std::int64_t compute_depth(const Node* n) {
  std::vector<const Node*> visiting;
  return depth_walk(n, nullptr, visiting, n);
}

// -- derived fields -----------------------------------------------------------

void finish_node(Node& n) {
  switch (n.kind) {
    case TypeKind::End:
      break;
    case TypeKind::Var:
      n.free_vars.push_back(n.name);
      break;
    case TypeKind::Rec: {
      n.size += n.body->size;
      n.has_branch = n.body->has_branch;
      n.has_select = n.body->has_select;
      n.has_hole = n.body->has_hole;
      for (const std::string& v : n.body->free_vars)
        if (v != n.name) n.free_vars.push_back(v);
      break;
    }
    case TypeKind::Select:
    case TypeKind::Branch: {
      n.has_branch = n.kind == TypeKind::Branch;
      n.has_select = n.kind == TypeKind::Select;
      for (const Choice& c : n.choices) {
        n.size += c.type->size;
        n.has_branch = n.has_branch || c.type->has_branch;
        n.has_select = n.has_select || c.type->has_select;
        n.has_hole = n.has_hole || c.type->has_hole;
        n.free_vars.insert(n.free_vars.end(), c.type->free_vars.begin(),
                           c.type->free_vars.end());
      }
      std::sort(n.free_vars.begin(), n.free_vars.end());
      n.free_vars.erase(std::unique(n.free_vars.begin(), n.free_vars.end()),
                        n.free_vars.end());
      break;
    }
    case TypeKind::Hole:
      n.has_hole = true;
      break;
  }
  n.closed = n.free_vars.empty() && !n.has_hole;
  if (n.closed) {
    n.key = compute_key(&n);
    n.out_depth = compute_depth(&n);
  }
}

void check_choices(const std::vector<Choice>& cs, const char* what) {
  if (cs.empty()) throw std::invalid_argument(std::string(what) + " needs at least one choice");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].label.empty())
      throw std::invalid_argument(std::string(what) + " has an empty label");
    if (!cs[i].type) throw std::invalid_argument(std::string(what) + " has a null continuation");
    for (std::size_t j = i + 1; j < cs.size(); ++j)
      if (cs[i].label == cs[j].label)
        throw std::invalid_argument("duplicate label '" + cs[i].label + "'");
  }
}

bool free_in(const Node* n, const std::string& var) {
  return std::binary_search(n->free_vars.begin(), n->free_vars.end(), var);
}

}  // namespace

// -- construction ------------------------------------------------------------

TypePtr make_end() {
  static const TypePtr k = [] {
    auto n = std::make_shared<Node>();
    n->kind = TypeKind::End;
    finish_node(*n);
    return TypePtr(n);
  }();
  return k;
}

TypePtr make_var(std::string name) {
  if (name.empty()) throw std::invalid_argument("variable name is empty");
  auto n = std::make_shared<Node>();
  n->kind = TypeKind::Var;
  n->name = std::move(name);
  finish_node(*n);
  return n;
}

TypePtr make_rec(std::string name, TypePtr body) {
  if (name.empty()) throw std::invalid_argument("recursion variable name is empty");
  if (!body) throw std::invalid_argument("recursion body is null");
  auto n = std::make_shared<Node>();
  n->kind = TypeKind::Rec;
  n->name = std::move(name);
  n->body = std::move(body);
  finish_node(*n);
  return n;
}

TypePtr make_select(std::vector<Choice> choices) {
  check_choices(choices, "selection");
  auto n = std::make_shared<Node>();
  n->kind = TypeKind::Select;
  n->choices = std::move(choices);
  finish_node(*n);
  return n;
}

TypePtr make_branch(std::vector<Choice> choices,
                    std::optional<AnnotationId> annotation) {
  check_choices(choices, "branching");
  auto n = std::make_shared<Node>();
  n->kind = TypeKind::Branch;
  n->choices = std::move(choices);
  n->annotation = annotation;
  finish_node(*n);
  return n;
}

TypePtr make_hole(std::uint32_t index) {
  if (index == 0) throw std::invalid_argument("hole indices are 1-based");
  auto n = std::make_shared<Node>();
  n->kind = TypeKind::Hole;
  n->hole_index = index;
  finish_node(*n);
  return n;
}

// -- equality ----------------------------------------------------------------

bool equal(const TypePtr& a, const TypePtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::End:
      return true;
    case TypeKind::Var:
      return a->name == b->name;
    case TypeKind::Rec:
      return a->name == b->name && equal(a->body, b->body);
    case TypeKind::Select:
    case TypeKind::Branch: {
      if (a->annotation != b->annotation) return false;
      if (a->choices.size() != b->choices.size()) return false;
      for (std::size_t i = 0; i < a->choices.size(); ++i) {
        if (a->choices[i].label != b->choices[i].label) return false;
        if (!equal(a->choices[i].type, b->choices[i].type)) return false;
      }
      return true;
    }
    case TypeKind::Hole:
      return a->hole_index == b->hole_index;
  }
  return false;
}

namespace {

struct BinderPair {
  const std::string* left;
  const std::string* right;
  const BinderPair* up;
};

struct NodePairHash {
  std::size_t operator()(const std::pair<const Node*, const Node*>& p) const {
    auto h = std::hash<const Node*>{};
    return h(p.first) * 0x9e3779b97f4a7c15ULL + h(p.second);
  }
};

using AlphaMemo =
    std::unordered_set<std::pair<const Node*, const Node*>, NodePairHash>;

// The memo records closed pairs already proven equal, so a comparison of
// two terms that share subtrees visits each distinct pair once instead of
// once per occurrence. Closed pairs ignore the binder environment, which is
// what makes the cache sound.
bool alpha_walk(const Node* a, const Node* b, const BinderPair* env,
                bool ignore_ann, AlphaMemo& memo) {
  if (a == b && a->closed) return true;
  if (a->kind != b->kind) return false;
  bool cacheable = a->closed && b->closed;
  if (cacheable) {
    if (!(a->key == b->key)) return false;
    if (memo.contains({a, b})) return true;
  }
  bool result = false;
  switch (a->kind) {
    case TypeKind::End:
      result = true;
      break;
    case TypeKind::Hole:
      result = a->hole_index == b->hole_index;
      break;
    case TypeKind::Var: {
      result = a->name == b->name;  // free on both sides unless bound below
      for (const BinderPair* e = env; e; e = e->up) {
        bool la = *e->left == a->name;
        bool lb = *e->right == b->name;
        if (la || lb) {
          result = la && lb;
          break;
        }
      }
      break;
    }
    case TypeKind::Rec: {
      BinderPair here{&a->name, &b->name, env};
      result = alpha_walk(a->body.get(), b->body.get(), &here, ignore_ann,
                          memo);
      break;
    }
    case TypeKind::Select:
    case TypeKind::Branch: {
      if (!ignore_ann && a->annotation != b->annotation) break;
      if (a->choices.size() != b->choices.size()) break;
      result = true;
      for (std::size_t i = 0; i < a->choices.size() && result; ++i) {
        result = a->choices[i].label == b->choices[i].label &&
                 alpha_walk(a->choices[i].type.get(),
                            b->choices[i].type.get(), env, ignore_ann, memo);
      }
      break;
    }
  }
  if (result && cacheable) memo.insert({a, b});
  return result;
}

}  // namespace

bool alpha_equal(const TypePtr& a, const TypePtr& b, bool ignore_annotations) {
  if (!a || !b) return a == b;
  if (a->closed && b->closed && !(a->key == b->key)) return false;
  AlphaMemo memo;
  return alpha_walk(a.get(), b.get(), nullptr, ignore_annotations, memo);
}

Key128 alpha_key(const TypePtr& t) {
  if (t->closed) return t->key;
  return compute_key(t.get());
}

namespace {

struct RenamePair {
  const std::string* from;
  std::string to;
  const RenamePair* up;
};

TypePtr canon_walk(const TypePtr& t, const RenamePair* env, unsigned& counter) {
  switch (t->kind) {
    case TypeKind::End:
    case TypeKind::Hole:
      return t;
    case TypeKind::Var: {
      for (const RenamePair* e = env; e; e = e->up)
        if (*e->from == t->name) return make_var(e->to);
      return t;
    }
    case TypeKind::Rec: {
      RenamePair here{&t->name, "t" + std::to_string(++counter), env};
      TypePtr body = canon_walk(t->body, &here, counter);
      return make_rec(here.to, std::move(body));
    }
    case TypeKind::Select:
    case TypeKind::Branch: {
      std::vector<Choice> cs;
      cs.reserve(t->choices.size());
      for (const Choice& c : t->choices)
        cs.push_back({c.label, canon_walk(c.type, env, counter)});
      return t->kind == TypeKind::Select
                 ? make_select(std::move(cs))
                 : make_branch(std::move(cs), t->annotation);
    }
  }
  return t;
}

}  // namespace

TypePtr canonicalized(const TypePtr& t) {
  unsigned counter = 0;
  return canon_walk(t, nullptr, counter);
}

// -- predicates ---------------------------------------------------------------

bool is_closed(const TypePtr& t) { return t->closed; }

namespace {

enum class GuardKind { SelectOrBranch, BranchOnly };

// True when every free occurrence of `var` in `body` sits under at least one
// guarding constructor. `guarded` is the state accumulated so far.
bool occurrences_guarded(const Node* body, const std::string& var, bool guarded,
                         GuardKind kind) {
  if (!free_in(body, var)) return true;
  switch (body->kind) {
    case TypeKind::Var:
      return guarded;  // name == var, by the free check
    case TypeKind::Rec:
      return occurrences_guarded(body->body.get(), var, guarded, kind);
    case TypeKind::Select:
    case TypeKind::Branch: {
      bool g = guarded || body->kind == TypeKind::Branch ||
               (kind == GuardKind::SelectOrBranch);
      for (const Choice& c : body->choices)
        if (!occurrences_guarded(c.type.get(), var, g, kind)) return false;
      return true;
    }
    default:
      return true;
  }
}

bool every_rec_guarded(const Node* n, GuardKind kind) {
  switch (n->kind) {
    case TypeKind::Rec:
      return occurrences_guarded(n->body.get(), n->name, false, kind) &&
             every_rec_guarded(n->body.get(), kind);
    case TypeKind::Select:
    case TypeKind::Branch:
      for (const Choice& c : n->choices)
        if (!every_rec_guarded(c.type.get(), kind)) return false;
      return true;
    default:
      return true;
  }
}

}  // namespace

bool is_contractive(const TypePtr& t) {
  return every_rec_guarded(t.get(), GuardKind::SelectOrBranch);
}

bool is_input_guarded(const TypePtr& t) {
  return every_rec_guarded(t.get(), GuardKind::BranchOnly);
}

namespace {

bool single_choice_only(const Node* n, TypeKind which) {
  switch (n->kind) {
    case TypeKind::Rec:
      return single_choice_only(n->body.get(), which);
    case TypeKind::Select:
    case TypeKind::Branch: {
      if (n->kind == which && n->choices.size() != 1) return false;
      for (const Choice& c : n->choices)
        if (!single_choice_only(c.type.get(), which)) return false;
      return true;
    }
    default:
      return true;
  }
}

bool annotation_state(const Node* n, bool want_all) {
  // want_all: every Branch annotated. !want_all: no Branch annotated.
  switch (n->kind) {
    case TypeKind::Rec:
      return annotation_state(n->body.get(), want_all);
    case TypeKind::Select:
    case TypeKind::Branch: {
      if (n->kind == TypeKind::Branch &&
          n->annotation.has_value() != want_all)
        return false;
      for (const Choice& c : n->choices)
        if (!annotation_state(c.type.get(), want_all)) return false;
      return true;
    }
    default:
      return true;
  }
}

}  // namespace

bool is_single_output(const TypePtr& t) {
  return single_choice_only(t.get(), TypeKind::Select);
}

bool is_single_input(const TypePtr& t) {
  return single_choice_only(t.get(), TypeKind::Branch);
}

bool is_plain(const TypePtr& t) { return annotation_state(t.get(), false); }

bool is_decorated(const TypePtr& t) { return annotation_state(t.get(), true); }

// -- annotations ----------------------------------------------------------------

TypePtr decorate(const TypePtr& s, AnnotationCounter& counter) {
  switch (s->kind) {
    case TypeKind::End:
    case TypeKind::Var:
    case TypeKind::Hole:
      return s;
    case TypeKind::Rec:
      return make_rec(s->name, decorate(s->body, counter));
    case TypeKind::Select:
    case TypeKind::Branch: {
      std::vector<Choice> cs;
      cs.reserve(s->choices.size());
      for (const Choice& c : s->choices)
        cs.push_back({c.label, decorate(c.type, counter)});
      if (s->kind == TypeKind::Select) return make_select(std::move(cs));
      return make_branch(std::move(cs), counter.fresh());
    }
  }
  return s;
}

namespace {

bool subtree_annotated(const Node* n) {
  if (n->kind == TypeKind::Branch && n->annotation) return true;
  if (n->kind == TypeKind::Rec) return subtree_annotated(n->body.get());
  if (n->kind == TypeKind::Select || n->kind == TypeKind::Branch) {
    for (const Choice& c : n->choices)
      if (subtree_annotated(c.type.get())) return true;
  }
  return false;
}

// Bottom-up rebuild across Select/Branch layers. `leaf` maps every
// non-choice node (End, Var, Rec, Hole) to its replacement; it may also
// short-circuit whole subtrees by handling Select/Branch nodes itself and
// returning a value, or return nullptr to request descent.
template <class Leaf>
TypePtr transform_spine(const TypePtr& root, Leaf&& leaf, bool strip_annotations) {
  if (TypePtr direct = leaf(root)) return direct;
  struct Frame {
    TypePtr node;
    std::vector<TypePtr> kids;
  };
  std::vector<Frame> stack;
  stack.push_back({root, {}});
  stack.back().kids.reserve(root->choices.size());
  for (;;) {
    Frame& f = stack.back();
    if (f.kids.size() == f.node->choices.size()) {
      std::vector<Choice> cs;
      cs.reserve(f.kids.size());
      for (std::size_t i = 0; i < f.kids.size(); ++i)
        cs.push_back({f.node->choices[i].label, std::move(f.kids[i])});
      TypePtr built =
          f.node->kind == TypeKind::Select
              ? make_select(std::move(cs))
              : make_branch(std::move(cs), strip_annotations
                                               ? std::nullopt
                                               : f.node->annotation);
      stack.pop_back();
      if (stack.empty()) return built;
      stack.back().kids.push_back(std::move(built));
    } else {
      const TypePtr& child = f.node->choices[f.kids.size()].type;
      if (TypePtr done = leaf(child)) {
        f.kids.push_back(std::move(done));
      } else {
        stack.push_back({child, {}});
        stack.back().kids.reserve(child->choices.size());
      }
    }
  }
}

TypePtr erase_rec(const TypePtr& s);

TypePtr erase_leaf(const TypePtr& n) {
  if (!subtree_annotated(n.get())) return n;
  switch (n->kind) {
    case TypeKind::Rec:
      return make_rec(n->name, erase_rec(n->body));
    case TypeKind::Select:
    case TypeKind::Branch:
      return nullptr;  // descend
    default:
      return n;
  }
}

TypePtr erase_rec(const TypePtr& s) {
  return transform_spine(s, erase_leaf, /*strip_annotations=*/true);
}

}  // namespace

TypePtr erase(const TypePtr& s) { return erase_rec(s); }

// -- unfolding ------------------------------------------------------------------

namespace {

// Sharing-preserving substitution for plain terms: subterms without the
// variable are reused as-is, and subterms reached twice through sharing are
// rebuilt once. Without the memo a term that shares subtrees would be
// copied out to its full tree size.
TypePtr subst_plain_walk(const TypePtr& t, const std::string& var,
                         const TypePtr& repl,
                         std::unordered_map<const Node*, TypePtr>& memo) {
  if (!free_in(t.get(), var)) return t;
  if (auto it = memo.find(t.get()); it != memo.end()) return it->second;
  TypePtr built;
  switch (t->kind) {
    case TypeKind::Var:
      built = repl;
      break;
    case TypeKind::Rec:
      built = make_rec(t->name, subst_plain_walk(t->body, var, repl, memo));
      break;
    case TypeKind::Select:
    case TypeKind::Branch: {
      std::vector<Choice> cs;
      cs.reserve(t->choices.size());
      for (const Choice& c : t->choices)
        cs.push_back({c.label, subst_plain_walk(c.type, var, repl, memo)});
      built = t->kind == TypeKind::Select
                  ? make_select(std::move(cs))
                  : make_branch(std::move(cs), t->annotation);
      break;
    }
    default:
      built = t;
      break;
  }
  memo.emplace(t.get(), built);
  return built;
}

TypePtr subst_plain(const TypePtr& t, const std::string& var,
                    const TypePtr& repl) {
  std::unordered_map<const Node*, TypePtr> memo;
  return subst_plain_walk(t, var, repl, memo);
}

// Substitution for decorated terms. The substituted body is copied in full
// and every Branch in the copy gets a fresh annotation, so annotations of
// exposed branchings stay pairwise distinct across the whole session; only
// the grafted replacement occurrences are shared.
TypePtr subst_fresh(const TypePtr& t, const std::string* var,
                    const TypePtr& repl, AnnotationCounter& ac) {
  switch (t->kind) {
    case TypeKind::End:
    case TypeKind::Hole:
      return t;
    case TypeKind::Var:
      return (var && t->name == *var) ? repl : t;
    case TypeKind::Rec: {
      const std::string* inner = (var && t->name == *var) ? nullptr : var;
      return make_rec(t->name, subst_fresh(t->body, inner, repl, ac));
    }
    case TypeKind::Select:
    case TypeKind::Branch: {
      std::vector<Choice> cs;
      cs.reserve(t->choices.size());
      for (const Choice& c : t->choices)
        cs.push_back({c.label, subst_fresh(c.type, var, repl, ac)});
      if (t->kind == TypeKind::Select) return make_select(std::move(cs));
      return make_branch(std::move(cs), ac.fresh());
    }
  }
  return t;
}

// Plain unfolding rebuilds the choice spine above the recursive definitions
// it expands. The memo keeps the rebuilt spine as shared as the input spine
// was; an explicit stack keeps arbitrarily deep spines off the call stack.
TypePtr unfold_once_plain(const TypePtr& root) {
  std::unordered_map<const Node*, TypePtr> memo;
  std::vector<TypePtr> stack{root};
  while (!stack.empty()) {
    TypePtr n = stack.back();  // copy: pushes below reallocate the stack
    if (memo.contains(n.get())) {
      stack.pop_back();
      continue;
    }
    if (n->kind == TypeKind::Select || n->kind == TypeKind::Branch) {
      bool ready = true;
      for (const Choice& c : n->choices)
        if (!memo.contains(c.type.get())) {
          stack.push_back(c.type);
          ready = false;
        }
      if (!ready) continue;
      std::vector<Choice> cs;
      cs.reserve(n->choices.size());
      for (const Choice& c : n->choices)
        cs.push_back({c.label, memo.at(c.type.get())});
      TypePtr built = n->kind == TypeKind::Select
                          ? make_select(std::move(cs))
                          : make_branch(std::move(cs), n->annotation);
      memo.emplace(n.get(), std::move(built));
    } else if (n->kind == TypeKind::Rec) {
      memo.emplace(n.get(), subst_plain(n->body, n->name, n));
    } else {
      memo.emplace(n.get(), n);
    }
    stack.pop_back();
  }
  return memo.at(root.get());
}

TypePtr unfold_once(const TypePtr& t, AnnotationCounter* ac) {
  if (!ac) return unfold_once_plain(t);
  auto leaf = [ac](const TypePtr& n) -> TypePtr {
    switch (n->kind) {
      case TypeKind::Rec:
        return subst_fresh(n->body, &n->name, n, *ac);
      case TypeKind::Select:
      case TypeKind::Branch:
        return nullptr;  // descend
      default:
        return n;
    }
  };
  return transform_spine(t, leaf, /*strip_annotations=*/false);
}

}  // namespace

TypePtr unfold(const TypePtr& t, unsigned n) {
  TypePtr cur = t;
  for (unsigned i = 0; i < n; ++i) cur = unfold_once(cur, nullptr);
  return cur;
}

TypePtr unfold(const TypePtr& t, unsigned n, AnnotationCounter& counter) {
  TypePtr cur = t;
  for (unsigned i = 0; i < n; ++i) cur = unfold_once(cur, &counter);
  return cur;
}

// -- input contexts ---------------------------------------------------------------

InputDecomposition decompose_input_context(const TypePtr& s) {
  InputDecomposition out;
  out.source = s;
  if (s->kind != TypeKind::Branch) {
    out.context = make_hole(1);
    out.leaves.push_back({{}, s});
    return out;
  }

  auto step_of = [](const Node* branch, std::size_t idx) {
    PathStep step;
    step.label = branch->choices[idx].label;
    step.siblings.reserve(branch->choices.size());
    for (const Choice& c : branch->choices) step.siblings.push_back(c.label);
    return step;
  };

  struct Frame {
    const Node* node;
    std::vector<TypePtr> kids;
  };
  std::vector<Frame> stack;
  std::vector<PathStep> path;
  stack.push_back({s.get(), {}});
  for (;;) {
    Frame& f = stack.back();
    std::size_t i = f.kids.size();
    if (i == f.node->choices.size()) {
      std::vector<Choice> cs;
      cs.reserve(i);
      for (std::size_t k = 0; k < i; ++k)
        cs.push_back({f.node->choices[k].label, std::move(f.kids[k])});
      TypePtr ctx = make_branch(std::move(cs), f.node->annotation);
      stack.pop_back();
      if (stack.empty()) {
        out.context = std::move(ctx);
        return out;
      }
      path.pop_back();
      stack.back().kids.push_back(std::move(ctx));
    } else {
      const TypePtr& child = f.node->choices[i].type;
      if (child->kind == TypeKind::Branch) {
        path.push_back(step_of(f.node, i));
        stack.push_back({child.get(), {}});
      } else {
        InputDecomposition::Leaf leaf;
        leaf.path = path;
        leaf.path.push_back(step_of(f.node, i));
        leaf.term = child;
        out.leaves.push_back(std::move(leaf));
        f.kids.push_back(
            make_hole(static_cast<std::uint32_t>(out.leaves.size())));
      }
    }
  }
}

TypePtr fill(const TypePtr& context, std::span<const TypePtr> replacements) {
  auto leaf = [&](const TypePtr& n) -> TypePtr {
    switch (n->kind) {
      case TypeKind::Hole: {
        if (n->hole_index > replacements.size())
          throw std::invalid_argument("hole index out of range");
        return replacements[n->hole_index - 1];
      }
      case TypeKind::Select:
      case TypeKind::Branch:
        return n->has_hole ? nullptr : n;
      default:
        return n;
    }
  };
  return transform_spine(context, leaf, /*strip_annotations=*/false);
}

TypePtr InputDecomposition::refill(std::span<const TypePtr> replacements) const {
  if (replacements.size() != leaves.size())
    throw std::invalid_argument("refill needs one replacement per hole");
  return fill(context, replacements);
}

std::optional<TypePtr> project_input_leaves(const TypePtr& s,
                                            const Label& label) {
  std::unordered_map<const Node*, TypePtr> memo;
  std::vector<TypePtr> stack{s};
  while (!stack.empty()) {
    TypePtr n = stack.back();  // copy: pushes below reallocate the stack
    if (memo.contains(n.get())) {
      stack.pop_back();
      continue;
    }
    if (n->kind == TypeKind::Branch) {
      bool ready = true;
      for (const Choice& c : n->choices)
        if (!memo.contains(c.type.get())) {
          stack.push_back(c.type);
          ready = false;
        }
      if (!ready) continue;
      std::vector<Choice> cs;
      cs.reserve(n->choices.size());
      for (const Choice& c : n->choices)
        cs.push_back({c.label, memo.at(c.type.get())});
      memo.emplace(n.get(), make_branch(std::move(cs), n->annotation));
    } else if (n->kind == TypeKind::Select) {
      const Choice* hit = nullptr;
      for (const Choice& c : n->choices)
        if (c.label == label) {
          hit = &c;
          break;
        }
      if (!hit) return std::nullopt;
      memo.emplace(n.get(), hit->type);
    } else {
      return std::nullopt;  // a context leaf that cannot be selected from
    }
    stack.pop_back();
  }
  return memo.at(s.get());
}

// -- depth -------------------------------------------------------------------------

std::optional<std::uint64_t> depth(const TypePtr& s) {
  std::int64_t d = s->closed ? s->out_depth : compute_depth(s.get());
  if (d == kDepthUndef) return std::nullopt;
  return static_cast<std::uint64_t>(d);
}

}  // namespace sesub
