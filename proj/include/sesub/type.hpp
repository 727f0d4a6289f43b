#ifndef SESUB_TYPE_HPP
#define SESUB_TYPE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sesub {

using Label = std::string;
using AnnotationId = std::uint64_t;

/// 128-bit structural fingerprint of a term: invariant under renaming of
/// bound recursion variables and blind to branch annotations.
struct Key128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  friend bool operator==(const Key128&, const Key128&) = default;
};

struct Key128Hash {
  std::size_t operator()(const Key128& k) const noexcept {
    return static_cast<std::size_t>(k.hi ^ (k.lo * 0x9e3779b97f4a7c15ULL));
  }
};

enum class TypeKind : std::uint8_t {
  End,
  Var,
  Rec,
  Select,  // output selection +{...}
  Branch,  // input branching &{...}
  Hole,    // context hole, only inside input contexts
};

class Node;
using TypePtr = std::shared_ptr<const Node>;

struct Choice {
  Label label;
  TypePtr type;
};

/// Immutable session-type node. Derived data (size, closedness, fingerprint,
/// output depth) is computed once at construction so that the rule engine can
/// query it in O(1).
class Node {
 public:
  TypeKind kind = TypeKind::End;
  std::string name;                         // Var, Rec
  TypePtr body;                             // Rec
  std::vector<Choice> choices;              // Select, Branch
  std::optional<AnnotationId> annotation;   // Branch
  std::uint32_t hole_index = 0;             // Hole, 1-based

  std::uint64_t size = 1;       // node count
  bool closed = false;          // no free variables and no holes
  bool has_branch = false;      // some Branch occurs in the term
  bool has_select = false;      // some Select occurs in the term
  bool has_hole = false;
  std::vector<std::string> free_vars;  // sorted, distinct
  Key128 key;                   // meaningful only when closed
  std::int64_t out_depth = -1;  // unfoldings to expose outputs; -1 = undefined

  Node() = default;
};

// -- construction ------------------------------------------------------------

TypePtr make_end();
TypePtr make_var(std::string name);
TypePtr make_rec(std::string name, TypePtr body);
TypePtr make_select(std::vector<Choice> choices);
TypePtr make_branch(std::vector<Choice> choices,
                    std::optional<AnnotationId> annotation = std::nullopt);
TypePtr make_hole(std::uint32_t index);

// -- equality and keys -------------------------------------------------------

/// Exact structural equality, annotations and binder names included.
bool equal(const TypePtr& a, const TypePtr& b);

/// Equality up to renaming of bound recursion variables. Annotations are
/// ignored unless ignore_annotations is false.
bool alpha_equal(const TypePtr& a, const TypePtr& b,
                 bool ignore_annotations = true);

/// Alpha-invariant, annotation-blind fingerprint. For closed terms this is
/// the cached Node::key.
Key128 alpha_key(const TypePtr& t);

/// Renames bound recursion variables to t1, t2, ... in left-to-right order
/// of their binders. Requires a closed term.
TypePtr canonicalized(const TypePtr& t);

// -- predicates --------------------------------------------------------------

bool is_closed(const TypePtr& t);

/// Every free occurrence of a recursion variable sits under at least one
/// Select or Branch inside its binder's body.
bool is_contractive(const TypePtr& t);

/// Every Select has exactly one choice.
bool is_single_output(const TypePtr& t);
/// Every Branch has exactly one choice.
bool is_single_input(const TypePtr& t);
/// Every bound recursion variable occurrence sits under at least one Branch
/// inside its binder's body (no infinite runs of outputs).
bool is_input_guarded(const TypePtr& t);

/// True when no Branch carries an annotation.
bool is_plain(const TypePtr& t);
/// True when every Branch carries an annotation.
bool is_decorated(const TypePtr& t);

// -- annotations -------------------------------------------------------------

/// Source of fresh annotation ids; owned by one check session, never shared.
class AnnotationCounter {
 public:
  AnnotationId fresh() { return next_++; }

 private:
  AnnotationId next_ = 1;
};

/// Copy of s with a fresh, pairwise-distinct annotation on every Branch.
TypePtr decorate(const TypePtr& s, AnnotationCounter& counter);

/// Annotation-free copy; shares structure where nothing changes.
TypePtr erase(const TypePtr& s);

// -- unfolding ---------------------------------------------------------------

/// n-unfolding of a plain term.
TypePtr unfold(const TypePtr& t, unsigned n);

/// n-unfolding of a decorated term: branches exposed from under a recursion
/// receive fresh annotations, pre-existing ones are preserved.
TypePtr unfold(const TypePtr& t, unsigned n, AnnotationCounter& counter);

// -- input contexts ----------------------------------------------------------

struct PathStep {
  Label label;
  std::vector<Label> siblings;  // all labels of the branching, source order
};

/// Maximal input-context decomposition of a term: the context descends
/// through Branch constructors only and every non-Branch node reached is a
/// leaf, enumerated left to right 1..m.
struct InputDecomposition {
  struct Leaf {
    std::vector<PathStep> path;
    TypePtr term;
  };

  TypePtr source;
  TypePtr context;  // source with each leaf replaced by a Hole, indices 1..m
  std::vector<Leaf> leaves;

  std::size_t hole_count() const { return leaves.size(); }

  /// Context filled with one replacement per hole, in hole order.
  TypePtr refill(std::span<const TypePtr> replacements) const;
};

InputDecomposition decompose_input_context(const TypePtr& s);

/// Fills hole k of a context with replacements[k-1].
TypePtr fill(const TypePtr& context, std::span<const TypePtr> replacements);

/// The maximal input context of s with every leaf replaced by that leaf's
/// continuation for the given label; nullopt when some leaf is not a
/// selection offering the label. Agrees with decompose_input_context plus
/// refill over the label's continuations, but preserves subtree sharing,
/// which keeps terms whose spines share structure from being copied out to
/// their full tree size.
std::optional<TypePtr> project_input_leaves(const TypePtr& s,
                                            const Label& label);

// -- depth -------------------------------------------------------------------

/// Number of unfoldings needed before every path of s reaches an output
/// selection; nullopt when that never happens.
std::optional<std::uint64_t> depth(const TypePtr& s);

}  // namespace sesub

#endif  // SESUB_TYPE_HPP
