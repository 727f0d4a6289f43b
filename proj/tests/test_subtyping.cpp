#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "sesub/subtyping.hpp"
#include "sesub/syntax.hpp"
#include "sesub/type.hpp"

using namespace sesub;

namespace {

TypePtr P(const char* s) { return parse(s); }

// The pair of mutually recursive loops used throughout: the left alternates
// input and output, the right buffers two inputs per output.
TypePtr alt_loop() { return P("rec t. &{l: +{l: t}}"); }
TypePtr double_in_loop() { return P("rec t. &{l: &{l: +{l: t}}}"); }

// A pure output loop against a right that demands an input first. Outputs
// can be anticipated past the input, so the pair is related even though the
// unmatched inputs pile up forever.
TypePtr out_loop() { return P("rec t. +{a: t}"); }
TypePtr guarded_out_loop() { return P("rec s. &{b: +{a: s}}"); }

TypePtr vending_left() {
  return P("rec t. &{but1: +{coffee: t}, but2: +{tea: t}}");
}
TypePtr vending_right() {
  return P("rec t. &{but2: +{coffee: t, tea: &{but1: t, but2: t}}}");
}

std::optional<StepResult> do_step(const Judgment& j, Mode mode) {
  AnnotationCounter ac;
  return step(j, mode, ac);
}

std::vector<Rule> trace_rules(const CheckOutcome& out) {
  std::vector<Rule> rules;
  rules.reserve(out.trace.size());
  for (const TraceEntry& e : out.trace) rules.push_back(e.rule);
  return rules;
}

}  // namespace

// ---------------------------------------------------------------------------
// depth
// ---------------------------------------------------------------------------

TEST_CASE("depth counts unfoldings until outputs cover every path") {
  CHECK(depth(P("+{l: end}")) == 0);
  CHECK(depth(P("end")) == std::nullopt);
  CHECK(depth(P("rec t. &{l: +{l: t}}")) == 1);
  CHECK(depth(P("rec t. &{l: t}")) == std::nullopt);

  // branchings add nothing by themselves: only recursions count
  CHECK(depth(P("&{b: +{a: end}}")) == 0);
  CHECK(depth(P("&{a: +{x: end}, b: &{c: +{y: end}}}")) == 0);
  CHECK(depth(guarded_out_loop()) == 1);
  CHECK(depth(P("rec t. &{l: rec s. &{m: +{x: t}}}")) == 2);

  // one path that never reaches an output poisons the whole term
  CHECK(depth(P("&{a: +{x: end}, b: end}")) == std::nullopt);
  CHECK(depth(P("rec t. &{a: +{x: t}, b: rec s. &{m: s}}")) == std::nullopt);
}

// ---------------------------------------------------------------------------
// input-context projection
// ---------------------------------------------------------------------------

TEST_CASE("projecting a label through the maximal input context") {
  CHECK(equal(*project_input_leaves(P("+{a: end, b: +{x: end}}"), "b"),
              P("+{x: end}")));
  CHECK(equal(*project_input_leaves(P("&{b: +{a: end}}"), "a"), P("&{b: end}")));
  CHECK(equal(*project_input_leaves(
                  P("&{u: +{a: +{p: end}}, v: &{w: +{a: +{q: end}}}}"), "a"),
              P("&{u: +{p: end}, v: &{w: +{q: end}}}")));

  // a leaf missing the label, or not a selection at all, kills the projection
  CHECK(!project_input_leaves(P("&{u: +{a: end}, v: +{b: end}}"), "a"));
  CHECK(!project_input_leaves(P("&{u: end}"), "a"));
  CHECK(!project_input_leaves(P("&{u: rec t. +{a: t}}"), "a"));
  CHECK(!project_input_leaves(P("end"), "a"));
}

TEST_CASE("projection agrees with decompose plus refill") {
  std::mt19937_64 rng(9101);
  testing::GenOptions opt;
  const std::vector<Label> labels = {"a", "b", "c"};
  for (int i = 0; i < 300; ++i) {
    TypePtr t = testing::gen_type(rng, opt);
    const Label& l = labels[static_cast<size_t>(i) % labels.size()];

    InputDecomposition d = decompose_input_context(t);
    bool all_offer = true;
    std::vector<TypePtr> continuations;
    for (const auto& leaf : d.leaves) {
      const Choice* hit = nullptr;
      if (leaf.term->kind == TypeKind::Select)
        for (const Choice& c : leaf.term->choices)
          if (c.label == l) hit = &c;
      if (!hit) {
        all_offer = false;
        break;
      }
      continuations.push_back(hit->type);
    }

    std::optional<TypePtr> got = project_input_leaves(t, l);
    if (all_offer) {
      REQUIRE(got.has_value());
      CHECK(equal(*got, d.refill(continuations)));
    } else {
      CHECK(!got.has_value());
    }
  }
}

// ---------------------------------------------------------------------------
// environments
// ---------------------------------------------------------------------------

TEST_CASE("environments are persistent and siblings stay isolated") {
  TypePtr a = P("+{x: end}");
  TypePtr b = P("&{y: end}");
  TypePtr c = P("end");
  TypePtr d = P("rec t. +{m: t}");

  Env e0;
  CHECK(e0.size() == 0);
  CHECK(!e0.contains(a, b));
  CHECK(e0.head() == nullptr);

  Env e1 = e0.extended(a, b, true);
  Env e2 = e1.extended(c, d, false);
  CHECK(e0.size() == 0);
  CHECK(e1.size() == 1);
  CHECK(e2.size() == 2);

  CHECK(e1.contains(a, b));
  CHECK(!e1.contains(c, d));
  CHECK(!e1.contains(b, a));
  CHECK(e2.contains(a, b));
  CHECK(e2.contains(c, d));
  CHECK(!e0.contains(a, b));

  // a sibling extension of e1 never sees e2's entry
  Env e2b = e1.extended(b, c, true);
  CHECK(e2b.contains(b, c));
  CHECK(!e2b.contains(c, d));
  CHECK(!e2.contains(b, c));

  // newest entry first along the head chain
  REQUIRE(e2.head() != nullptr);
  CHECK(equal(e2.head()->left, c));
  CHECK(e2.head()->right == nullptr);  // not retained
  REQUIRE(e2.head()->parent != nullptr);
  CHECK(equal(e2.head()->parent->left, a));
  REQUIRE(e2.head()->parent->right != nullptr);
  CHECK(equal(e2.head()->parent->right, b));
}

TEST_CASE("environment membership ignores annotations and binder names") {
  AnnotationCounter ac;
  TypePtr left = P("+{x: end}");
  TypePtr right = P("&{y: +{x: end}}");
  Env e = Env().extended(left, decorate(right, ac), true);
  CHECK(e.contains(left, right));
  CHECK(e.contains(left, decorate(right, ac)));

  Env f = Env().extended(P("rec t. +{m: t}"), P("rec u. &{l: u}"), false);
  CHECK(f.contains(P("rec s. +{m: s}"), P("rec v. &{l: v}")));
  CHECK(!f.contains(P("rec s. +{m: s}"), P("rec v. &{m: v}")));
}

TEST_CASE("pair keys are order-sensitive") {
  Key128 ka = alpha_key(P("+{x: end}"));
  Key128 kb = alpha_key(P("&{y: end}"));
  CHECK(!(Env::pair_key(ka, kb) == Env::pair_key(kb, ka)));
  CHECK(Env::pair_key(ka, kb) == Env::pair_key(ka, kb));
}

// ---------------------------------------------------------------------------
// single rule applications
// ---------------------------------------------------------------------------

TEST_CASE("closed terminals close and mismatched terminals stick") {
  auto r = do_step(Judgment{P("end"), P("end"), Env{}}, Mode::Semi);
  REQUIRE(r.has_value());
  CHECK(r->rule == Rule::End);
  CHECK(r->premises.empty());

  CHECK(!do_step(Judgment{P("end"), P("+{l: end}"), Env{}}, Mode::Semi));
  CHECK(!do_step(Judgment{P("end"), P("&{l: end}"), Env{}}, Mode::Semi));
  CHECK(!do_step(Judgment{P("&{l: end}"), P("+{l: end}"), Env{}}, Mode::Semi));
  CHECK(!do_step(Judgment{P("&{l: end}"), P("end"), Env{}}, Mode::Semi));
  CHECK(!do_step(Judgment{P("+{l: end}"), P("end"), Env{}}, Mode::Semi));
}

TEST_CASE("a recursive right is unfolded once for an end or input left") {
  TypePtr s = P("rec t. &{l: t}");
  auto r = do_step(Judgment{P("end"), s, Env{}}, Mode::Semi);
  REQUIRE(r.has_value());
  CHECK(r->rule == Rule::RecR1);
  REQUIRE(r->premises.size() == 1);
  CHECK(equal(r->premises[0].right, P("&{l: rec t. &{l: t}}")));
  CHECK(r->premises[0].env.size() == 1);

  // the unfolded judgment is stuck: an end left never matches a branching
  CHECK(!do_step(r->premises[0], Mode::Semi));

  auto r2 = do_step(Judgment{P("&{l: end}"), P("rec t. +{l: t}"), Env{}},
                    Mode::Semi);
  REQUIRE(r2.has_value());
  CHECK(r2->rule == Rule::RecR1);
}

TEST_CASE("a recursive left is unfolded before anything else") {
  TypePtr t = P("rec t. +{a: t}");
  auto r = do_step(Judgment{t, P("end"), Env{}}, Mode::Semi);
  REQUIRE(r.has_value());
  CHECK(r->rule == Rule::RecL);
  REQUIRE(r->premises.size() == 1);
  CHECK(equal(r->premises[0].left, P("+{a: rec t. +{a: t}}")));
  CHECK(r->premises[0].env.size() == 1);
  CHECK(r->premises[0].env.contains(t, P("end")));

  // the premise sticks: no output is available on an end right
  CHECK(!do_step(r->premises[0], Mode::Semi));
}

TEST_CASE("a remembered pair closes in either mode") {
  TypePtr t = alt_loop();
  TypePtr s = double_in_loop();
  Env e = Env().extended(t, s, false);
  auto r = do_step(Judgment{t, s, e}, Mode::Semi);
  REQUIRE(r.has_value());
  CHECK(r->rule == Rule::Asmp);
  CHECK(r->premises.empty());

  Env et = Env().extended(t, s, true);
  auto rt = do_step(Judgment{t, s, et}, Mode::Terminating);
  REQUIRE(rt.has_value());
  CHECK(rt->rule == Rule::Asmp);
}

TEST_CASE("inputs match by inclusion of the right labels in the left") {
  TypePtr left = P("&{a: +{pa: end}, b: end, c: +{pc: end}}");
  TypePtr right = P("&{c: +{pc: end}, a: +{pa: end}}");
  auto r = do_step(Judgment{left, right, Env{}}, Mode::Semi);
  REQUIRE(r.has_value());
  CHECK(r->rule == Rule::In);
  REQUIRE(r->premises.size() == 2);
  // premises follow the right-hand label order
  CHECK(render(r->premises[0].left) == "+{pc: end}");
  CHECK(render(r->premises[0].right) == "+{pc: end}");
  CHECK(render(r->premises[1].left) == "+{pa: end}");
  CHECK(r->premises[0].env.size() == 0);

  // a right label the left cannot receive makes the rule inapplicable
  CHECK(!do_step(Judgment{left, P("&{d: end}"), Env{}}, Mode::Semi));
  CHECK(!do_step(Judgment{left, P("&{a: end, d: end}"), Env{}}, Mode::Semi));
}

TEST_CASE("outputs match through the right input context") {
  TypePtr left = P("+{a: +{na: end}, b: +{nb: end}}");
  TypePtr right = P("&{r: +{a: +{na: end}, b: +{nb: end}, c: end}}");
  auto r = do_step(Judgment{left, right, Env{}}, Mode::Semi);
  REQUIRE(r.has_value());
  CHECK(r->rule == Rule::Out);
  REQUIRE(r->premises.size() == 2);
  // premises follow the left-hand label order; each right is the context
  // with the matching continuation grafted at every leaf
  CHECK(render(r->premises[0].left) == "+{na: end}");
  CHECK(render(r->premises[0].right) == "&{r: +{na: end}}");
  CHECK(render(r->premises[1].left) == "+{nb: end}");
  CHECK(render(r->premises[1].right) == "&{r: +{nb: end}}");

  // one leaf missing one left label kills the whole rule
  TypePtr narrow = P("&{u: +{a: end, b: end}, v: +{a: end}}");
  CHECK(!do_step(Judgment{left, narrow, Env{}}, Mode::Semi));
}

TEST_CASE("a selection left forces right unfolding up to its depth") {
  TypePtr left = P("+{l: end}");
  TypePtr s1 = P("rec t. &{l: +{l: t}}");
  auto r = do_step(Judgment{left, s1, Env{}}, Mode::Semi);
  REQUIRE(r.has_value());
  CHECK(r->rule == Rule::RecR2);
  REQUIRE(r->premises.size() == 1);
  CHECK(equal(r->premises[0].right, unfold(s1, 1)));
  CHECK(r->premises[0].env.size() == 1);

  TypePtr s2 = P("rec t. &{a: rec s. &{b: +{l: s}}}");
  REQUIRE(depth(s2) == 2);
  auto r2 = do_step(Judgment{left, s2, Env{}}, Mode::Semi);
  REQUIRE(r2.has_value());
  CHECK(r2->rule == Rule::RecR2);
  CHECK(equal(r2->premises[0].right, unfold(s2, 2)));

  // depth zero goes straight to the output rule instead
  auto r3 = do_step(Judgment{left, P("&{b: +{l: end}}"), Env{}}, Mode::Semi);
  REQUIRE(r3.has_value());
  CHECK(r3->rule == Rule::Out);

  // undefined depth means no unfolding can ever help
  CHECK(!do_step(Judgment{left, P("end"), Env{}}, Mode::Semi));
  CHECK(!do_step(Judgment{left, P("rec t. &{l: t}"), Env{}}, Mode::Semi));
}

// ---------------------------------------------------------------------------
// input chains and the two loop-cutting matches
// ---------------------------------------------------------------------------

TEST_CASE("splitting a right-hand side into its single-choice input chain") {
  // the split borrows nodes from its argument, so keep the roots alive
  TypePtr t1 = P("&{a: &{b: +{x: end}}}");
  ChainSplit s1 = split_input_chain(t1);
  REQUIRE(s1.links.size() == 2);
  CHECK(s1.links[0]->choices[0].label == "a");
  CHECK(s1.links[1]->choices[0].label == "b");
  CHECK(s1.tail->kind == TypeKind::Select);

  // a multi-choice branching breaks the chain immediately
  TypePtr t2 = P("&{a: end, b: end}");
  ChainSplit s2 = split_input_chain(t2);
  CHECK(s2.links.empty());
  CHECK(s2.tail->kind == TypeKind::Branch);

  TypePtr t3 = P("&{a: &{b: end, c: end}}");
  ChainSplit s3 = split_input_chain(t3);
  REQUIRE(s3.links.size() == 1);
  CHECK(s3.tail->kind == TypeKind::Branch);

  TypePtr t4 = P("rec t. &{a: t}");
  ChainSplit s4 = split_input_chain(t4);
  CHECK(s4.links.empty());
  CHECK(s4.tail->kind == TypeKind::Rec);
}

TEST_CASE("growing periodic input chains match a remembered shorter one") {
  TypePtr left = P("&{a: end}");  // any left containing an input
  TypePtr z = P("+{x: end}");

  TypePtr stored = make_branch({{"l", z}}, AnnotationId{1});
  TypePtr current =
      make_branch({{"l", make_branch({{"l", z}}, AnnotationId{2})}},
                  AnnotationId{1});

  Env env = Env().extended(left, stored, true);
  const Env::Entry* hit = match_asmp2(Judgment{left, current, env});
  REQUIRE(hit != nullptr);
  CHECK(equal(hit->right, stored));

  SUBCASE("the current head annotation must occur in the stored chain") {
    TypePtr foreign =
        make_branch({{"l", make_branch({{"l", z}}, AnnotationId{1})}},
                    AnnotationId{7});
    CHECK(match_asmp2(Judgment{left, foreign, env}) == nullptr);
  }

  SUBCASE("a selection-rooted right never matches") {
    CHECK(match_asmp2(Judgment{left, z, env}) == nullptr);
  }

  SUBCASE("the current chain must be strictly longer") {
    TypePtr same_len = make_branch({{"l", z}}, AnnotationId{1});
    CHECK(match_asmp2(Judgment{left, same_len, env}) == nullptr);
  }

  SUBCASE("a left without inputs is outside this rule") {
    TypePtr out_only = P("+{q: end}");
    Env env2 = Env().extended(out_only, stored, true);
    CHECK(match_asmp2(Judgment{out_only, current, env2}) == nullptr);
  }

  SUBCASE("the chain tails must agree") {
    TypePtr other_tail =
        make_branch({{"l", make_branch({{"l", P("+{y: end}")}},
                                       AnnotationId{2})}},
                    AnnotationId{1});
    CHECK(match_asmp2(Judgment{left, other_tail, env}) == nullptr);
  }

  SUBCASE("entries without a retained right cannot match") {
    Env bare = Env().extended(left, stored, false);
    CHECK(match_asmp2(Judgment{left, current, bare}) == nullptr);
  }
}

TEST_CASE("chain growth must repeat the stored labels periodically") {
  TypePtr left = P("&{a: end}");
  TypePtr z = P("+{x: end}");
  auto chain = [&](std::vector<Label> labels) {
    TypePtr acc = z;
    AnnotationId id = static_cast<AnnotationId>(labels.size());
    for (auto it = labels.rbegin(); it != labels.rend(); ++it)
      acc = make_branch({{*it, acc}}, id--);
    return acc;
  };

  Env env = Env().extended(left, chain({"a", "b"}), true);
  CHECK(match_asmp2(Judgment{left, chain({"a", "b", "a", "b"}), env}) !=
        nullptr);
  CHECK(match_asmp2(Judgment{left, chain({"a", "b", "b", "a"}), env}) ==
        nullptr);
  // length residues must agree modulo the period
  CHECK(match_asmp2(Judgment{left, chain({"a", "b", "a"}), env}) == nullptr);
}

TEST_CASE("pure-output lefts match a remembered chain prefix") {
  TypePtr left = P("+{x: end}");
  TypePtr z = P("+{z: end}");

  Env env = Env().extended(left, P("&{a: +{z: end}}"), true);
  const Env::Entry* hit =
      match_asmp3(Judgment{left, P("&{a: &{a: +{z: end}}}"), env});
  REQUIRE(hit != nullptr);
  CHECK(equal(hit->right, P("&{a: +{z: end}}")));

  SUBCASE("annotations play no role here") {
    TypePtr current = make_branch(
        {{"a", make_branch({{"a", z}}, AnnotationId{9})}}, AnnotationId{4});
    Env env2 = Env().extended(left, make_branch({{"a", z}}), true);
    CHECK(match_asmp3(Judgment{left, current, env2}) != nullptr);
  }

  SUBCASE("an empty stored chain matches any growth over the same tail") {
    Env env0 = Env().extended(left, P("rec s. &{b: +{a: s}}"), true);
    CHECK(match_asmp3(Judgment{left, P("&{b: rec s. &{b: +{a: s}}}"), env0}) !=
          nullptr);
  }

  SUBCASE("a left containing an input is outside this rule") {
    TypePtr in_left = P("&{a: end}");
    Env env2 = Env().extended(in_left, P("&{a: +{z: end}}"), true);
    CHECK(match_asmp3(Judgment{in_left, P("&{a: &{a: +{z: end}}}"), env2}) ==
          nullptr);
  }

  SUBCASE("a left without any output is outside this rule") {
    // (end, &{a: ...}) is about to get stuck, not to repeat forever; closing
    // it here would declare a subtype that the definition refutes.
    TypePtr done = P("end");
    Env env2 = Env().extended(done, P("rec s. &{a: s}"), true);
    CHECK(match_asmp3(Judgment{done, P("&{a: rec s. &{a: s}}"), env2}) ==
          nullptr);
  }

  SUBCASE("the stored labels must be a prefix of the current ones") {
    Env env2 = Env().extended(left, P("&{a: &{b: +{z: end}}}"), true);
    CHECK(match_asmp3(
              Judgment{left, P("&{a: &{c: &{d: +{z: end}}}}"), env2}) ==
          nullptr);
  }

  SUBCASE("the tails must agree") {
    Env env2 = Env().extended(left, P("&{a: +{z: end}}"), true);
    CHECK(match_asmp3(Judgment{left, P("&{a: &{a: +{w: end}}}"), env2}) ==
          nullptr);
  }

  SUBCASE("the stored chain must be strictly shorter") {
    Env env2 = Env().extended(left, P("&{a: &{a: +{z: end}}}"), true);
    CHECK(match_asmp3(Judgment{left, P("&{a: +{z: end}}"), env2}) == nullptr);
    CHECK(match_asmp3(Judgment{left, P("&{a: &{a: +{z: end}}}"), env2}) ==
          nullptr);
  }

  SUBCASE("an end tail supports no match") {
    Env env2 = Env().extended(left, P("&{a: end}"), true);
    CHECK(match_asmp3(Judgment{left, P("&{a: &{a: end}}"), env2}) == nullptr);
  }

  SUBCASE("entries without a retained right cannot match") {
    Env bare = Env().extended(left, P("&{a: +{z: end}}"), false);
    CHECK(match_asmp3(Judgment{left, P("&{a: &{a: +{z: end}}}"), bare}) ==
          nullptr);
  }
}

TEST_CASE("loop cuts outrank the plain assumption and exist only when total") {
  TypePtr left = P("&{a: end}");
  TypePtr z = P("+{x: end}");
  TypePtr stored = make_branch({{"l", z}}, AnnotationId{1});
  TypePtr current = make_branch(
      {{"l", make_branch({{"l", z}}, AnnotationId{2})}}, AnnotationId{1});

  // both the exact pair and a shorter chain are remembered
  Env env = Env().extended(left, stored, true).extended(left, current, true);
  auto rt = do_step(Judgment{left, current, env}, Mode::Terminating);
  REQUIRE(rt.has_value());
  CHECK(rt->rule == Rule::Asmp2);
  CHECK(rt->premises.empty());

  // the bounded mode knows nothing beyond the plain assumption
  auto rs = do_step(Judgment{left, current, env}, Mode::Semi);
  REQUIRE(rs.has_value());
  CHECK(rs->rule == Rule::Asmp);

  // without the exact pair the bounded mode is stuck where the
  // terminating mode closes
  Env env_short = Env().extended(left, stored, true);
  auto rt2 = do_step(Judgment{left, current, env_short}, Mode::Terminating);
  REQUIRE(rt2.has_value());
  CHECK(rt2->rule == Rule::Asmp2);
  CHECK(!do_step(Judgment{left, current, env_short}, Mode::Semi));
}

// ---------------------------------------------------------------------------
// bounded search
// ---------------------------------------------------------------------------

TEST_CASE("the bounded search settles trivial pairs immediately") {
  CheckOutcome ok = semi_check(P("end"), P("end"));
  CHECK(ok.verdict == Verdict::Subtype);
  CHECK(ok.stats.applications == 1);
  CHECK(ok.stats.frontier == 0);
  CHECK(!ok.failing.has_value());

  CheckOutcome bad = semi_check(P("end"), P("+{l: end}"));
  CHECK(bad.verdict == Verdict::NotSubtype);
  CHECK(bad.stats.applications == 0);
  REQUIRE(bad.failing.has_value());
  CHECK(render(bad.failing->left) == "end");
  CHECK(render(bad.failing->right) == "+{l: end}");

  CHECK(semi_check(P("end"), P("rec s. &{l: s}")).verdict ==
        Verdict::NotSubtype);
}

TEST_CASE("fuel is spent one rule application at a time") {
  for (uint64_t fuel : {1u, 7u, 100u}) {
    CheckOptions opt;
    opt.fuel = fuel;
    CheckOutcome out = semi_check(alt_loop(), double_in_loop(), opt);
    CHECK(out.verdict == Verdict::FuelExhausted);
    CHECK(out.stats.applications == fuel);
    CHECK(out.stats.frontier >= 1);
  }
}

TEST_CASE("the buffering pair exhausts any practical fuel budget") {
  CheckOptions opt;
  opt.fuel = 10000;
  CheckOutcome out = semi_check(alt_loop(), double_in_loop(), opt);
  CHECK(out.verdict == Verdict::FuelExhausted);
  CHECK(out.stats.applications == 10000);
}

TEST_CASE("the reversed buffering pair is refuted in three applications") {
  CheckOptions opt;
  opt.collect_trace = true;
  CheckOutcome out = semi_check(double_in_loop(), alt_loop(), opt);
  CHECK(out.verdict == Verdict::NotSubtype);
  CHECK(out.stats.applications == 3);
  CHECK(out.stats.sigma_max == 2);

  CHECK(trace_rules(out) ==
        std::vector<Rule>{Rule::RecL, Rule::RecR1, Rule::In});
  REQUIRE(out.trace.size() == 3);
  CHECK(format_trace_entry(out.trace[0]) ==
        "RecL | rec t. &{l: &{l: +{l: t}}} | rec t. &{l: +{l: t}} | 0");
  CHECK(out.trace[1].env_size == 1);
  CHECK(out.trace[2].env_size == 2);

  REQUIRE(out.failing.has_value());
  CHECK(render(out.failing->left) ==
        "&{l: +{l: rec t. &{l: &{l: +{l: t}}}}}");
  CHECK(render(out.failing->right) == "+{l: rec t. &{l: +{l: t}}}");
}

TEST_CASE("the vending pair accumulates state faster than fuel") {
  CheckOptions opt;
  opt.fuel = 1000;
  CheckOutcome out = semi_check(vending_left(), vending_right(), opt);
  CHECK(out.verdict == Verdict::FuelExhausted);
  CHECK(out.stats.applications == 1000);
  CHECK(out.stats.sigma_max >= 10);
}

TEST_CASE("unmatched input chains keep the bounded search running forever") {
  CheckOptions opt;
  opt.fuel = 200;
  CheckOutcome out = semi_check(out_loop(), guarded_out_loop(), opt);
  CHECK(out.verdict == Verdict::FuelExhausted);
  CHECK(out.stats.applications == 200);
}

TEST_CASE("trace collection respects its cap") {
  CheckOptions opt;
  opt.fuel = 50;
  opt.collect_trace = true;
  opt.trace_limit = 10;
  CheckOutcome out = semi_check(alt_loop(), double_in_loop(), opt);
  CHECK(out.trace.size() == 10);
}

TEST_CASE("repeated runs produce identical traces") {
  CheckOptions opt;
  opt.fuel = 300;
  opt.collect_trace = true;
  CheckOutcome a = semi_check(alt_loop(), double_in_loop(), opt);
  CheckOutcome b = semi_check(alt_loop(), double_in_loop(), opt);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i)
    CHECK(format_trace_entry(a.trace[i]) == format_trace_entry(b.trace[i]));
}

// ---------------------------------------------------------------------------
// the terminating check and its precondition
// ---------------------------------------------------------------------------

TEST_CASE("the precondition names the side that breaks it") {
  CHECK(fragment_violation(alt_loop(), double_in_loop()) == std::nullopt);
  CHECK(fragment_violation(P("end"), P("end")) == std::nullopt);
  CHECK(fragment_violation(out_loop(), guarded_out_loop()) == std::nullopt);

  CHECK(fragment_violation(P("+{a: end, b: end}"), P("end")) ==
        "left type is not single-output");
  CHECK(fragment_violation(P("&{l1: end, l2: end}"),
                           P("&{l1: end, l2: end}")) ==
        "right type is not single-input");
  CHECK(fragment_violation(vending_left(), vending_right()) ==
        "right type is not single-input");
  CHECK(fragment_violation(P("&{x: end, y: end}"), P("+{a: end, b: end}")) ==
        "left type is not single-input and right type is not single-output "
        "(one of the two is required)");
}

TEST_CASE("the terminating check rejects pairs outside its fragment") {
  CHECK_THROWS_AS(decide(P("&{l1: end, l2: end}"), P("&{l1: end, l2: end}")),
                  FragmentError);
  CHECK_THROWS_AS(decide(vending_left(), vending_right()), FragmentError);
  CHECK_THROWS_WITH(decide(P("+{a: end, b: end}"), P("end")),
                    "left type is not single-output");
}

TEST_CASE("the buffering pair is settled positively in thirteen steps") {
  DecideOptions opt;
  opt.collect_trace = true;
  CheckOutcome out = decide(alt_loop(), double_in_loop(), opt);
  CHECK(out.verdict == Verdict::Subtype);
  CHECK(out.stats.applications == 13);
  CHECK(out.stats.sigma_max == 6);
  CHECK(out.stats.frontier == 0);
  CHECK(trace_rules(out) ==
        std::vector<Rule>{Rule::RecL, Rule::RecR1, Rule::In, Rule::Out,
                          Rule::RecL, Rule::In, Rule::RecR2, Rule::Out,
                          Rule::RecL, Rule::In, Rule::RecR2, Rule::Out,
                          Rule::Asmp2});
}

TEST_CASE("the reversed buffering pair is refuted by the terminating check") {
  CheckOutcome out = decide(double_in_loop(), alt_loop());
  CHECK(out.verdict == Verdict::NotSubtype);
  CHECK(out.stats.applications == 3);
}

TEST_CASE("anticipated outputs close through the prefix cut") {
  DecideOptions opt;
  opt.collect_trace = true;
  CheckOutcome out = decide(out_loop(), guarded_out_loop(), opt);
  CHECK(out.verdict == Verdict::Subtype);
  CHECK(out.stats.applications == 4);
  CHECK(out.stats.sigma_max == 2);
  CHECK(trace_rules(out) == std::vector<Rule>{Rule::RecL, Rule::RecR2,
                                              Rule::Out, Rule::Asmp3});
}

TEST_CASE("a finished left never closes against a growing input loop") {
  // The chain-prefix cut must not fire for a left with no outputs: after
  // the single unfolding the pair is stuck, which is a refutation.
  DecideOptions opt;
  opt.collect_trace = true;
  CheckOutcome out = decide(P("end"), P("rec s. &{a: s}"), opt);
  CHECK(out.verdict == Verdict::NotSubtype);
  CHECK(out.stats.applications == 1);
  CHECK(trace_rules(out) == std::vector<Rule>{Rule::RecR1});
  CHECK(semi_check(P("end"), P("rec s. &{a: s}")).verdict ==
        Verdict::NotSubtype);
}

TEST_CASE("the step ceiling turns a long run into an explicit exhaustion") {
  DecideOptions opt;
  opt.step_ceiling = 2;
  CheckOutcome out = decide(alt_loop(), double_in_loop(), opt);
  CHECK(out.verdict == Verdict::FuelExhausted);
  CHECK(out.stats.applications == 2);
}

TEST_CASE("rule names and verdict names render as expected") {
  CHECK(rule_name(Rule::Asmp) == "Asmp");
  CHECK(rule_name(Rule::Asmp2) == "Asmp2");
  CHECK(rule_name(Rule::Asmp3) == "Asmp3");
  CHECK(rule_name(Rule::End) == "End");
  CHECK(rule_name(Rule::Out) == "Out");
  CHECK(rule_name(Rule::In) == "In");
  CHECK(rule_name(Rule::RecL) == "RecL");
  CHECK(rule_name(Rule::RecR1) == "RecR1");
  CHECK(rule_name(Rule::RecR2) == "RecR2");
  CHECK(verdict_name(Verdict::Subtype) == "subtype");
  CHECK(verdict_name(Verdict::NotSubtype) == "not-subtype");
  CHECK(verdict_name(Verdict::FuelExhausted) == "fuel-exhausted");
  CHECK(oracle_verdict_name(OracleVerdict::Inconclusive) == "inconclusive");
}

// ---------------------------------------------------------------------------
// the independent oracle
// ---------------------------------------------------------------------------

TEST_CASE("the oracle settles small pairs and knows its own limits") {
  OracleOutcome ok = oracle_check(P("end"), P("end"));
  CHECK(ok.verdict == OracleVerdict::Subtype);
  CHECK(ok.pairs_visited == 1);

  CHECK(oracle_check(P("end"), P("+{l: end}")).verdict ==
        OracleVerdict::NotSubtype);
  CHECK(oracle_check(P("+{l: end}"), P("end")).verdict ==
        OracleVerdict::NotSubtype);
  CHECK(oracle_check(double_in_loop(), alt_loop()).verdict ==
        OracleVerdict::NotSubtype);

  // positive instances with unbounded accumulation stay open
  OracleOutcome open = oracle_check(alt_loop(), double_in_loop(), 500);
  CHECK(open.verdict == OracleVerdict::Inconclusive);
  CHECK(open.pairs_visited >= 500);
  CHECK(oracle_check(vending_left(), vending_right(), 2000).verdict ==
        OracleVerdict::Inconclusive);
  CHECK(oracle_check(out_loop(), guarded_out_loop(), 500).verdict ==
        OracleVerdict::Inconclusive);
}

// ---------------------------------------------------------------------------
// cross-checking properties
// ---------------------------------------------------------------------------

TEST_CASE("every engine accepts a type against itself") {
  std::mt19937_64 rng(9301);
  testing::GenOptions opt;
  opt.single_output = true;
  opt.single_input = true;
  for (int i = 0; i < 100; ++i) {
    TypePtr t = testing::gen_type(rng, opt);
    CAPTURE(render(t));
    CheckOutcome dec = decide(t, t);
    CHECK(dec.verdict == Verdict::Subtype);

    CheckOptions sopt;
    sopt.fuel = 3000;
    CHECK(semi_check(t, t, sopt).verdict != Verdict::NotSubtype);
    CHECK(oracle_check(t, t, 800).verdict != OracleVerdict::NotSubtype);
  }
}

TEST_CASE("the three engines never contradict each other") {
  std::mt19937_64 rng(9302);
  testing::GenOptions opt;
  opt.single_output = true;
  opt.single_input = true;
  int decided_not = 0, decided_yes = 0;
  for (int i = 0; i < 150; ++i) {
    TypePtr t = testing::gen_type(rng, opt);
    TypePtr s = testing::gen_type(rng, opt);
    CAPTURE(render(t));
    CAPTURE(render(s));

    DecideOptions dopt;
    dopt.step_ceiling = 1000000;
    CheckOutcome dec = decide(t, s, dopt);
    REQUIRE(dec.verdict != Verdict::FuelExhausted);
    (dec.verdict == Verdict::Subtype ? decided_yes : decided_not)++;

    CheckOptions sopt;
    sopt.fuel = 5000;
    CheckOutcome semi = semi_check(t, s, sopt);
    if (semi.verdict != Verdict::FuelExhausted)
      CHECK(semi.verdict == dec.verdict);

    OracleOutcome orc = oracle_check(t, s, 1000);
    if (orc.verdict == OracleVerdict::Subtype)
      CHECK(dec.verdict == Verdict::Subtype);
    if (orc.verdict == OracleVerdict::NotSubtype)
      CHECK(dec.verdict == Verdict::NotSubtype);
  }
  // the corpus must exercise both outcomes to mean anything
  CHECK(decided_not > 10);
  CHECK(decided_yes > 10);
}

TEST_CASE("environments grow exactly at the unfolding rules") {
  std::mt19937_64 rng(9303);
  testing::GenOptions frag;
  frag.single_output = true;
  frag.single_input = true;

  auto premise_count_ok = [](const StepResult& r) {
    switch (r.rule) {
      case Rule::Asmp:
      case Rule::Asmp2:
      case Rule::Asmp3:
      case Rule::End:
        return r.premises.empty();
      case Rule::RecL:
      case Rule::RecR1:
      case Rule::RecR2:
        return r.premises.size() == 1;
      case Rule::In:
      case Rule::Out:
        return !r.premises.empty();
    }
    return false;
  };

  for (int round = 0; round < 2; ++round) {
    bool terminating = round == 0;
    testing::GenOptions opt = terminating ? frag : testing::GenOptions{};
    for (int i = 0; i < 80; ++i) {
      TypePtr t = testing::gen_type(rng, opt);
      AnnotationCounter ac;
      TypePtr s = testing::gen_type(rng, opt);
      Judgment j{t, terminating ? decorate(s, ac) : s, Env{}};
      Mode mode = terminating ? Mode::Terminating : Mode::Semi;
      for (int steps = 0; steps < 60; ++steps) {
        auto r = step(j, mode, ac);
        if (!r) break;
        CHECK(premise_count_ok(*r));
        bool grows = r->rule == Rule::RecL || r->rule == Rule::RecR1 ||
                     r->rule == Rule::RecR2;
        for (const Judgment& p : r->premises)
          CHECK(p.env.size() == j.env.size() + (grows ? 1 : 0));
        if (r->premises.empty()) break;
        size_t pick = std::uniform_int_distribution<size_t>(
            0, r->premises.size() - 1)(rng);
        j = r->premises[pick];
      }
    }
  }
}
