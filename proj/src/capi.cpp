#include "sesub/sesub.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "sesub/cfsm.hpp"
#include "sesub/queue_machine.hpp"
#include "sesub/subtyping.hpp"
#include "sesub/syntax.hpp"
#include "sesub/type.hpp"

struct sesub_type {
  sesub::TypePtr value;
};

struct sesub_qm {
  sesub::QueueMachine value;
};

struct sesub_cfsm {
  sesub::Cfsm value;
};

namespace {

thread_local std::string g_last_error;

sesub_status fail(sesub_status code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

// Runs the body and translates exceptions into status codes. The body only
// writes to its out-parameters on the success path, so a failing call
// leaves caller state untouched.
template <class F>
sesub_status guarded(F&& body) {
  try {
    return body();
  } catch (const sesub::ParseError& e) {
    return fail(SESUB_ERR_PARSE, e.what());
  } catch (const sesub::QueueMachineError& e) {
    return fail(SESUB_ERR_PARSE, e.what());
  } catch (const sesub::FragmentError& e) {
    return fail(SESUB_ERR_FRAGMENT, e.what());
  } catch (const sesub::StateExplosionError& e) {
    return fail(SESUB_ERR_LIMIT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SESUB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SESUB_ERR_INTERNAL, e.what());
  }
}

sesub_status require(bool ok, const char* what) {
  return ok ? SESUB_OK : fail(SESUB_ERR_INVALID, what);
}

char* dup_string(std::string_view s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size());
  p[s.size()] = '\0';
  return p;
}

std::optional<std::string> read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return std::move(buf).str();
}

sesub_verdict to_c(sesub::Verdict v) {
  switch (v) {
    case sesub::Verdict::Subtype:
      return SESUB_SUBTYPE;
    case sesub::Verdict::NotSubtype:
      return SESUB_NOT_SUBTYPE;
    default:
      return SESUB_FUEL_EXHAUSTED;
  }
}

void replay_trace(const sesub::CheckOutcome& outcome,
                  const sesub_check_options& opt) {
  if (!opt.trace) return;
  for (const auto& entry : outcome.trace)
    opt.trace(sesub::format_trace_entry(entry).c_str(), opt.user);
}

}  // namespace

extern "C" {

const char* sesub_last_error(void) { return g_last_error.c_str(); }

void sesub_string_free(char* s) { std::free(s); }

const char* sesub_version(void) { return "0.1.0"; }

sesub_status sesub_type_parse(const char* text, sesub_type** out) {
  if (auto s = require(text && out, "sesub_type_parse: null argument"))
    return s;
  return guarded([&] {
    auto value = sesub::parse(text);
    *out = new sesub_type{std::move(value)};
    return SESUB_OK;
  });
}

sesub_status sesub_type_load(const char* path, sesub_type** out) {
  if (auto s = require(path && out, "sesub_type_load: null argument"))
    return s;
  auto text = read_file(path);
  if (!text)
    return fail(SESUB_ERR_IO, std::string("cannot read ") + path);
  return guarded([&] {
    auto value = sesub::parse(*text);
    *out = new sesub_type{std::move(value)};
    return SESUB_OK;
  });
}

void sesub_type_free(sesub_type* t) { delete t; }

sesub_status sesub_type_render(const sesub_type* t, char** out) {
  if (auto s = require(t && out, "sesub_type_render: null argument"))
    return s;
  return guarded([&] {
    *out = dup_string(sesub::render(t->value));
    return SESUB_OK;
  });
}

sesub_status sesub_type_classify(const sesub_type* t, uint32_t* out_bits) {
  if (auto s = require(t && out_bits, "sesub_type_classify: null argument"))
    return s;
  return guarded([&] {
    uint32_t bits = 0;
    if (sesub::is_single_output(t->value)) bits |= SESUB_CLASS_SINGLE_OUTPUT;
    if (sesub::is_single_input(t->value)) bits |= SESUB_CLASS_SINGLE_INPUT;
    if (sesub::is_input_guarded(t->value)) bits |= SESUB_CLASS_INPUT_GUARDED;
    *out_bits = bits;
    return SESUB_OK;
  });
}

sesub_status sesub_check(const sesub_type* sub, const sesub_type* sup,
                         const sesub_check_options* opt,
                         sesub_check_result* out) {
  if (auto s = require(sub && sup && out, "sesub_check: null argument"))
    return s;
  sesub_check_options local{};
  if (opt) local = *opt;
  return guarded([&] {
    sesub_check_result r{};
    switch (local.algo) {
      case SESUB_ALGO_SEMI: {
        sesub::CheckOptions o;
        if (local.fuel) o.fuel = local.fuel;
        o.collect_trace = local.trace != nullptr;
        if (local.trace_limit) o.trace_limit = local.trace_limit;
        auto outcome = sesub::semi_check(sub->value, sup->value, o);
        replay_trace(outcome, local);
        r.verdict = to_c(outcome.verdict);
        r.rule_applications = outcome.stats.applications;
        r.sigma_max = outcome.stats.sigma_max;
        r.pairs = outcome.stats.distinct_pairs;
        break;
      }
      case SESUB_ALGO_DECIDE: {
        sesub::DecideOptions o;
        o.step_ceiling = local.fuel;
        o.collect_trace = local.trace != nullptr;
        if (local.trace_limit) o.trace_limit = local.trace_limit;
        auto outcome = sesub::decide(sub->value, sup->value, o);
        replay_trace(outcome, local);
        r.verdict = to_c(outcome.verdict);
        r.rule_applications = outcome.stats.applications;
        r.sigma_max = outcome.stats.sigma_max;
        r.pairs = outcome.stats.distinct_pairs;
        break;
      }
      case SESUB_ALGO_ORACLE: {
        uint64_t bound = local.fuel ? local.fuel : 10000;
        auto outcome = sesub::oracle_check(sub->value, sup->value, bound);
        switch (outcome.verdict) {
          case sesub::OracleVerdict::Subtype:
            r.verdict = SESUB_SUBTYPE;
            break;
          case sesub::OracleVerdict::NotSubtype:
            r.verdict = SESUB_NOT_SUBTYPE;
            break;
          default:
            r.verdict = SESUB_INCONCLUSIVE;
            break;
        }
        r.pairs = outcome.pairs_visited;
        break;
      }
      default:
        return fail(SESUB_ERR_INVALID, "sesub_check: unknown algorithm");
    }
    *out = r;
    return SESUB_OK;
  });
}

const char* sesub_verdict_name(sesub_verdict v) {
  switch (v) {
    case SESUB_SUBTYPE:
      return "subtype";
    case SESUB_NOT_SUBTYPE:
      return "not-subtype";
    case SESUB_FUEL_EXHAUSTED:
      return "fuel-exhausted";
    case SESUB_INCONCLUSIVE:
      return "inconclusive";
    default:
      return "unknown";
  }
}

sesub_status sesub_fragment_check(const sesub_type* sub, const sesub_type* sup,
                                  int* out_ok, char** out_reason) {
  if (auto s =
          require(sub && sup && out_ok, "sesub_fragment_check: null argument"))
    return s;
  return guarded([&] {
    auto why = sesub::fragment_violation(sub->value, sup->value);
    *out_ok = why ? 0 : 1;
    if (out_reason) *out_reason = why ? dup_string(*why) : nullptr;
    return SESUB_OK;
  });
}

sesub_status sesub_qm_parse(const char* text, sesub_qm** out) {
  if (auto s = require(text && out, "sesub_qm_parse: null argument")) return s;
  return guarded([&] {
    auto value = sesub::parse_queue_machine(text);
    *out = new sesub_qm{std::move(value)};
    return SESUB_OK;
  });
}

sesub_status sesub_qm_load(const char* path, sesub_qm** out) {
  if (auto s = require(path && out, "sesub_qm_load: null argument")) return s;
  auto text = read_file(path);
  if (!text)
    return fail(SESUB_ERR_IO, std::string("cannot read ") + path);
  return guarded([&] {
    auto value = sesub::parse_queue_machine(*text);
    *out = new sesub_qm{std::move(value)};
    return SESUB_OK;
  });
}

void sesub_qm_free(sesub_qm* m) { delete m; }

sesub_status sesub_qm_anbn(sesub_qm** out) {
  if (auto s = require(out != nullptr, "sesub_qm_anbn: null argument"))
    return s;
  return guarded([&] {
    *out = new sesub_qm{sesub::anbn_machine()};
    return SESUB_OK;
  });
}

sesub_status sesub_qm_run(const sesub_qm* m, const char* input,
                          uint64_t max_steps,
                          void (*config)(const char* line, void* user),
                          void* user, sesub_run_result* out, char** last) {
  if (auto s = require(m && input && out, "sesub_qm_run: null argument"))
    return s;
  return guarded([&] {
    auto word = sesub::parse_word(m->value.input_alphabet, input);
    sesub_run_result r{};
    sesub::Configuration final_config;
    if (config) {
      auto trace = sesub::run_trace(m->value, word, max_steps);
      for (const auto& c : trace)
        config(sesub::format_configuration(c).c_str(), user);
      final_config = trace.back();
      r.steps = trace.size() - 1;
    } else {
      auto outcome = sesub::run(m->value, word, max_steps);
      final_config = outcome.last;
      r.steps = outcome.steps;
    }
    r.accepted = final_config.queue.empty() ? 1 : 0;
    if (last) *last = dup_string(sesub::format_configuration(final_config));
    *out = r;
    return SESUB_OK;
  });
}

sesub_status sesub_qm_encode_queue(const sesub_qm* m, const char* content,
                                   sesub_type** out) {
  if (auto s =
          require(m && content && out, "sesub_qm_encode_queue: null argument"))
    return s;
  return guarded([&] {
    auto word = sesub::parse_word(m->value.queue_alphabet, content);
    *out = new sesub_type{sesub::encode_queue(m->value, word)};
    return SESUB_OK;
  });
}

sesub_status sesub_qm_encode_control(const sesub_qm* m, sesub_type** out) {
  if (auto s = require(m && out, "sesub_qm_encode_control: null argument"))
    return s;
  return guarded([&] {
    *out = new sesub_type{sesub::encode_control(m->value)};
    return SESUB_OK;
  });
}

sesub_status sesub_qm_reduction(const sesub_qm* m, const char* input,
                                sesub_type** out_sub, sesub_type** out_sup) {
  if (auto s = require(m && input && out_sub && out_sup,
                       "sesub_qm_reduction: null argument"))
    return s;
  return guarded([&] {
    auto word = sesub::parse_word(m->value.input_alphabet, input);
    auto [sub, sup] = sesub::reduction(m->value, word);
    *out_sub = new sesub_type{std::move(sub)};
    *out_sup = new sesub_type{std::move(sup)};
    return SESUB_OK;
  });
}

sesub_status sesub_cfsm_build(const sesub_type* t, size_t max_states,
                              sesub_cfsm** out) {
  if (auto s = require(t && out, "sesub_cfsm_build: null argument")) return s;
  return guarded([&] {
    auto value = max_states ? sesub::build_cfsm(t->value, max_states)
                            : sesub::build_cfsm(t->value);
    *out = new sesub_cfsm{std::move(value)};
    return SESUB_OK;
  });
}

void sesub_cfsm_free(sesub_cfsm* g) { delete g; }

sesub_status sesub_cfsm_state_count(const sesub_cfsm* g, size_t* out) {
  if (auto s = require(g && out, "sesub_cfsm_state_count: null argument"))
    return s;
  *out = g->value.states.size();
  return SESUB_OK;
}

sesub_status sesub_cfsm_transition_count(const sesub_cfsm* g, size_t* out) {
  if (auto s = require(g && out, "sesub_cfsm_transition_count: null argument"))
    return s;
  *out = g->value.transitions.size();
  return SESUB_OK;
}

sesub_status sesub_cfsm_to_dot(const sesub_cfsm* g, char** out) {
  if (auto s = require(g && out, "sesub_cfsm_to_dot: null argument")) return s;
  return guarded([&] {
    *out = dup_string(sesub::to_dot(g->value));
    return SESUB_OK;
  });
}

}  // extern "C"
