#include "qml/modelfind.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace qml {

std::string to_string(const Bounds& b) {
  return "worlds<=" + std::to_string(b.max_worlds) + " individuals<=" + std::to_string(b.max_individuals) +
         " relspace<=" + std::to_string(b.relspace_cap) + " nesting<=" + std::to_string(b.quantifier_nesting);
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > ~std::uint64_t{0} / a) return ~std::uint64_t{0};
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > ~std::uint64_t{0} - b ? ~std::uint64_t{0} : a + b; }

int nesting(const Formula& f);

int nesting(const Term& t) {
  if (!t->body) return 0;
  return nesting(t->body);
}

int nesting(const Formula& f) {
  int inner = 0;
  for (const auto& s : f->subs) inner = std::max(inner, nesting(s));
  for (const auto& t : f->terms) inner = std::max(inner, nesting(t));
  const bool rel = (f->kind == FormulaKind::ForAll || f->kind == FormulaKind::Exists) &&
                   f->binder_sort.is_relation() && f->binder_sort.arity() >= 1;
  return inner + (rel ? 1 : 0);
}

bool uses_relspace(const Formula& f);

bool uses_relspace(const Term& t) { return t->body && uses_relspace(t->body); }

bool uses_relspace(const Formula& f) {
  if (f->kind == FormulaKind::SecondOrder) return true;
  if ((f->kind == FormulaKind::ForAll || f->kind == FormulaKind::Exists) && f->binder_sort.is_relation() &&
      f->binder_sort.arity() >= 1)
    return true;
  for (const auto& s : f->subs)
    if (uses_relspace(s)) return true;
  for (const auto& t : f->terms)
    if (uses_relspace(t)) return true;
  return false;
}

struct Slot {
  bool access = false;
  int w = 0, v = 0;       // access
  int table = 0, index = 0;  // entry
  int values = 2;
};

std::vector<Slot> slots_of(const KripkeInterpretation& m) {
  std::vector<Slot> out;
  const Logic logic = m.sig->logic;
  if (logic != Logic::S5Total)
    for (int w = 0; w < m.worlds; ++w)
      for (int v = logic == Logic::KB ? w : 0; v < m.worlds; ++v) out.push_back(Slot{true, w, v, 0, 0, 2});
  for (std::size_t c = 0; c < m.sig->constants.size(); ++c) {
    const int values = m.sig->constants[c].kind == ConstKind::Individual ? m.individuals : 2;
    for (std::size_t i = 0; i < m.table[c].size(); ++i)
      out.push_back(Slot{false, 0, 0, static_cast<int>(c), static_cast<int>(i), values});
  }
  return out;
}

void assign(KripkeInterpretation& m, const Slot& s, int value) {
  if (s.access) {
    m.set_access(s.w, s.v, value != 0);
    if (m.sig->logic == Logic::KB) m.set_access(s.v, s.w, value != 0);
  } else {
    m.table[static_cast<std::size_t>(s.table)][static_cast<std::size_t>(s.index)] = static_cast<std::int8_t>(value);
  }
}

void unassign(KripkeInterpretation& m, const Slot& s) {
  if (s.access)
    assign(m, s, 0);
  else
    m.table[static_cast<std::size_t>(s.table)][static_cast<std::size_t>(s.index)] = -1;
}

KripkeInterpretation blank_checked(const std::shared_ptr<const Signature>& sig, int worlds, int individuals,
                                   std::size_t cap, bool formulas_need_relspace) {
  KripkeInterpretation m = KripkeInterpretation::blank(sig, worlds, individuals, cap);
  bool second_order = false;
  for (const auto& c : sig->constants) second_order = second_order || c.kind == ConstKind::SecondOrder;
  if ((second_order || formulas_need_relspace) && !m.relspace_available)
    throw BudgetError("relation space at |W| = " + std::to_string(worlds) + ", |D| = " + std::to_string(individuals) +
                      " exceeds the cap of " + std::to_string(cap));
  if (sig->logic != Logic::S5Total)
    for (auto& s : m.succ) s = 0;
  return m;
}

void check_signature(const Signature& sig) {
  if (sig.mode != Mode::Classical) throw ModeError("model search needs a classical signature");
}

enum class Goal { Model, Countermodel, All };

// Depth-first search over one (|W|, |D|) size with Kleene pruning.
class SizeSearch {
 public:
  SizeSearch(std::shared_ptr<const Signature> sig, int worlds, int individuals, const Bounds& b,
             const std::vector<Formula>& premises, const Formula* conjecture, Goal goal, bool need_relspace)
      : premises_(premises), conjecture_(conjecture), goal_(goal) {
    proto_ = blank_checked(sig, worlds, individuals, b.relspace_cap, need_relspace);
    slots_ = slots_of(proto_);
    first_eval_ = 0;
    while (first_eval_ < slots_.size() && slots_[first_eval_].access) ++first_eval_;
    suffix_.assign(slots_.size() + 1, 1);
    for (std::size_t i = slots_.size(); i-- > 0;)
      suffix_[i] = sat_mul(suffix_[i + 1], static_cast<std::uint64_t>(slots_[i].values));
  }

  std::uint64_t total() const { return suffix_[0]; }

  // Number of leading slots used to split work, aiming for a few jobs per
  // worker. Results never depend on this choice.
  std::size_t prefix_length(int workers) const {
    if (workers <= 1) return 0;
    std::size_t k = 0;
    std::uint64_t jobs = 1;
    while (k < slots_.size() && jobs < static_cast<std::uint64_t>(workers) * 8) jobs *= slots_[k++].values;
    return k;
  }

  std::uint64_t prefix_count(std::size_t k) const {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < k; ++i) n *= static_cast<std::uint64_t>(slots_[i].values);
    return n;
  }

  struct JobResult {
    std::optional<KripkeInterpretation> model;
    std::uint64_t examined = 0;  // interpretations ruled out before the witness
  };

  JobResult run_prefix(std::size_t k, std::uint64_t prefix,
                       const std::function<bool(const KripkeInterpretation&)>* visit = nullptr) {
    KripkeInterpretation m = proto_;
    std::uint64_t rest = prefix;
    for (std::size_t i = k; i-- > 0;) {
      assign(m, slots_[i], static_cast<int>(rest % static_cast<std::uint64_t>(slots_[i].values)));
      rest /= static_cast<std::uint64_t>(slots_[i].values);
    }
    Evaluator ev(m);
    JobResult out;
    std::vector<char> satisfied(premises_.size(), 0);
    dfs(m, ev, k, satisfied, out, visit);
    return out;
  }

 private:
  const std::vector<Formula>& premises_;
  const Formula* conjecture_;
  Goal goal_;
  KripkeInterpretation proto_;
  std::vector<Slot> slots_;
  std::size_t first_eval_ = 0;
  std::vector<std::uint64_t> suffix_;

  // Returns false when this partial interpretation cannot be extended to a
  // witness.
  bool viable(KripkeInterpretation& m, Evaluator& ev, std::vector<char>& satisfied) {
    ev.reset();
    const WorldMask all = m.all_worlds();
    for (std::size_t i = 0; i < premises_.size(); ++i) {
      if (satisfied[i]) continue;
      const Truth t = ev.eval(premises_[i]);
      if (t.f != 0) return false;
      if (t.t == all) satisfied[i] = 1;
    }
    if (conjecture_) {
      const Truth t = ev.eval(*conjecture_);
      if (t.t == all) return false;
    }
    return true;
  }

  // Returns true when the search should stop.
  bool dfs(KripkeInterpretation& m, Evaluator& ev, std::size_t depth, std::vector<char> satisfied, JobResult& out,
           const std::function<bool(const KripkeInterpretation&)>* visit) {
    if (depth >= first_eval_ && !viable(m, ev, satisfied)) {
      out.examined = sat_add(out.examined, suffix_[depth]);
      return false;
    }
    if (depth == slots_.size()) {
      if (goal_ == Goal::All) {
        out.examined = sat_add(out.examined, 1);
        return visit && !(*visit)(m);
      }
      out.model = m;
      return true;
    }
    const Slot& s = slots_[depth];
    for (int v = 0; v < s.values; ++v) {
      assign(m, s, v);
      const bool done = dfs(m, ev, depth + 1, satisfied, out, visit);
      if (done) return true;
    }
    unassign(m, s);
    return false;
  }
};

struct Found {
  std::optional<KripkeInterpretation> model;
  std::uint64_t examined = 0;
};

Found search(const std::vector<Formula>& premises, const Formula* conjecture, std::shared_ptr<const Signature> sig,
             const Bounds& b, SearchOptions opt, int only_worlds = 0, int only_individuals = 0) {
  check_signature(*sig);
  bool need = conjecture && uses_relspace(expand_derived(*conjecture));
  for (const auto& p : premises) {
    const Formula e = expand_derived(p);
    need = need || uses_relspace(e);
    if (nesting(e) > b.quantifier_nesting)
      throw BudgetError("relation quantifier nesting " + std::to_string(nesting(e)) + " exceeds the budget of " +
                        std::to_string(b.quantifier_nesting));
  }
  if (conjecture && nesting(expand_derived(*conjecture)) > b.quantifier_nesting)
    throw BudgetError("conjecture exceeds the relation quantifier nesting budget");

  for (int w = 1; w <= b.max_worlds; ++w)
    for (int d = 1; d <= b.max_individuals; ++d) blank_checked(sig, w, d, b.relspace_cap, need);

  Found found;
  const Goal goal = conjecture ? Goal::Countermodel : Goal::Model;
  for (int w = 1; w <= b.max_worlds; ++w) {
    if (only_worlds && w != only_worlds) continue;
    for (int d = 1; d <= b.max_individuals; ++d) {
      if (only_individuals && d != only_individuals) continue;
      SizeSearch s(sig, w, d, b, premises, conjecture, goal, need);
      const std::size_t k = s.prefix_length(opt.workers);
      const std::uint64_t jobs = s.prefix_count(k);
      std::vector<SizeSearch::JobResult> results(jobs);
      std::vector<std::exception_ptr> errors(jobs);
      std::vector<char> ran(jobs, 0);
      std::atomic<std::uint64_t> next{0};
      std::atomic<std::uint64_t> best{jobs};
      auto worker = [&] {
        for (;;) {
          const std::uint64_t j = next.fetch_add(1);
          if (j >= jobs || j > best.load()) return;
          try {
            results[j] = s.run_prefix(k, j);
            ran[j] = 1;
            if (results[j].model) {
              std::uint64_t cur = best.load();
              while (j < cur && !best.compare_exchange_weak(cur, j)) {
              }
            }
          } catch (...) {
            errors[j] = std::current_exception();
            ran[j] = 1;
            std::uint64_t cur = best.load();
            while (j < cur && !best.compare_exchange_weak(cur, j)) {
            }
          }
        }
      };
      const int n = std::max(1, std::min<int>(opt.workers, static_cast<int>(jobs)));
      std::vector<std::thread> pool;
      for (int t = 1; t < n; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();
      for (std::uint64_t j = 0; j < jobs; ++j) {
        if (errors[j]) std::rethrow_exception(errors[j]);
        found.examined = sat_add(found.examined, results[j].examined);
        if (results[j].model) {
          found.model = std::move(results[j].model);
          return found;
        }
      }
    }
  }
  return found;
}

}  // namespace

int relation_quantifier_nesting(const Formula& f) { return nesting(expand_derived(f)); }

std::uint64_t count_interpretations(const Signature& sig, int worlds, int individuals, std::size_t cap) {
  auto shared = std::make_shared<const Signature>(sig);
  const KripkeInterpretation m = KripkeInterpretation::blank(shared, worlds, individuals, cap);
  std::uint64_t n = 1;
  auto pow2 = [](std::uint64_t e) { return e >= 64 ? ~std::uint64_t{0} : std::uint64_t{1} << e; };
  if (sig.logic == Logic::K) n = pow2(static_cast<std::uint64_t>(worlds * worlds));
  if (sig.logic == Logic::KB) n = pow2(static_cast<std::uint64_t>(worlds * (worlds + 1) / 2));
  for (const auto& c : sig.constants) {
    switch (c.kind) {
      case ConstKind::Relation:
        n = sat_mul(n, pow2(static_cast<std::uint64_t>(m.tuples(c.arity) * worlds)));
        break;
      case ConstKind::SecondOrder:
        n = sat_mul(n, pow2(static_cast<std::uint64_t>(worlds) * m.relspace.size()));
        break;
      case ConstKind::Individual:
        n = sat_mul(n, static_cast<std::uint64_t>(individuals));
        break;
    }
  }
  return n;
}

std::uint64_t count_interpretations(const Signature& sig, const Bounds& b) {
  std::uint64_t n = 0;
  for (int w = 1; w <= b.max_worlds; ++w)
    for (int d = 1; d <= b.max_individuals; ++d) n = sat_add(n, count_interpretations(sig, w, d, b.relspace_cap));
  return n;
}

void enumerate(std::shared_ptr<const Signature> sig, const Bounds& b,
               const std::function<bool(const KripkeInterpretation&)>& visit) {
  check_signature(*sig);
  for (int w = 1; w <= b.max_worlds; ++w)
    for (int d = 1; d <= b.max_individuals; ++d) blank_checked(sig, w, d, b.relspace_cap, false);
  for (int w = 1; w <= b.max_worlds; ++w)
    for (int d = 1; d <= b.max_individuals; ++d) {
      KripkeInterpretation m = blank_checked(sig, w, d, b.relspace_cap, false);
      const std::vector<Slot> slots = slots_of(m);
      std::function<bool(std::size_t)> rec = [&](std::size_t i) {
        if (i == slots.size()) return visit(m);
        for (int v = 0; v < slots[i].values; ++v) {
          assign(m, slots[i], v);
          if (!rec(i + 1)) return false;
        }
        return true;
      };
      if (!rec(0)) return;
    }
}

SatResult decide_sat(const std::vector<Formula>& premises, std::shared_ptr<const Signature> sig, const Bounds& b,
                     SearchOptions opt) {
  Found f = search(premises, nullptr, std::move(sig), b, opt);
  SatResult r;
  r.model = std::move(f.model);
  r.bounds = b;
  r.examined = f.examined;
  return r;
}

std::optional<KripkeInterpretation> find_countermodel(const std::vector<Formula>& premises, const Formula& conjecture,
                                                      std::shared_ptr<const Signature> sig, const Bounds& b,
                                                      SearchOptions opt) {
  return search(premises, &conjecture, std::move(sig), b, opt).model;
}

std::optional<KripkeInterpretation> first_model_at(const std::vector<Formula>& premises,
                                                   std::shared_ptr<const Signature> sig, int worlds,
                                                   int individuals, const Bounds& b, SearchOptions opt) {
  Bounds wide = b;
  wide.max_worlds = std::max(b.max_worlds, worlds);
  wide.max_individuals = std::max(b.max_individuals, individuals);
  return search(premises, nullptr, std::move(sig), wide, opt, worlds, individuals).model;
}

void for_each_model(const std::vector<Formula>& premises, std::shared_ptr<const Signature> sig, const Bounds& b,
                    const std::function<bool(const KripkeInterpretation&)>& visit) {
  check_signature(*sig);
  bool need = false;
  for (const auto& p : premises) need = need || uses_relspace(expand_derived(p));
  bool stop = false;
  const std::function<bool(const KripkeInterpretation&)> wrapped = [&](const KripkeInterpretation& m) {
    if (!visit(m)) stop = true;
    return !stop;
  };
  for (int w = 1; w <= b.max_worlds && !stop; ++w)
    for (int d = 1; d <= b.max_individuals && !stop; ++d) {
      SizeSearch s(sig, w, d, b, premises, nullptr, Goal::All, need);
      s.run_prefix(0, 0, &wrapped);
    }
}

std::vector<std::vector<int>> minimize_premises(const std::vector<Formula>& premises, const Formula& conjecture,
                                                std::shared_ptr<const Signature> sig, const Bounds& b,
                                                SearchOptions opt) {
  const int n = static_cast<int>(premises.size());
  if (n > 20) throw BudgetError("too many premises to minimize");
  if (find_countermodel(premises, conjecture, sig, b, opt))
    throw EvalError("the conjecture has a countermodel from the full premise set");
  std::vector<std::uint32_t> minimal;
  std::vector<std::vector<int>> out;
  for (int size = 0; size <= n; ++size) {
    // Subsets of this size in lexicographic order of their index lists.
    std::vector<int> pick(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    for (;;) {
      std::uint32_t mask = 0;
      for (int i : pick) mask |= 1u << i;
      const bool covered =
          std::any_of(minimal.begin(), minimal.end(), [&](std::uint32_t m) { return (m & mask) == m; });
      if (!covered) {
        std::vector<Formula> subset;
        for (int i : pick) subset.push_back(premises[static_cast<std::size_t>(i)]);
        if (!find_countermodel(subset, conjecture, sig, b, opt)) {
          minimal.push_back(mask);
          out.push_back(pick);
        }
      }
      int i = size - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

std::vector<FrameVerdict> frame_requirements(const std::vector<Formula>& premises, const Formula& conjecture,
                                             const Signature& sig, const std::vector<Logic>& logics,
                                             const Bounds& b, SearchOptions opt) {
  std::vector<FrameVerdict> out;
  for (Logic l : logics) {
    auto s = std::make_shared<Signature>(sig);
    s->logic = l;
    out.push_back(FrameVerdict{l, find_countermodel(premises, conjecture, s, b, opt)});
  }
  return out;
}

}  // namespace qml
