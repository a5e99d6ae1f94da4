#include "nesal/solver.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "nesal/bounds.hpp"
#include "nesal/cnf.hpp"
#include "nesal/simplex.hpp"

namespace nesal {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "verified";
    case Verdict::Falsified: return "falsified";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

std::string check_model(const VC& vc, const Model& model) {
  if (model.size() < vc.num_vars()) return "model is not total";
  for (std::size_t i = 0; i < vc.hard.size(); ++i)
    if (!vc.hard[i].holds(model)) return "hard constraint " + std::to_string(i) + " violated";
  for (std::size_t i = 0; i < vc.relus.size(); ++i) {
    const auto& r = vc.relus[i];
    if (model[r.post] != max(Rational(), model[r.pre])) return "relu " + std::to_string(i) + " violated";
  }
  std::vector<bool> atom_values;
  atom_values.reserve(vc.atoms.size());
  for (const auto& a : vc.atoms) atom_values.push_back(a.holds(model));
  if (!vc.skeleton.eval(atom_values)) return "skeleton not satisfied";
  return {};
}

std::vector<CexRecord> extract_counterexample(const Model& model, const VC& vc) {
  std::vector<CexRecord> out;
  for (const auto& port : vc.ports) {
    CexRecord rec{port.output, port.network, port.input, {}, {}};
    for (VarId v : port.inputs) {
      if (v >= model.size()) throw std::logic_error("model has no value for input variable v" + std::to_string(v));
      rec.input_values.push_back(model[v]);
    }
    for (VarId v : port.outputs) {
      if (v >= model.size()) throw std::logic_error("model has no value for output variable v" + std::to_string(v));
      rec.output_values.push_back(model[v]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Control {
  Clock::time_point deadline;
  std::atomic<bool> cancel{false};
  std::atomic<std::uint64_t> splits{0};
  std::uint64_t max_splits = 0;
};

class Search {
 public:
  enum class Outcome { Sat, Unsat, Abort };

  Search(const VC& vc, const Cnf& cnf, const BoundsResult& root, Control& ctl)
      : vc_(vc), cnf_(cnf), ctl_(ctl), sx_(vc.num_vars()), bounds_(root), propagator_(vc) {}

  Outcome run(const std::vector<std::pair<std::size_t, Phase>>& forced) {
    if (cnf_.has_empty_clause() || bounds_.infeasible) return Outcome::Unsat;
    if (!setup()) return Outcome::Unsat;
    for (const auto& [r, p] : forced) {
      if (bounds_.phases[r] != Phase::Undecided && bounds_.phases[r] != p) return Outcome::Unsat;
      if (!set_phase(r, p)) return Outcome::Unsat;
    }
    return dfs();
  }

  Model model;
  SolverStats stats;
  std::string abort_reason;

 private:
  struct Mark {
    std::size_t bool_trail;
  };

  // a * target op rhs
  bool assert_linear(VarId target, const Rational& a, RelOp op, const Rational& rhs) {
    const DeltaRational bound = (op == RelOp::Lt ? DeltaRational(rhs, Rational(-1)) : DeltaRational(rhs)) / a;
    if (op == RelOp::Eq) return sx_.assert_upper(target, bound) && sx_.assert_lower(target, bound);
    return a.sign() > 0 ? sx_.assert_upper(target, bound) : sx_.assert_lower(target, bound);
  }

  bool setup() {
    // Equalities that introduce a fresh variable (every neuron's weighted
    // sum, every linear activation) define it directly as a basic variable,
    // so they hold from the start and never cost a pivot.
    const VarId one = sx_.add_variable();
    if (!sx_.assert_lower(one, DeltaRational(Rational(1))) || !sx_.assert_upper(one, DeltaRational(Rational(1))))
      return false;
    std::vector<bool> used(vc_.num_vars(), false);
    for (const auto& c : vc_.hard) {
      if (c.terms.empty()) {
        if (!c.holds({})) return false;
        continue;
      }
      std::optional<std::size_t> fresh;
      if (c.op == RelOp::Eq && c.terms.size() > 1)
        for (std::size_t i = c.terms.size(); i-- > 0;)
          if (!used[c.terms[i].second]) {
            fresh = i;
            break;
          }
      for (const auto& t : c.terms) used[t.second] = true;
      if (fresh) {
        const Rational& a = c.terms[*fresh].first;
        std::vector<std::pair<Rational, VarId>> def{{c.rhs / a, one}};
        for (std::size_t i = 0; i < c.terms.size(); ++i)
          if (i != *fresh) def.emplace_back(-(c.terms[i].first / a), c.terms[i].second);
        sx_.define(c.terms[*fresh].second, def);
      } else if (c.terms.size() == 1) {
        if (!assert_linear(c.terms.front().second, c.terms.front().first, c.op, c.rhs)) return false;
      } else {
        if (!assert_linear(sx_.add_row(c.terms), Rational(1), c.op, c.rhs)) return false;
      }
    }
    atom_target_.reserve(vc_.atoms.size());
    for (const auto& a : vc_.atoms) {
      if (a.terms.size() == 1) {
        atom_target_.emplace_back(a.terms.front().second, a.terms.front().first);
      } else {
        atom_target_.emplace_back(sx_.add_row(a.terms), Rational(1));
      }
    }
    for (const auto& r : vc_.relus) {
      const VarId diff = sx_.add_row({{Rational(1), r.post}, {Rational(-1), r.pre}});
      relu_diff_.push_back(diff);
      if (!sx_.assert_lower(r.post, DeltaRational()) || !sx_.assert_lower(diff, DeltaRational())) return false;
      const Interval& y = bounds_.bounds[r.pre];
      if (y.lo && y.hi && y.lo->sign() < 0 && y.hi->sign() > 0) {
        // chord above the relu graph on [lo, hi]: (hi - lo) X - hi Y <= -hi lo
        const Rational& lo = *y.lo;
        const Rational& hi = *y.hi;
        const VarId t = sx_.add_row({{hi - lo, r.post}, {-hi, r.pre}});
        if (!sx_.assert_upper(t, DeltaRational(-(hi * lo)))) return false;
      }
    }
    for (std::size_t r = 0; r < vc_.relus.size(); ++r)
      if (bounds_.phases[r] != Phase::Undecided && !assert_phase(r, bounds_.phases[r])) return false;
    if (!assert_interval_bounds()) return false;
    warm_start();
    assign_.assign(cnf_.num_vars, -1);
    return true;
  }

  // Start from the forward pass at the centre of the input box, so every
  // network constraint holds before the first check.
  void warm_start() {
    for (VarId v = 0; v < vc_.num_vars(); ++v) {
      if (vc_.varmap[v].kind != Provenance::Kind::NetInput) continue;
      const Interval& iv = bounds_.bounds[v];
      Rational target;
      if (iv.lo && iv.hi) {
        target = (*iv.lo + *iv.hi) / Rational(2);
      } else if (iv.lo) {
        target = *iv.lo;
      } else if (iv.hi) {
        target = *iv.hi;
      }
      sx_.nudge(v, DeltaRational(target));
    }
    for (const auto& r : vc_.relus) {
      const DeltaRational& y = sx_.value(r.pre);
      sx_.nudge(r.post, y > DeltaRational() ? y : DeltaRational());
    }
  }

  bool assert_phase(std::size_t r, Phase p) {
    const auto& relu = vc_.relus[r];
    if (p == Phase::Inactive)
      return sx_.assert_upper(relu.pre, DeltaRational()) && sx_.assert_upper(relu.post, DeltaRational());
    return sx_.assert_lower(relu.pre, DeltaRational()) && sx_.assert_upper(relu_diff_[r], DeltaRational());
  }

  bool set_phase(std::size_t r, Phase p) {
    bounds_.phases[r] = p;
    return assert_phase(r, p);
  }

  bool assert_interval_bounds() {
    for (const auto& r : vc_.relus) {
      for (VarId v : {r.pre, r.post}) {
        const Interval& iv = bounds_.bounds[v];
        if (iv.lo && !sx_.assert_lower(v, DeltaRational(*iv.lo))) return false;
        if (iv.hi && !sx_.assert_upper(v, DeltaRational(*iv.hi))) return false;
      }
    }
    return true;
  }

  void push() {
    sx_.push();
    marks_.push_back({bool_trail_.size()});
    saved_bounds_.push_back(bounds_);
  }

  void pop() {
    sx_.pop();
    const Mark m = marks_.back();
    marks_.pop_back();
    while (bool_trail_.size() > m.bool_trail) {
      assign_[bool_trail_.back()] = -1;
      bool_trail_.pop_back();
    }
    bounds_ = std::move(saved_bounds_.back());
    saved_bounds_.pop_back();
  }

  int value(const Lit& l) const {
    const int v = assign_[l.var];
    if (v < 0) return -1;
    return (v == 1) == l.positive ? 1 : 0;
  }

  bool assign(const Lit& l) {
    assign_[l.var] = l.positive ? 1 : 0;
    bool_trail_.push_back(l.var);
    if (l.positive && l.var < cnf_.num_atoms) {
      const LinearConstraint& a = vc_.atoms[l.var];
      const auto& [target, coef] = atom_target_[l.var];
      return assert_linear(target, coef, a.op, a.rhs);
    }
    return true;
  }

  bool unit_propagate() {
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& clause : cnf_.clauses) {
        std::size_t open = 0;
        const Lit* last = nullptr;
        bool sat = false;
        for (const auto& l : clause) {
          const int v = value(l);
          if (v == 1) {
            sat = true;
            break;
          }
          if (v < 0) {
            ++open;
            last = &l;
          }
        }
        if (sat) continue;
        if (open == 0) return false;
        if (open == 1) {
          if (!assign(*last)) return false;
          changed = true;
        }
      }
    }
    return true;
  }

  std::optional<Lit> pick_decision() const {
    for (const auto& clause : cnf_.clauses) {
      bool sat = false;
      const Lit* first_open = nullptr;
      for (const auto& l : clause) {
        const int v = value(l);
        if (v == 1) {
          sat = true;
          break;
        }
        if (v < 0 && !first_open) first_open = &l;
      }
      if (!sat && first_open) return *first_open;
    }
    return std::nullopt;
  }

  bool propagate_node() {
    ++stats.propagations;
    std::vector<const LinearConstraint*> extra;
    for (std::size_t k = 0; k < cnf_.num_atoms; ++k)
      if (assign_[k] == 1) extra.push_back(&vc_.atoms[k]);
    const std::vector<Phase> before = bounds_.phases;
    if (!propagator_.run(bounds_, extra, 2)) return false;
    for (std::size_t r = 0; r < before.size(); ++r)
      if (before[r] == Phase::Undecided && bounds_.phases[r] != Phase::Undecided &&
          !assert_phase(r, bounds_.phases[r]))
        return false;
    return assert_interval_bounds();
  }

  bool interrupted() const { return ctl_.cancel.load(std::memory_order_relaxed) || Clock::now() > ctl_.deadline; }

  Outcome abort_with_interrupt() {
    abort_reason = ctl_.cancel.load() ? "cancelled" : "timeout";
    return Outcome::Abort;
  }

  static bool relu_holds(const DeltaRational& y, const DeltaRational& x) {
    const DeltaRational zero;
    return (x == y && y >= zero) || (x == zero && y <= zero);
  }

  Outcome finish() {
    std::vector<std::pair<DeltaRational, DeltaRational>> extra;
    for (const auto& r : vc_.relus) {
      const DeltaRational& y = sx_.value(r.pre);
      const DeltaRational& x = sx_.value(r.post);
      if (x == y && y >= DeltaRational()) {
        extra.emplace_back(DeltaRational(), y);
      } else {
        extra.emplace_back(y, DeltaRational());
      }
    }
    Model values = sx_.concrete_values(sx_.concrete_delta(extra));
    values.resize(vc_.num_vars());
    if (auto err = check_model(vc_, values); !err.empty())
      throw std::logic_error("internal error: extracted model fails verification: " + err);
    model = std::move(values);
    return Outcome::Sat;
  }

  Outcome check_theory() {
    const auto status = sx_.check([this] { return interrupted(); });
    if (status == Simplex::Status::Interrupted) return abort_with_interrupt();
    return status == Simplex::Status::Feasible ? Outcome::Sat : Outcome::Unsat;
  }

  Outcome dfs() {
    if (interrupted()) return abort_with_interrupt();
    if (!unit_propagate()) return Outcome::Unsat;
    if (!propagate_node()) return Outcome::Unsat;
    if (auto t = check_theory(); t != Outcome::Sat) return t;

    if (auto lit = pick_decision()) {
      ++stats.decisions;
      for (const Lit choice : {*lit, ~*lit}) {
        push();
        Outcome r = assign(choice) ? dfs() : Outcome::Unsat;
        pop();
        if (r != Outcome::Unsat) return r;
      }
      return Outcome::Unsat;
    }

    std::optional<std::size_t> split;
    for (std::size_t r = 0; r < vc_.relus.size(); ++r) {
      if (bounds_.phases[r] != Phase::Undecided) continue;
      if (!relu_holds(sx_.value(vc_.relus[r].pre), sx_.value(vc_.relus[r].post))) {
        split = r;
        break;
      }
    }
    if (!split) return finish();

    ++stats.splits;
    const std::uint64_t total = ctl_.splits.fetch_add(1) + 1;
    if (ctl_.max_splits && total > ctl_.max_splits) {
      abort_reason = "resource limit";
      return Outcome::Abort;
    }
    for (const Phase p : {Phase::Inactive, Phase::Active}) {
      push();
      Outcome r = set_phase(*split, p) ? dfs() : Outcome::Unsat;
      pop();
      if (r != Outcome::Unsat) return r;
    }
    return Outcome::Unsat;
  }

 public:
  std::uint64_t pivots() const { return sx_.pivots(); }

 private:
  const VC& vc_;
  const Cnf& cnf_;
  Control& ctl_;
  Simplex sx_;
  BoundsResult bounds_;
  BoundPropagator propagator_;
  std::vector<std::pair<VarId, Rational>> atom_target_;
  std::vector<VarId> relu_diff_;
  std::vector<int> assign_;
  std::vector<std::size_t> bool_trail_;
  std::vector<Mark> marks_;
  std::vector<BoundsResult> saved_bounds_;
};

void accumulate(SolverStats& into, const Search& s) {
  into.splits += s.stats.splits;
  into.decisions += s.stats.decisions;
  into.propagations += s.stats.propagations;
  into.pivots += s.pivots();
}

SolverResult solve_parallel(const VC& vc, const Cnf& cnf, const BoundsResult& root, Control& ctl,
                            std::size_t threads) {
  std::vector<std::size_t> open;
  for (std::size_t r = 0; r < vc.relus.size(); ++r)
    if (root.phases[r] == Phase::Undecided) open.push_back(r);
  std::size_t depth = 0;
  while ((std::size_t{1} << depth) < 2 * threads && depth < open.size()) ++depth;
  const std::size_t tasks = std::size_t{1} << depth;

  std::mutex mu;
  SolverResult result;
  result.verdict = Verdict::Verified;
  std::atomic<std::size_t> next{0};
  bool found = false;
  std::string abort_reason;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks || ctl.cancel.load()) return;
      std::vector<std::pair<std::size_t, Phase>> forced;
      for (std::size_t bit = 0; bit < depth; ++bit)
        forced.emplace_back(open[bit], ((task >> (depth - 1 - bit)) & 1) ? Phase::Active : Phase::Inactive);
      Search search(vc, cnf, root, ctl);
      const auto outcome = search.run(forced);
      std::lock_guard lock(mu);
      accumulate(result.stats, search);
      if (outcome == Search::Outcome::Sat && !found) {
        found = true;
        result.model = std::move(search.model);
        ctl.cancel.store(true);
      } else if (outcome == Search::Outcome::Abort && !found && abort_reason.empty()) {
        abort_reason = search.abort_reason;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (found) {
    result.verdict = Verdict::Falsified;
  } else if (!abort_reason.empty()) {
    result.verdict = Verdict::Unknown;
    result.unknown_reason = abort_reason;
  }
  return result;
}

}  // namespace

SolverResult solve(const VC& vc, const SolverConfig& config) {
  const auto start = Clock::now();
  Control ctl;
  ctl.deadline = start + std::chrono::milliseconds(static_cast<std::int64_t>(config.timeout_seconds * 1000.0));
  ctl.max_splits = config.max_splits;

  SolverResult result;
  const Cnf cnf = tseitin(vc.skeleton, vc.atoms.size());
  BoundsResult root = propagate_bounds(vc);

  if (cnf.has_empty_clause() || root.infeasible) {
    result.verdict = Verdict::Verified;
  } else if (config.threads > 1 && vc.relus.size() > 0) {
    result = solve_parallel(vc, cnf, root, ctl, config.threads);
  } else {
    Search search(vc, cnf, root, ctl);
    const auto outcome = search.run({});
    accumulate(result.stats, search);
    switch (outcome) {
      case Search::Outcome::Sat:
        result.verdict = Verdict::Falsified;
        result.model = std::move(search.model);
        break;
      case Search::Outcome::Unsat: result.verdict = Verdict::Verified; break;
      case Search::Outcome::Abort:
        result.verdict = Verdict::Unknown;
        result.unknown_reason = search.abort_reason;
        break;
    }
  }
  result.stats.propagations += 1;
  result.stats.elapsed_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count());
  return result;
}

}  // namespace nesal
