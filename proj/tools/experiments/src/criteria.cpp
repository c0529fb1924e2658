#include "stablepc/experiments/criteria.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include "stablepc/errors.hpp"
#include "stablepc/metrics.hpp"

namespace stablepc::experiments {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Last row with iteration ≤ k.
const Row* row_at(const Run& run, std::size_t k) {
  const Row* found = nullptr;
  for (const Row& r : run.rows) {
    if (r.iteration > k) break;
    found = &r;
  }
  return found;
}

std::size_t count_events(const Run& run, Event e) {
  std::size_t c = 0;
  for (const Row& r : run.rows) c += r.event == e;
  return c;
}

class Checker {
 public:
  Checker(const ExperimentOutput& out, std::vector<CriterionResult>& results)
      : out_(out), results_(results) {}

  /// Runs `body` with the named runs; a missing run fails the criterion.
  void check(std::string id, std::string description, const std::string& case_name,
             std::vector<std::string> solvers,
             const std::function<bool(const std::vector<const Run*>&, std::string&)>& body) {
    CriterionResult res{std::move(id), std::move(description), false, {}};
    std::vector<const Run*> runs;
    for (const std::string& s : solvers) {
      const Run* r = out_.find(case_name, s);
      if (!r || r->rows.empty()) {
        res.detail = "missing run " + (case_name.empty() ? s : case_name + "-" + s);
        results_.push_back(std::move(res));
        return;
      }
      runs.push_back(r);
    }
    try {
      res.passed = body(runs, res.detail);
    } catch (const Error& e) {
      res.passed = false;
      res.detail = e.what();
    }
    results_.push_back(std::move(res));
  }

 private:
  const ExperimentOutput& out_;
  std::vector<CriterionResult>& results_;
};

double need(const std::optional<double>& v, const char* what) {
  if (!v) throw InsufficientData(std::string("no measured ") + what);
  return *v;
}

double rate_over(const Run& run, std::size_t first, std::size_t last) {
  std::vector<std::size_t> its;
  std::vector<double> res;
  for (const Row& r : run.rows) {
    if (r.iteration < first || r.iteration > last) continue;
    its.push_back(r.iteration);
    res.push_back(r.residual);
  }
  return fit_rate(its, res);
}

/// First iteration ≤ limit at which residual ≤ threshold, if any.
std::optional<std::size_t> reaches(const Run& run, double threshold, std::size_t limit) {
  for (const Row& r : run.rows) {
    if (r.iteration > limit) break;
    if (r.residual <= threshold) return r.iteration;
  }
  return std::nullopt;
}

void fig1(const ExperimentOutput& out, Checker& c, std::size_t n) {
  const double root_n_u = std::sqrt(static_cast<double>(n)) * kUnitRoundoff;
  const CaseInfo* info = out.find_case("");
  const double norm_b = info ? info->norm_b : 0.0;
  const double kappa = info ? info->meta.kappa_a : 0.0;

  c.check("A1a", "plain PLSQR berr at 100 iterations >= 1e3 x direct berr", "", {"plsqr", "direct"},
          [](const auto& r, std::string& d) {
            const Row* at = row_at(*r[0], 100);
            const double p = need(at ? at->berr : std::nullopt, "plsqr berr");
            const double direct = need(r[1]->rows.back().berr, "direct berr");
            d = "plsqr " + sci(p) + ", direct " + sci(direct);
            return p >= 1e3 * direct;
          });
  c.check("A1b", "PLSQR-IR (f = 50) berr <= sqrt(n)u within 150 iterations, one refinement", "",
          {"plsqr_ir_auto"}, [&](const auto& r, std::string& d) {
            const Row& last = r[0]->rows.back();
            const double b = need(last.berr, "berr");
            const std::size_t refs = count_events(*r[0], Event::refinement);
            d = "berr " + sci(b) + " at " + std::to_string(last.iteration) + ", refinements " +
                std::to_string(refs);
            return b <= root_n_u && last.iteration <= 150 && refs == 1;
          });
  c.check("A1c", "PLSQR-IR forward error <= 1e-4 x plain PLSQR forward error", "",
          {"plsqr_ir_auto", "plsqr"}, [](const auto& r, std::string& d) {
            const double ir = need(r[0]->rows.back().forward_error, "IR forward error");
            const Row* at = row_at(*r[1], 100);
            const double p = need(at ? at->forward_error : std::nullopt, "plsqr forward error");
            d = "IR " + sci(ir) + ", plsqr " + sci(p);
            return ir <= 1e-4 * p;
          });
  c.check("A1d", "right-preconditioned GMRES residual at 100 iterations >= 0.1 ||b||", "", {"gmres"},
          [&](const auto& r, std::string& d) {
            const Row* at = row_at(*r[0], 100);
            if (!at) throw InsufficientData("no GMRES rows");
            d = "residual " + sci(at->residual) + ", ||b|| " + sci(norm_b);
            return at->residual >= 0.1 * norm_b;
          });

  c.check("A7a", "meta-solver per-sweep contraction <= 1e6 kappa u until the u-floor", "", {"meta"},
          [&](const auto& r, std::string& d) {
            const auto& rows = r[0]->rows;
            double worst = 0.0;
            for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
              if (rows[i].berr && *rows[i].berr <= root_n_u) break;
              if (!(rows[i].residual > 0.0)) break;
              worst = std::max(worst, rows[i + 1].residual / rows[i].residual);
            }
            d = "worst ratio " + sci(worst) + ", bound " + sci(1e6 * kappa * kUnitRoundoff);
            return worst <= 1e6 * kappa * kUnitRoundoff;
          });
  c.check("A7b", "meta-solver berr <= sqrt(n)u within 4 sweeps", "", {"meta"},
          [&](const auto& r, std::string& d) {
            const Row& last = r[0]->rows.back();
            const double b = need(last.berr, "berr");
            d = "berr " + sci(b) + " after " + std::to_string(last.iteration) + " sweeps";
            return b <= root_n_u && last.iteration <= 4;
          });
  c.check("A7c", "meta-solver uses each primitive at most 400 times", "", {"meta"},
          [](const auto& r, std::string& d) {
            const MatvecCounts& k = r[0]->summary.counts;
            d = "A " + std::to_string(k.apply) + ", At " + std::to_string(k.apply_adjoint) + ", P " +
                std::to_string(k.pre) + ", Pt " + std::to_string(k.pre_adjoint);
            return k.apply <= 400 && k.apply_adjoint <= 400 && k.pre <= 400 && k.pre_adjoint <= 400;
          });
}

void fig3(Checker& c, std::size_t n) {
  const double root_n_u = std::sqrt(static_cast<double>(n)) * kUnitRoundoff;
  c.check("A2a", "left PLSQR berr <= 10 sqrt(n)u within 150 iterations", "", {"left_plsqr"},
          [&](const auto& r, std::string& d) {
            double best = INFINITY;
            for (const Row& row : r[0]->rows) {
              if (row.iteration > 150) break;
              if (row.berr) best = std::min(best, *row.berr);
            }
            d = "best berr " + sci(best);
            return best <= 10.0 * root_n_u;
          });
  c.check("A2b", "CGNR and CGNE berr stay >= 1e-9 after 150 iterations", "",
          {"cgnr_left", "cgne_left"}, [](const auto& r, std::string& d) {
            const double a = need(r[0]->rows.back().berr, "cgnr berr");
            const double b = need(r[1]->rows.back().berr, "cgne berr");
            d = "cgnr " + sci(a) + ", cgne " + sci(b);
            return a >= 1e-9 && b >= 1e-9;
          });
  c.check("A2c", "CGNR and CGNE forward errors within 1e2 of the direct solve", "",
          {"cgnr_left", "cgne_left", "direct"}, [](const auto& r, std::string& d) {
            const double a = need(r[0]->rows.back().forward_error, "cgnr forward error");
            const double b = need(r[1]->rows.back().forward_error, "cgne forward error");
            const double direct = need(r[2]->rows.back().forward_error, "direct forward error");
            d = "cgnr " + sci(a) + ", cgne " + sci(b) + ", direct " + sci(direct);
            auto close = [&](double v) { return v <= 1e2 * direct && v >= 1e-2 * direct; };
            return close(a) && close(b);
          });
}

void fig2(const ExperimentOutput& out, Checker& c) {
  auto norm_b = [&](const char* name) {
    const CaseInfo* info = out.find_case(name);
    if (!info) throw InsufficientData(std::string("no case ") + name);
    return info->norm_b;
  };
  const double rho_cg = cg_rate(100.0);
  const double rho_lsqr = lsqr_rate(100.0);
  c.check("A3a", "ClusterEigsIllCond: GMRES rate <= 1.2 rho_CG(100), LSQR rate in [0.9, 1.1] rho_LSQR(100)",
          "cluster_ill", {"gmres", "lsqr"}, [&](const auto& r, std::string& d) {
            const double g = rate_over(*r[0], 1, 100);
            const double l = rate_over(*r[1], 1, 100);
            d = "GMRES " + sci(g) + " vs " + sci(rho_cg) + ", LSQR " + sci(l) + " vs " + sci(rho_lsqr);
            return g <= 1.2 * rho_cg && l >= 0.9 * rho_lsqr && l <= 1.1 * rho_lsqr;
          });
  c.check("A3b", "SpreadEigsWellCond: GMRES residual at 100 >= 0.5 ||b||, LSQR <= 1e-10 ||b||",
          "spread_well", {"gmres", "lsqr"}, [&](const auto& r, std::string& d) {
            const double nb = norm_b("spread_well");
            const Row* g = row_at(*r[0], 100);
            const Row* l = row_at(*r[1], 100);
            if (!g || !l) throw InsufficientData("no rows");
            d = "GMRES " + sci(g->residual / nb) + ", LSQR " + sci(l->residual / nb) + " (relative)";
            return g->residual >= 0.5 * nb && l->residual <= 1e-10 * nb;
          });
  c.check("A3c", "ClusterEigsWellCond: GMRES and LSQR reach 1e-10 ||b|| within 60 iterations",
          "cluster_well", {"gmres", "lsqr"}, [&](const auto& r, std::string& d) {
            const double nb = norm_b("cluster_well");
            const auto g = reaches(*r[0], 1e-10 * nb, 60);
            const auto l = reaches(*r[1], 1e-10 * nb, 60);
            d = "GMRES at " + (g ? std::to_string(*g) : std::string("never")) + ", LSQR at " +
                (l ? std::to_string(*l) : std::string("never"));
            return g && l;
          });
}

void shift(const ExperimentOutput& out, Checker& c, std::size_t n) {
  const CaseInfo* info = out.find_case("");
  const double nb = info ? info->norm_b : 1.0;
  c.check("A4a", "GMRES on the cyclic shift: residual >= 0.999 ||b|| for k < n, <= 1e-12 ||b|| at k = n",
          "", {"gmres"}, [&](const auto& r, std::string& d) {
            double low = INFINITY;
            std::optional<double> at_n;
            for (const Row& row : r[0]->rows) {
              if (row.iteration < n) low = std::min(low, row.residual);
              if (row.iteration == n) at_n = row.residual;
            }
            const double final_res = need(at_n, "residual at k = n");
            d = "min over k < n " + sci(low / nb) + ", at n " + sci(final_res / nb) + " (relative)";
            return low >= 0.999 * nb && final_res <= 1e-12 * nb;
          });
  c.check("A4b", "LSQR on the cyclic shift reaches 1e-12 ||b|| within 2 iterations", "", {"lsqr"},
          [&](const auto& r, std::string& d) {
            const auto k = reaches(*r[0], 1e-12 * nb, 2);
            d = k ? "at iteration " + std::to_string(*k) : "not within 2 iterations";
            return k.has_value();
          });
}

void fig4_left(Checker& c, std::size_t n) {
  const double root_n_u = std::sqrt(static_cast<double>(n)) * kUnitRoundoff;
  c.check("A5a", "Wishart-preconditioned PCG stalls at berr >= 1e2 sqrt(n)u after 200 iterations", "",
          {"pcg"}, [&](const auto& r, std::string& d) {
            const Row* at = row_at(*r[0], 200);
            const double b = need(at ? at->berr : std::nullopt, "berr");
            d = "berr " + sci(b) + " vs " + sci(1e2 * root_n_u);
            return b >= 1e2 * root_n_u;
          });
  c.check("A5b", "PCG-IR (f = 50) reaches berr <= sqrt(n)u with at most 2 refinements", "", {"pcg_ir"},
          [&](const auto& r, std::string& d) {
            const double b = need(r[0]->rows.back().berr, "berr");
            const std::size_t refs = count_events(*r[0], Event::refinement);
            d = "berr " + sci(b) + ", refinements " + std::to_string(refs);
            return b <= root_n_u && refs <= 2;
          });
}

void fig4_right(Checker& c, std::size_t n) {
  const double root_n_u = std::sqrt(static_cast<double>(n)) * kUnitRoundoff;
  c.check("A5c", "Nystrom-preconditioned PCG-IR reaches berr <= 10 sqrt(n)u", "", {"pcg_ir"},
          [&](const auto& r, std::string& d) {
            const double b = need(r[0]->rows.back().berr, "berr");
            d = "berr " + sci(b);
            return b <= 10.0 * root_n_u;
          });
  c.check("A5d", "plain Nystrom PCG final berr >= 10 x PCG-IR final berr", "", {"pcg", "pcg_ir"},
          [](const auto& r, std::string& d) {
            const double p = need(r[0]->rows.back().berr, "pcg berr");
            const double ir = need(r[1]->rows.back().berr, "pcg_ir berr");
            d = "pcg " + sci(p) + ", pcg_ir " + sci(ir);
            return p >= 10.0 * ir;
          });
}

void fig5(Checker& c, std::size_t n) {
  const double root_n_u = std::sqrt(static_cast<double>(n)) * kUnitRoundoff;
  c.check("A6a", "plain PLSQR berr never improves more than 10x on its first measurement", "",
          {"plsqr"}, [](const auto& r, std::string& d) {
            std::optional<double> first;
            double best = INFINITY;
            for (const Row& row : r[0]->rows) {
              if (!row.berr) continue;
              if (!first) first = row.berr;
              best = std::min(best, *row.berr);
            }
            const double f = need(first, "berr");
            d = "first " + sci(f) + ", best " + sci(best);
            return best >= f / 10.0;
          });
  c.check("A6b", "automatic PLSQR-IR reaches berr <= sqrt(n)u", "", {"plsqr_ir_auto"},
          [&](const auto& r, std::string& d) {
            const double b = need(r[0]->rows.back().berr, "berr");
            d = "berr " + sci(b);
            return b <= root_n_u;
          });
  c.check("A6c", "automatic PLSQR-IR iterations <= fixed-f iterations + 30", "",
          {"plsqr_ir_auto", "plsqr_ir_fixed"}, [](const auto& r, std::string& d) {
            const std::size_t a = r[0]->rows.back().iteration;
            const std::size_t f = r[1]->rows.back().iteration;
            const bool fixed_ok = r[1]->summary.status == Status::converged;
            d = "automatic " + std::to_string(a) + ", fixed " + std::to_string(f) +
                (fixed_ok ? "" : " (fixed did not converge)");
            return a <= f + 30;
          });
}

}  // namespace

std::vector<CriterionResult> evaluate(const ExperimentOutput& out) {
  std::vector<CriterionResult> results;
  Checker c(out, results);
  const std::size_t n = out.cases.empty() ? out.config.problem.n : out.cases.front().meta.n;
  switch (out.config.experiment) {
    case Experiment::fig1: fig1(out, c, n); break;
    case Experiment::fig2: fig2(out, c); break;
    case Experiment::fig3: fig3(c, n); break;
    case Experiment::fig4_left: fig4_left(c, n); break;
    case Experiment::fig4_right_synthetic: fig4_right(c, n); break;
    case Experiment::fig5: fig5(c, n); break;
    case Experiment::shift: shift(out, c, n); break;
    case Experiment::custom: break;
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  std::string line = (r.passed ? "PASS " : "FAIL ") + r.id + "  " + r.description;
  if (!r.detail.empty()) line += "  (" + r.detail + ")";
  return line;
}

}  // namespace stablepc::experiments
