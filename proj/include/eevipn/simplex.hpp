#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "eevipn/milp.hpp"

namespace eevipn {

enum class LpStatus { optimal, infeasible, unbounded, iter_limit };

struct LpSolution {
  LpStatus status = LpStatus::iter_limit;
  double objective = 0;
  std::vector<double> x;  // structural variables only
};

/// Linear program in bounded-variable form: minimize obj subject to
/// row.lo <= a.x <= row.up and lo <= x <= up.
struct LpProblem {
  std::vector<double> obj;
  std::vector<double> lo, up;
  std::vector<MilpRow> rows;
};

namespace lps {

// Revised simplex with an explicit basis inverse. Upper bounds are handled
// through nonbasic-at-upper states, feasibility through one artificial per
// row, pricing is Dantzig with a Bland fallback on stalls, and the ratio
// test is a two-pass Harris variant that prefers large pivots while letting
// any bound flex by at most a hair per pivot. Before optimality is declared
// the basis is refactorized from scratch and re-verified; if that ever
// disagrees, the whole solve restarts once in a slow paranoid mode.
class Solver {
 public:
  explicit Solver(const LpProblem& p)
      : n_(static_cast<int>(p.obj.size())), m_(static_cast<int>(p.rows.size())) {
    N_ = n_ + 2 * m_;
    cols_.resize(N_);
    lo_.assign(N_, 0.0);
    up_.assign(N_, 0.0);
    cost_.assign(N_, 0.0);

    // Geometric-mean row scaling. It centers rows that mix unit and big-M
    // coefficients without shrinking a one-unit violation below the
    // feasibility tolerances the way max-coefficient scaling would.
    std::vector<double> scale(m_, 1.0);
    for (int r = 0; r < m_; ++r) {
      double mx = 0, mn = kInf;
      for (const LinTerm& t : p.rows[r].terms) {
        const double a = std::abs(t.coeff);
        if (a == 0) continue;
        mx = std::max(mx, a);
        mn = std::min(mn, a);
      }
      scale[r] = mx > 0 ? std::sqrt(mx * mn) : 1.0;
    }
    for (int j = 0; j < n_; ++j) {
      lo_[j] = p.lo[j];
      up_[j] = p.up[j];
    }
    for (int r = 0; r < m_; ++r)
      for (const LinTerm& t : p.rows[r].terms)
        cols_[t.var].push_back({r, t.coeff / scale[r]});
    for (int r = 0; r < m_; ++r) {
      const int s = n_ + r;
      cols_[s].push_back({r, -1.0});
      lo_[s] = p.rows[r].lo == -kInf ? -kInf : p.rows[r].lo / scale[r];
      up_[s] = p.rows[r].up == kInf ? kInf : p.rows[r].up / scale[r];
    }
    obj_ = p.obj;
  }

  LpSolution solve(long iter_limit = 100000) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      paranoid_ = attempt == 1;
      const LpStatus st = run(iter_limit);
      if (st == LpStatus::iter_limit && attempt == 0) continue;
      if (st != LpStatus::optimal) return {st, 0, {}};

      LpSolution sol;
      sol.status = LpStatus::optimal;
      sol.x.assign(x_.begin(), x_.begin() + n_);
      sol.objective = 0;
      for (int j = 0; j < n_; ++j) sol.objective += obj_[j] * sol.x[j];
      return sol;
    }
    return {LpStatus::iter_limit, 0, {}};
  }

 private:
  enum State : unsigned char { kAtLower, kAtUpper, kBasic };

  struct Entry {
    int row;
    double coeff;
  };

  int n_, m_, N_;
  bool paranoid_ = false;
  std::vector<std::vector<Entry>> cols_;
  std::vector<double> lo_, up_, cost_, obj_;
  std::vector<double> x_;
  std::vector<State> state_;
  std::vector<int> basic_;
  std::vector<double> binv_;  // m x m row-major

  double binv(int r, int c) const {
    return binv_[static_cast<std::size_t>(r) * m_ + c];
  }
  double& binv(int r, int c) { return binv_[static_cast<std::size_t>(r) * m_ + c]; }

  LpStatus run(long iter_limit) {
    init_basis();
    for (int j = 0; j < N_; ++j) cost_[j] = j >= n_ + m_ ? 1.0 : 0.0;
    LpStatus st = iterate(iter_limit, /*phase1=*/true);
    if (st != LpStatus::optimal) return st;
    double infeas = 0;
    for (int j = n_ + m_; j < N_; ++j) infeas += std::abs(x_[j]);
    if (infeas > 1e-6) return LpStatus::infeasible;

    for (int j = 0; j < N_; ++j) cost_[j] = j < n_ ? obj_[j] : 0.0;
    for (int j = n_ + m_; j < N_; ++j) {
      lo_[j] = 0;
      up_[j] = 0;
      if (state_[j] != kBasic) {
        state_[j] = kAtLower;
        x_[j] = 0;
      }
    }
    return iterate(iter_limit, /*phase1=*/false);
  }

  void init_basis() {
    x_.assign(N_, 0.0);
    state_.assign(N_, kAtLower);
    basic_.assign(m_, 0);

    for (int j = 0; j < n_ + m_; ++j) {
      if (lo_[j] != -kInf) {
        x_[j] = lo_[j];
        state_[j] = kAtLower;
      } else if (up_[j] != kInf) {
        x_[j] = up_[j];
        state_[j] = kAtUpper;
      } else {
        x_[j] = 0;
        state_[j] = kAtLower;  // free variable resting at zero
      }
    }
    std::vector<double> activity(m_, 0.0);
    for (int j = 0; j < n_ + m_; ++j)
      if (x_[j] != 0)
        for (const Entry& e : cols_[j]) activity[e.row] += e.coeff * x_[j];
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const int t = n_ + m_ + r;
      const double resid = -activity[r];
      const double sigma = resid >= 0 ? 1.0 : -1.0;
      cols_[t] = {{r, sigma}};
      lo_[t] = 0;
      up_[t] = kInf;
      x_[t] = std::abs(resid);
      state_[t] = kBasic;
      basic_[r] = t;
      binv(r, r) = sigma;
    }
  }

  std::vector<double> ftran(int j) const {
    std::vector<double> d(m_, 0.0);
    for (const Entry& e : cols_[j])
      for (int p = 0; p < m_; ++p) d[p] += binv(p, e.row) * e.coeff;
    return d;
  }

  std::vector<double> dual_prices() const {
    std::vector<double> y(m_, 0.0);
    for (int p = 0; p < m_; ++p) {
      const double cb = cost_[basic_[p]];
      if (cb == 0) continue;
      for (int k = 0; k < m_; ++k) y[k] += cb * binv(p, k);
    }
    return y;
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double rc = cost_[j];
    for (const Entry& e : cols_[j]) rc -= y[e.row] * e.coeff;
    return rc;
  }

  bool refactorize() {
    std::vector<double> B(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int p = 0; p < m_; ++p)
      for (const Entry& e : cols_[basic_[p]])
        B[static_cast<std::size_t>(e.row) * m_ + p] = e.coeff;
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) inv[static_cast<std::size_t>(r) * m_ + r] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int piv = -1;
      double best = 1e-11;
      for (int r = c; r < m_; ++r) {
        const double v = std::abs(B[static_cast<std::size_t>(r) * m_ + c]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (piv < 0) return false;
      if (piv != c)
        for (int k = 0; k < m_; ++k) {
          std::swap(B[static_cast<std::size_t>(piv) * m_ + k],
                    B[static_cast<std::size_t>(c) * m_ + k]);
          std::swap(inv[static_cast<std::size_t>(piv) * m_ + k],
                    inv[static_cast<std::size_t>(c) * m_ + k]);
        }
      const double pv = B[static_cast<std::size_t>(c) * m_ + c];
      for (int k = 0; k < m_; ++k) {
        B[static_cast<std::size_t>(c) * m_ + k] /= pv;
        inv[static_cast<std::size_t>(c) * m_ + k] /= pv;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = B[static_cast<std::size_t>(r) * m_ + c];
        if (f == 0) continue;
        for (int k = 0; k < m_; ++k) {
          B[static_cast<std::size_t>(r) * m_ + k] -=
              f * B[static_cast<std::size_t>(c) * m_ + k];
          inv[static_cast<std::size_t>(r) * m_ + k] -=
              f * inv[static_cast<std::size_t>(c) * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    recompute_basics();
    return true;
  }

  void recompute_basics() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == kBasic || x_[j] == 0) continue;
      for (const Entry& e : cols_[j]) rhs[e.row] -= e.coeff * x_[j];
    }
    for (int p = 0; p < m_; ++p) {
      double v = 0;
      for (int k = 0; k < m_; ++k) v += binv(p, k) * rhs[k];
      x_[basic_[p]] = v;
    }
  }

  // Two-pass Harris ratio test. Pass 1 finds the largest step that keeps
  // every basic variable within a whisker of its bound; pass 2 picks the
  // largest pivot among rows that bind within that step.
  struct Ratio {
    double t = kInf;  // step for the entering variable
    int leave = -1;   // basis position, -1 = bound flip
    double snap = 0;  // bound the leaving variable lands on
    bool unbounded = false;
  };

  Ratio ratio_test(const std::vector<double>& d, double dir, double span) const {
    Ratio out;
    double t_max = span;
    for (int p = 0; p < m_; ++p) {
      const double deff = dir * d[p];
      if (std::abs(deff) < 1e-11) continue;
      const int bv = basic_[p];
      if (deff > 0) {
        if (lo_[bv] == -kInf) continue;
        const double slack = 1e-10 * (1 + std::abs(lo_[bv]));
        t_max = std::min(t_max, std::max(0.0, (x_[bv] - lo_[bv] + slack) / deff));
      } else {
        if (up_[bv] == kInf) continue;
        const double slack = 1e-10 * (1 + std::abs(up_[bv]));
        t_max = std::min(t_max, std::max(0.0, (x_[bv] - up_[bv] - slack) / deff));
      }
    }
    if (t_max == kInf) {
      out.unbounded = true;
      return out;
    }

    double best_pivot = 0;
    for (int p = 0; p < m_; ++p) {
      const double deff = dir * d[p];
      if (std::abs(deff) < 1e-11) continue;
      const int bv = basic_[p];
      double t_p, snap;
      if (deff > 0) {
        if (lo_[bv] == -kInf) continue;
        t_p = (x_[bv] - lo_[bv]) / deff;
        snap = lo_[bv];
      } else {
        if (up_[bv] == kInf) continue;
        t_p = (x_[bv] - up_[bv]) / deff;
        snap = up_[bv];
      }
      if (t_p > t_max) continue;
      const double piv = std::abs(deff);
      if (piv > best_pivot + 1e-12 ||
          (out.leave >= 0 && std::abs(piv - best_pivot) <= 1e-12 &&
           bv < basic_[out.leave])) {
        best_pivot = piv;
        out.leave = p;
        out.snap = snap;
        out.t = std::max(0.0, t_p);
      }
    }
    if (out.leave < 0) out.t = span;  // bound flip
    return out;
  }

  LpStatus iterate(long iter_limit, bool phase1) {
    const double rc_tol = 1e-9;
    const long refactor_every = paranoid_ ? 16 : 64;
    long since_refactor = 0;
    long stall = 0;
    int verify_failures = 0;
    bool bland = paranoid_;
    double last_obj = current_cost();

    for (long iter = 0; iter < iter_limit; ++iter) {
      const std::vector<double> y = dual_prices();

      int enter = -1;
      double best_score = rc_tol;
      for (int j = 0; j < N_; ++j) {
        if (state_[j] == kBasic || lo_[j] == up_[j]) continue;
        const double rc = reduced_cost(j, y);
        double score = 0;
        if (state_[j] == kAtLower && rc < -rc_tol)
          score = -rc;
        else if (state_[j] == kAtUpper && rc > rc_tol)
          score = rc;
        else
          continue;
        if (bland) {
          enter = j;
          break;
        }
        if (score > best_score) {
          best_score = score;
          enter = j;
        }
      }

      if (enter < 0) {
        // Claimed optimal: rebuild the inverse from scratch and re-verify so
        // pivot drift cannot leak into the reported solution.
        if (!refactorize()) return LpStatus::iter_limit;
        if (verify_optimal(rc_tol)) return LpStatus::optimal;
        since_refactor = 0;
        if (++verify_failures >= 3) return LpStatus::iter_limit;  // restart upstream
        bland = true;
        continue;
      }

      const double dir = state_[enter] == kAtLower ? 1.0 : -1.0;
      std::vector<double> d = ftran(enter);
      const double span = (up_[enter] == kInf || lo_[enter] == -kInf)
                              ? kInf
                              : up_[enter] - lo_[enter];
      Ratio r = ratio_test(d, dir, span);

      // A tiny pivot right after a long update streak is usually drift; a
      // fresh factorization gives the ratio test better numbers.
      if (r.leave >= 0 && std::abs(dir * d[r.leave]) < 1e-7 && since_refactor > 0) {
        if (!refactorize()) return LpStatus::iter_limit;
        since_refactor = 0;
        d = ftran(enter);
        r = ratio_test(d, dir, span);
      }

      if (r.unbounded) {
        if (phase1) return LpStatus::iter_limit;  // phase 1 is always bounded
        return LpStatus::unbounded;
      }

      const double step = dir * r.t;
      if (r.leave < 0) {
        for (int p = 0; p < m_; ++p) x_[basic_[p]] -= d[p] * step;
        x_[enter] = state_[enter] == kAtLower ? up_[enter] : lo_[enter];
        state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
      } else {
        const int leaving = basic_[r.leave];
        for (int p = 0; p < m_; ++p)
          if (p != r.leave) x_[basic_[p]] -= d[p] * step;
        x_[leaving] = r.snap;
        state_[leaving] = r.snap == lo_[leaving] ? kAtLower : kAtUpper;

        x_[enter] = x_[enter] + step;
        state_[enter] = kBasic;
        basic_[r.leave] = enter;

        const double pivot = d[r.leave];
        for (int k = 0; k < m_; ++k) binv(r.leave, k) /= pivot;
        for (int p = 0; p < m_; ++p) {
          if (p == r.leave || d[p] == 0) continue;
          const double f = d[p];
          for (int k = 0; k < m_; ++k) binv(p, k) -= f * binv(r.leave, k);
        }
      }

      if (++since_refactor >= refactor_every) {
        if (!refactorize()) return LpStatus::iter_limit;
        since_refactor = 0;
      }

      const double obj_now = current_cost();
      if (obj_now < last_obj - 1e-12) {
        last_obj = obj_now;
        stall = 0;
      } else if (++stall > 3L * (m_ + 16)) {
        bland = true;  // anti-cycling; sticky for the rest of the phase
      }
    }
    return LpStatus::iter_limit;
  }

  double current_cost() const {
    double z = 0;
    for (int j = 0; j < N_; ++j)
      if (cost_[j] != 0 && x_[j] != 0) z += cost_[j] * x_[j];
    return z;
  }

  bool verify_optimal(double rc_tol) {
    for (int p = 0; p < m_; ++p) {
      const int bv = basic_[p];
      const double slack = 1e-6 * (1 + std::abs(x_[bv]));
      if (lo_[bv] != -kInf && x_[bv] < lo_[bv] - slack) return false;
      if (up_[bv] != kInf && x_[bv] > up_[bv] + slack) return false;
    }
    const std::vector<double> y = dual_prices();
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == kBasic || lo_[j] == up_[j]) continue;
      const double rc = reduced_cost(j, y);
      if (state_[j] == kAtLower && rc < -10 * rc_tol) return false;
      if (state_[j] == kAtUpper && rc > 10 * rc_tol) return false;
    }
    return true;
  }
};

}  // namespace lps

inline LpSolution solve_lp(const LpProblem& p, long iter_limit = 100000) {
  lps::Solver s(p);
  return s.solve(iter_limit);
}

}  // namespace eevipn
