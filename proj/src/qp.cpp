#include "rhcp/qp.hpp"

#include <cmath>
#include <vector>

namespace rhcp {
namespace {

// ---------------------------------------------------------------------------
// Goldfarb-Idnani dual active-set method on the form
//   min 1/2 x^T G x + g0^T x  s.t.  CE^T x + ce0 = 0,  CI^T x + ci0 >= 0.
// Equalities are added to the active set first and never leave it.
// ---------------------------------------------------------------------------

struct GiWork {
  Eigen::MatrixXd J, R;
  Eigen::VectorXd d, z, r, np, u, x;
  std::vector<int> active;       // indices into [0, p + m)
  std::vector<int> inactive_ok;  // scratch for excluded constraints
  int iq = 0;
  double R_norm = 1.0;
};

void compute_d(GiWork& w) { w.d.noalias() = w.J.transpose() * w.np; }

void update_z(GiWork& w, int n) {
  w.z.setZero();
  for (int k = w.iq; k < n; ++k) w.z.noalias() += w.J.col(k) * w.d(k);
}

void update_r(GiWork& w) {
  for (int i = w.iq - 1; i >= 0; --i) {
    double sum = w.d(i);
    for (int k = i + 1; k < w.iq; ++k) sum -= w.R(i, k) * w.r(k);
    w.r(i) = sum / w.R(i, i);
  }
}

bool add_constraint(GiWork& w, int n) {
  // Givens rotations push d's tail to zero so [R; d_head] stays triangular.
  for (int j = n - 1; j >= w.iq + 1; --j) {
    double cc = w.d(j - 1), ss = w.d(j);
    const double h = std::hypot(cc, ss);
    if (h < 1e-300) continue;
    cc /= h;
    ss /= h;
    w.d(j) = 0.0;
    if (cc < 0.0) {
      w.d(j - 1) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      w.d(j - 1) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = w.J(k, j - 1), t2 = w.J(k, j);
      w.J(k, j - 1) = t1 * cc + t2 * ss;
      w.J(k, j) = xny * (t1 + w.J(k, j - 1)) - t2;
    }
  }
  ++w.iq;
  for (int i = 0; i < w.iq; ++i) w.R(i, w.iq - 1) = w.d(i);
  if (std::abs(w.d(w.iq - 1)) <= 1e-12 * w.R_norm) {
    --w.iq;  // linearly dependent
    return false;
  }
  w.R_norm = std::max(w.R_norm, std::abs(w.d(w.iq - 1)));
  return true;
}

void delete_constraint(GiWork& w, int n, int p, int l) {
  int qq = -1;
  for (int i = p; i < w.iq; ++i)
    if (w.active[i] == l) {
      qq = i;
      break;
    }
  for (int i = qq; i < w.iq - 1; ++i) {
    w.active[i] = w.active[i + 1];
    w.u(i) = w.u(i + 1);
    w.R.col(i) = w.R.col(i + 1);
  }
  w.u(w.iq - 1) = w.u(w.iq);
  w.active.resize(w.iq - 1);
  --w.iq;
  if (w.iq == 0) return;
  for (int j = qq; j < w.iq; ++j) {
    double cc = w.R(j, j), ss = w.R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h < 1e-300) continue;
    cc /= h;
    ss /= h;
    if (cc < 0.0) {
      w.R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      w.R(j, j) = h;
    }
    w.R(j + 1, j) = 0.0;
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < w.iq; ++k) {
      const double t1 = w.R(j, k), t2 = w.R(j + 1, k);
      w.R(j, k) = t1 * cc + t2 * ss;
      w.R(j + 1, k) = xny * (t1 + w.R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = w.J(k, j), t2 = w.J(k, j + 1);
      w.J(k, j) = t1 * cc + t2 * ss;
      w.J(k, j + 1) = xny * (w.J(k, j) + t1) - t2;
    }
  }
}

QpResult gi_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& g0, const Eigen::MatrixXd& CE,
                  const Eigen::VectorXd& ce0, const Eigen::MatrixXd& CI,
                  const Eigen::VectorXd& ci0, double tol) {
  const int n = static_cast<int>(G.rows());
  const int p = static_cast<int>(CE.cols());
  const int m = static_cast<int>(CI.cols());

  QpResult res;
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    res.status = SolveStatus::NotPositiveDefinite;
    return res;
  }

  GiWork w;
  // J = L^{-T}: solve L^T J = I.
  w.J = llt.matrixL().toDenseMatrix().transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(n, n));
  w.R = Eigen::MatrixXd::Zero(n, n);
  w.d.resize(n);
  w.z.resize(n);
  w.r = Eigen::VectorXd::Zero(n);
  w.np.resize(n);
  w.u = Eigen::VectorXd::Zero(p + m + 1);
  w.x = -llt.solve(g0);
  w.active.clear();

  // Equality constraints enter the active set unconditionally.
  for (int i = 0; i < p; ++i) {
    w.np = CE.col(i);
    compute_d(w);
    update_z(w, n);
    update_r(w);
    const double resid = w.np.dot(w.x) + ce0(i);
    double t2 = 0.0;
    const double z2 = w.z.squaredNorm();
    if (z2 > 1e-24) t2 = -resid / w.z.dot(w.np);
    w.x += t2 * w.z;
    for (int k = 0; k < w.iq; ++k) w.u(k) -= t2 * w.r(k);
    w.u(w.iq) = t2;
    w.active.push_back(i);
    if (!add_constraint(w, n)) {
      // Dependent equality: consistent iff the residual vanished.
      w.active.pop_back();
      if (std::abs(w.np.dot(w.x) + ce0(i)) > 1e-7) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
    }
  }

  std::vector<char> is_active(m, 0);
  const int max_iter = 100 * (n + m + p + 10);
  int iter = 0;
  int ip = -1;

  while (true) {
    if (++iter > max_iter) {
      res.status = SolveStatus::MaxIterations;
      return res;
    }
    // Step 1: pick the most violated inactive inequality.
    double worst = -tol;
    ip = -1;
    for (int i = 0; i < m; ++i) {
      if (is_active[i]) continue;
      const double s = CI.col(i).dot(w.x) + ci0(i);
      if (s < worst) {
        worst = s;
        ip = i;
      }
    }
    if (ip < 0) {
      res.status = SolveStatus::Optimal;
      res.u = w.x;
      res.objective = 0.5 * w.x.dot(G * w.x) + g0.dot(w.x);
      return res;
    }

    w.np = CI.col(ip);
    w.u(w.iq) = 0.0;
    double s_ip = CI.col(ip).dot(w.x) + ci0(ip);

    while (true) {
      if (++iter > max_iter) {
        res.status = SolveStatus::MaxIterations;
        return res;
      }
      compute_d(w);
      update_z(w, n);
      update_r(w);

      // Partial step: smallest ratio over active inequalities with r > 0.
      double t1 = kInf;
      int l = -1;
      for (int k = p; k < w.iq; ++k) {
        if (w.r(k) > 1e-14) {
          const double ratio = w.u(k) / w.r(k);
          if (ratio < t1) {
            t1 = ratio;
            l = w.active[k];
          }
        }
      }
      // Full step to satisfy the new constraint.
      double t2 = kInf;
      const bool z_nonzero = w.z.squaredNorm() > std::numeric_limits<double>::epsilon();
      if (z_nonzero) t2 = -s_ip / w.z.dot(w.np);

      const double t = std::min(t1, t2);
      if (!(t < kInf)) {
        res.status = SolveStatus::Infeasible;
        return res;
      }

      if (!z_nonzero) {
        // Dual step only.
        for (int k = 0; k < w.iq; ++k) w.u(k) -= t * w.r(k);
        w.u(w.iq) += t;
        is_active[l - p] = 0;
        delete_constraint(w, n, p, l);
        continue;
      }

      w.x += t * w.z;
      for (int k = 0; k < w.iq; ++k) w.u(k) -= t * w.r(k);
      w.u(w.iq) += t;

      if (t == t2) {
        // Full step: the chosen constraint becomes active.
        w.active.push_back(p + ip);
        if (add_constraint(w, n)) {
          is_active[ip] = 1;
        } else {
          w.active.pop_back();
        }
        break;  // back to step 1
      }
      // Partial step: drop the blocking constraint and retry.
      is_active[l - p] = 0;
      delete_constraint(w, n, p, l);
      s_ip = CI.col(ip).dot(w.x) + ci0(ip);
    }
  }
}

}  // namespace

QpResult solve_qp(const QpProblem& prob, double tol) {
  const int n = static_cast<int>(prob.H.rows());
  const int n_eq = static_cast<int>(prob.C.rows());
  const int n_in = static_cast<int>(prob.A.rows());

  Eigen::MatrixXd CE(n, n_eq);
  Eigen::VectorXd ce0(n_eq);
  for (int i = 0; i < n_eq; ++i) {
    CE.col(i) = prob.C.row(i).transpose();
    ce0(i) = -prob.d(i);
  }

  int n_bound = 0;
  for (int i = 0; i < n; ++i) {
    if (prob.lb.size() && prob.lb(i) > -kInf) ++n_bound;
    if (prob.ub.size() && prob.ub(i) < kInf) ++n_bound;
  }
  Eigen::MatrixXd CI(n, n_in + n_bound);
  Eigen::VectorXd ci0(n_in + n_bound);
  for (int i = 0; i < n_in; ++i) {
    CI.col(i) = -prob.A.row(i).transpose();
    ci0(i) = prob.b(i);
  }
  int k = n_in;
  for (int i = 0; i < n; ++i) {
    if (prob.lb.size() && prob.lb(i) > -kInf) {
      CI.col(k).setZero();
      CI(i, k) = 1.0;
      ci0(k) = -prob.lb(i);
      ++k;
    }
    if (prob.ub.size() && prob.ub(i) < kInf) {
      CI.col(k).setZero();
      CI(i, k) = -1.0;
      ci0(k) = prob.ub(i);
      ++k;
    }
  }
  return gi_solve(prob.H, prob.g, CE, ce0, CI, ci0, tol);
}

// ---------------------------------------------------------------------------
// Two-phase primal simplex with Bland's rule on the standard form
//   min c~^T y  s.t.  T y = b~ (b~ >= 0), y >= 0.
// ---------------------------------------------------------------------------

namespace {

struct Standardized {
  Eigen::MatrixXd T;     // m x nv
  Eigen::VectorXd rhs;   // m
  Eigen::VectorXd cost;  // nv
  // Mapping back: x_i = shift_i + sign_i * y(col_i) [- y(col_neg_i) for free vars]
  std::vector<double> shift, sign;
  std::vector<int> col, col_neg;
};

constexpr double kPivTol = 1e-9;

SolveStatus simplex_run(Eigen::MatrixXd& T, Eigen::VectorXd& rhs, const Eigen::VectorXd& cost,
                        std::vector<int>& basis, double& objective, Eigen::VectorXd& y_out,
                        const std::vector<char>& allowed) {
  const int m = static_cast<int>(T.rows());
  const int nv = static_cast<int>(T.cols());
  Eigen::VectorXd reduced(nv);
  const int max_iter = 2000 + 40 * (m + nv);

  for (int iter = 0; iter < max_iter; ++iter) {
    // Reduced costs via the basis cost row: z_j = c_j - c_B^T B^-1 a_j, with the
    // tableau kept in B^-1-applied form so B^-1 a_j is just T.col(j).
    Eigen::VectorXd cb(m);
    for (int i = 0; i < m; ++i) cb(i) = cost(basis[i]);
    reduced = cost - T.transpose() * cb;

    int enter = -1;
    for (int j = 0; j < nv; ++j) {  // Bland: first improving index
      if (!allowed[j]) continue;
      if (reduced(j) < -kPivTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) {
      objective = cb.dot(rhs);
      y_out = Eigen::VectorXd::Zero(nv);
      for (int i = 0; i < m; ++i) y_out(basis[i]) = rhs(i);
      return SolveStatus::Optimal;
    }

    int leave = -1;
    double best_ratio = kInf;
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > kPivTol) {
        const double ratio = rhs(i) / T(i, enter);
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return SolveStatus::Unbounded;

    // Pivot.
    const double piv = T(leave, enter);
    T.row(leave) /= piv;
    rhs(leave) /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = T(i, enter);
      if (std::abs(f) > 1e-14) {
        T.row(i) -= f * T.row(leave);
        rhs(i) -= f * rhs(leave);
      }
    }
    basis[leave] = enter;
  }
  return SolveStatus::MaxIterations;
}

}  // namespace

LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A_ub,
                  const Eigen::VectorXd& b_ub, const Eigen::MatrixXd& A_eq,
                  const Eigen::VectorXd& b_eq, const Eigen::VectorXd& lb,
                  const Eigen::VectorXd& ub) {
  const int n = static_cast<int>(c.size());
  const int m_ub = static_cast<int>(A_ub.rows());
  const int m_eq = static_cast<int>(A_eq.rows());

  LpResult res;

  // Variable transform to y >= 0.
  Standardized s;
  s.shift.assign(n, 0.0);
  s.sign.assign(n, 1.0);
  s.col.assign(n, -1);
  s.col_neg.assign(n, -1);
  int nv = 0;
  std::vector<std::pair<int, double>> upper_rows;  // (var, range) for finite two-sided bounds
  for (int i = 0; i < n; ++i) {
    const double lo = lb.size() ? lb(i) : -kInf;
    const double hi = ub.size() ? ub(i) : kInf;
    if (lo > -kInf) {
      s.shift[i] = lo;
      s.sign[i] = 1.0;
      s.col[i] = nv++;
      if (hi < kInf) upper_rows.push_back({i, hi - lo});
    } else if (hi < kInf) {
      s.shift[i] = hi;
      s.sign[i] = -1.0;
      s.col[i] = nv++;
    } else {
      s.col[i] = nv++;
      s.col_neg[i] = nv++;
    }
  }

  const int m = m_ub + m_eq + static_cast<int>(upper_rows.size());
  const int n_slack = m_ub + static_cast<int>(upper_rows.size());
  const int total = nv + n_slack + m;  // + artificials (one per row, many unused)

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, total);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);

  auto fill_row = [&](int row, const Eigen::RowVectorXd& a, double b) {
    double acc = b;
    for (int i = 0; i < n; ++i) {
      if (a(i) == 0.0) continue;
      acc -= a(i) * s.shift[i];
      T(row, s.col[i]) += a(i) * s.sign[i];
      if (s.col_neg[i] >= 0) T(row, s.col_neg[i]) -= a(i);
    }
    rhs(row) = acc;
  };

  for (int i = 0; i < m_ub; ++i) {
    fill_row(i, A_ub.row(i), b_ub(i));
    T(i, nv + i) = 1.0;  // slack
  }
  for (int k = 0; k < static_cast<int>(upper_rows.size()); ++k) {
    const int row = m_ub + k;
    T(row, s.col[upper_rows[k].first]) = 1.0;
    T(row, nv + m_ub + k) = 1.0;
    rhs(row) = upper_rows[k].second;
  }
  for (int i = 0; i < m_eq; ++i) fill_row(m_ub + static_cast<int>(upper_rows.size()) + i,
                                          A_eq.row(i), b_eq(i));

  // Normalize rhs >= 0 (flips slack signs too, so those rows need artificials).
  for (int i = 0; i < m; ++i) {
    if (rhs(i) < 0.0) {
      T.row(i) = -T.row(i);
      rhs(i) = -rhs(i);
    }
  }

  // Phase 1 basis: slack where usable, artificial otherwise.
  std::vector<int> basis(m, -1);
  Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(total);
  std::vector<char> allowed(total, 1);
  int n_art = 0;
  for (int i = 0; i < m; ++i) {
    int slack_col = -1;
    if (i < n_slack) slack_col = nv + i;
    if (slack_col >= 0 && T(i, slack_col) == 1.0) {
      basis[i] = slack_col;
    } else {
      const int art = nv + n_slack + i;
      T(i, art) = 1.0;
      phase1_cost(art) = 1.0;
      basis[i] = art;
      ++n_art;
    }
  }
  for (int i = 0; i < m; ++i) {
    const int art = nv + n_slack + i;
    if (phase1_cost(art) == 0.0) allowed[art] = 0;  // unused artificial columns
  }

  Eigen::VectorXd y;
  double obj = 0.0;
  if (n_art > 0) {
    const SolveStatus st = simplex_run(T, rhs, phase1_cost, basis, obj, y, allowed);
    if (st != SolveStatus::Optimal) {
      res.status = st == SolveStatus::Unbounded ? SolveStatus::Infeasible : st;
      return res;
    }
    if (obj > 1e-8) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    // Pivot any artificial still in the basis out (or its row is redundant).
    for (int i = 0; i < m; ++i) {
      if (basis[i] >= nv + n_slack) {
        int enter = -1;
        for (int j = 0; j < nv + n_slack; ++j) {
          if (std::abs(T(i, j)) > kPivTol) {
            enter = j;
            break;
          }
        }
        if (enter >= 0) {
          const double piv = T(i, enter);
          T.row(i) /= piv;
          rhs(i) /= piv;
          for (int k2 = 0; k2 < m; ++k2) {
            if (k2 == i) continue;
            const double f = T(k2, enter);
            if (std::abs(f) > 1e-14) {
              T.row(k2) -= f * T.row(i);
              rhs(k2) -= f * rhs(i);
            }
          }
          basis[i] = enter;
        }
      }
    }
  }

  // Phase 2: artificials barred.
  for (int i = 0; i < m; ++i) {
    const int art = nv + n_slack + i;
    allowed[art] = 0;
  }
  for (int i = 0; i < n; ++i) {
    cost(s.col[i]) += c(i) * s.sign[i];
    if (s.col_neg[i] >= 0) cost(s.col_neg[i]) -= c(i);
  }
  const SolveStatus st = simplex_run(T, rhs, cost, basis, obj, y, allowed);
  if (st != SolveStatus::Optimal) {
    res.status = st;
    return res;
  }

  res.x.resize(n);
  for (int i = 0; i < n; ++i) {
    double v = s.shift[i] + s.sign[i] * y(s.col[i]);
    if (s.col_neg[i] >= 0) v -= y(s.col_neg[i]);
    res.x(i) = v;
  }
  res.objective = c.dot(res.x);
  res.status = SolveStatus::Optimal;
  return res;
}

}  // namespace rhcp
