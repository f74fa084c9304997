#pragma once

#include "secantlink/core.hpp"
#include "secantlink/curve.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace secantlink {

/// Forward-mode scalar with N partial derivatives.
template <int N>
using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, N, 1>>;

/// A square or underdetermined system F: R^N -> R^M evaluated with its
/// Jacobian. The functor is templated over the scalar type.
template <int M, int N, typename F>
void eval_with_jacobian(const F& f, const Eigen::Matrix<double, N, 1>& x, Eigen::Matrix<double, M, 1>& value,
                        Eigen::Matrix<double, M, N>& jac) {
  using D = Dual<N>;
  Eigen::Matrix<D, N, 1> xd;
  for (int i = 0; i < N; ++i) xd(i) = D(x(i), N, i);
  Eigen::Matrix<D, M, 1> r = f(xd);
  for (int i = 0; i < M; ++i) {
    value(i) = r(i).value();
    if (r(i).derivatives().size() == N) {
      jac.row(i) = r(i).derivatives().transpose();
    } else {
      jac.row(i).setZero();
    }
  }
}

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-10;
  double armijo = 1e-4;
  int max_backtrack = 30;
  int stall_window = 0;      // if positive, give up when |F| has not
  double stall_ratio = 0.5;  // shrunk by stall_ratio over that many steps
};

template <int N>
struct NewtonResult {
  Eigen::Matrix<double, N, 1> x;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  double cond = std::numeric_limits<double>::infinity();  // Jacobian condition number at x
  double min_singular = 0;
};

/// Damped Newton with Armijo backtracking on |F|^2. The step is the minimum
/// norm least-squares solution so rank-deficient Jacobians still make
/// progress toward the solution set. Parameters are reduced mod 1 afterwards
/// by the caller when they live on a circle.
template <int N, typename F>
NewtonResult<N> damped_newton(const F& f, Eigen::Matrix<double, N, 1> x, const NewtonOptions& opt = {}) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  NewtonResult<N> out;
  Vec r;
  Mat j;
  auto safe_eval = [&](const Vec& y, Vec& rv, Mat& jv) -> bool {
    try {
      eval_with_jacobian<N, N>(f, y, rv, jv);
    } catch (const Error&) {
      return false;
    }
    return rv.allFinite() && jv.allFinite();
  };
  if (!safe_eval(x, r, j)) return out;
  std::vector<double> history;
  for (int it = 0; it < opt.max_iter; ++it) {
    out.iterations = it;
    double norm = r.norm();
    if (norm < opt.tol) break;
    if (opt.stall_window > 0) {
      history.push_back(norm);
      if (it >= opt.stall_window && norm > opt.stall_ratio * history[it - opt.stall_window]) break;
    }
    Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    Vec step = -svd.solve(r);
    if (!step.allFinite()) return out;
    // cap the step; curve parameters live in [0,1)
    double sn = step.norm();
    if (sn > 0.25) step *= 0.25 / sn;
    double lambda = 1.0;
    Vec rn;
    Mat jn;
    bool accepted = false;
    for (int b = 0; b < opt.max_backtrack; ++b) {
      Vec y = x + lambda * step;
      if (safe_eval(y, rn, jn) && rn.squaredNorm() <= (1.0 - 2.0 * opt.armijo * lambda) * norm * norm) {
        x = y;
        r = rn;
        j = jn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  out.x = x;
  out.residual = r.norm();
  out.converged = out.residual < opt.tol;
  Eigen::JacobiSVD<Mat> svd(j);
  auto sv = svd.singularValues();
  out.min_singular = sv(N - 1);
  out.cond = sv(N - 1) > 0 ? sv(0) / sv(N - 1) : std::numeric_limits<double>::infinity();
  return out;
}

inline bool rank_deficient(double min_singular, double max_singular, double rel = 1e-6) {
  return min_singular <= rel * std::max(1.0, max_singular);
}

/// Whether the zero set of a square system continues as a curve through the
/// root x: step along the Jacobian null direction, re-solve, and require a
/// distinct rank-deficient root nearby, three times in one direction.
template <int N, typename F>
bool continues_as_family(const F& f, const Eigen::Matrix<double, N, 1>& x, const NewtonOptions& opt,
                         double h = 0.01) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  Vec val;
  Mat j;
  auto null_dir = [&](const Vec& y, double* smin, double* smax) {
    eval_with_jacobian<N, N>(f, y, val, j);
    Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeFullV);
    *smin = svd.singularValues()(N - 1);
    *smax = svd.singularValues()(0);
    return Vec(svd.matrixV().col(N - 1));
  };
  double smin, smax;
  Vec v0 = null_dir(x, &smin, &smax);
  if (!rank_deficient(smin, smax)) return false;
  for (double step : {h, -h}) {
    Vec y = x, v = v0;
    bool ok = true;
    for (int k = 0; k < 3 && ok; ++k) {
      auto res = damped_newton<N>(f, Vec(y + step * v), opt);
      if (!res.converged || (res.x - y).norm() < 0.3 * h) {
        ok = false;
        break;
      }
      Vec nv = null_dir(res.x, &smin, &smax);
      if (!rank_deficient(smin, smax)) {
        ok = false;
        break;
      }
      v = nv.dot(v) < 0 ? Vec(-nv) : nv;
      y = res.x;
    }
    if (ok) return true;
  }
  return false;
}

/// Unit null vector of an M x (M+1) Jacobian, via SVD.
template <int M>
Eigen::Matrix<double, M + 1, 1> null_vector(const Eigen::Matrix<double, M, M + 1>& j, double* gap = nullptr) {
  Eigen::Matrix<double, M + 1, M + 1> sq = Eigen::Matrix<double, M + 1, M + 1>::Zero();
  sq.template topRows<M>() = j;
  Eigen::JacobiSVD<Eigen::Matrix<double, M + 1, M + 1>> svd(sq, Eigen::ComputeFullV);
  if (gap) *gap = svd.singularValues()(M - 1);  // smallest nonzero singular value of j
  return svd.matrixV().col(M);
}

/// Run `work(i)` for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots so the outcome is independent of scheduling.
inline void parallel_for(int n, int threads, const std::function<void(int)>& work) {
  if (threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

inline int default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace secantlink
