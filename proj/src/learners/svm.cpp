#include "lobster/learners/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lobster/common/rng.hpp"
#include "lobster/learners/common.hpp"

namespace lobster::learners {
namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Lazily materialised kernel rows.
class KernelRows {
 public:
  KernelRows(const Matrix& X, double gamma) : X_(X), gamma_(gamma), rows_(X.rows()) {
    sq_norm_ = X.rowwise().squaredNorm();
  }

  const std::vector<double>& row(Eigen::Index i) {
    auto& r = rows_[static_cast<std::size_t>(i)];
    if (r.empty()) {
      const Eigen::Index n = X_.rows();
      r.resize(static_cast<std::size_t>(n));
      const Vector dots = X_ * X_.row(i).transpose();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d2 = std::max(0.0, sq_norm_(i) + sq_norm_(j) - 2.0 * dots(j));
        r[static_cast<std::size_t>(j)] = std::exp(-gamma_ * d2);
      }
      r[static_cast<std::size_t>(i)] = 1.0;
    }
    return r;
  }

 private:
  const Matrix& X_;
  double gamma_;
  Vector sq_norm_;
  std::vector<std::vector<double>> rows_;
};

SvmModel model_from_solution(const SvmParams& params, double gamma, const Matrix& X,
                             const std::vector<int>& signs, const SmoSolution& sol) {
  SvmModel m;
  m.params = params;
  m.gamma = gamma;
  m.bias = sol.bias;
  m.iterations = sol.iterations;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha(i) > 0.0) sv.push_back(i);
  }
  m.support.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
  m.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    const auto r = static_cast<Eigen::Index>(s);
    m.support.row(r) = X.row(sv[s]);
    m.dual_coef(r) = sol.alpha(sv[s]) * signs[static_cast<std::size_t>(sv[s])];
  }
  return m;
}

std::vector<int> to_signs(const Labels& y) {
  std::vector<int> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s[i] = y[i] == 1 ? 1 : -1;
  return s;
}

}  // namespace

void validate(const SvmParams& params) {
  if (!(params.C > 0.0)) throw ValidationError("SVM C must be positive");
  if (params.kernel != "rbf") throw ValidationError("only the rbf kernel is supported");
  if (params.gamma.mode == SvmGamma::Mode::kValue && !(params.gamma.value > 0.0)) {
    throw ValidationError("SVM gamma must be positive");
  }
  if (!(params.tol > 0.0)) throw ValidationError("SVM tol must be positive");
  if (params.max_iter < 0) throw ValidationError("SVM max_iter must be >= 0");
  if (params.platt_folds < 2) throw ValidationError("Platt scaling needs at least 2 folds");
}

double resolve_gamma(const SvmGamma& gamma, const Matrix& X) {
  const auto d = static_cast<double>(X.cols());
  switch (gamma.mode) {
    case SvmGamma::Mode::kAuto:
      return 1.0 / d;
    case SvmGamma::Mode::kScale: {
      const double mean = X.mean();
      const double var = (X.array() - mean).square().mean();
      return var > 0.0 ? 1.0 / (d * var) : 1.0;
    }
    case SvmGamma::Mode::kValue:
      return gamma.value;
  }
  return 1.0 / d;
}

double rbf_kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                  double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

SmoSolution smo_solve(const Matrix& X, const std::vector<int>& signs, double C, double gamma,
                      double tol, long max_iter) {
  const Eigen::Index n = X.rows();
  const auto un = static_cast<std::size_t>(n);
  if (max_iter <= 0) max_iter = std::max<long>(10'000'000L, 100L * static_cast<long>(n));
  KernelRows K(X, gamma);

  std::vector<double> alpha(un, 0.0);
  std::vector<double> G(un, -1.0);
  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  SmoSolution sol;
  long iter = 0;
  double gap = kInf;
  while (true) {
    double gmax = -kInf;
    std::size_t i = un;
    for (std::size_t t = 0; t < un; ++t) {
      if (signs[t] == 1) {
        if (!upper(t) && -G[t] >= gmax) { gmax = -G[t]; i = t; }
      } else {
        if (!lower(t) && G[t] >= gmax) { gmax = G[t]; i = t; }
      }
    }
    double gmax2 = -kInf;
    std::size_t j = un;
    double best_obj = kInf;
    if (i < un) {
      const auto& Ki = K.row(static_cast<Eigen::Index>(i));
      for (std::size_t t = 0; t < un; ++t) {
        const double Qit = signs[i] * signs[t] * Ki[t];
        if (signs[t] == 1) {
          if (!lower(t)) {
            const double grad_diff = gmax + G[t];
            gmax2 = std::max(gmax2, G[t]);
            if (grad_diff > 0.0) {
              double quad = 1.0 + 1.0 - 2.0 * signs[i] * Qit;
              if (quad <= 0.0) quad = kTau;
              const double obj = -(grad_diff * grad_diff) / quad;
              if (obj <= best_obj) { best_obj = obj; j = t; }
            }
          }
        } else {
          if (!upper(t)) {
            const double grad_diff = gmax - G[t];
            gmax2 = std::max(gmax2, -G[t]);
            if (grad_diff > 0.0) {
              double quad = 1.0 + 1.0 + 2.0 * signs[i] * Qit;
              if (quad <= 0.0) quad = kTau;
              const double obj = -(grad_diff * grad_diff) / quad;
              if (obj <= best_obj) { best_obj = obj; j = t; }
            }
          }
        }
      }
    }
    gap = gmax + gmax2;
    if (i == un || j == un || gap < tol) {
      sol.converged = true;
      break;
    }
    if (iter >= max_iter) break;
    ++iter;

    const auto& Ki = K.row(static_cast<Eigen::Index>(i));
    const auto& Kj = K.row(static_cast<Eigen::Index>(j));
    const double Qij = signs[i] * signs[j] * Ki[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    double& ai = alpha[i];
    double& aj = alpha[j];
    if (signs[i] != signs[j]) {
      double quad = 2.0 + 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = -diff; }
      }
      if (diff > 0.0) {
        if (ai > C) { ai = C; aj = C - diff; }
      } else {
        if (aj > C) { aj = C; ai = C + diff; }
      }
    } else {
      double quad = 2.0 - 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) { ai = C; aj = sum - C; }
      } else {
        if (aj < 0.0) { aj = 0.0; ai = sum; }
      }
      if (sum > C) {
        if (aj > C) { aj = C; ai = sum - C; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = sum; }
      }
    }
    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    for (std::size_t t = 0; t < un; ++t) {
      G[t] += signs[t] * (signs[i] * Ki[t] * dai + signs[j] * Kj[t] * daj);
    }
  }

  // Offset from free vectors, else the midpoint of the feasible interval.
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  int n_free = 0;
  for (std::size_t t = 0; t < un; ++t) {
    const double yG = signs[t] * G[t];
    if (upper(t)) {
      if (signs[t] == -1) ub = std::min(ub, yG); else lb = std::max(lb, yG);
    } else if (lower(t)) {
      if (signs[t] == 1) ub = std::min(ub, yG); else lb = std::max(lb, yG);
    } else {
      ++n_free;
      sum_free += yG;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;

  sol.alpha = Eigen::Map<Vector>(alpha.data(), n);
  sol.bias = -rho;
  sol.iterations = iter;
  sol.final_gap = gap;
  return sol;
}

double kkt_max_violation(const Vector& alpha, const std::vector<int>& signs,
                         const Vector& decision, double C, double tau) {
  const double eps = 1e-12 * C;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double margin = signs[static_cast<std::size_t>(i)] * decision(i);
    double v = 0.0;
    if (alpha(i) <= eps) {
      v = std::max(0.0, (1.0 - tau) - margin);
    } else if (alpha(i) >= C - eps) {
      v = std::max(0.0, margin - (1.0 + tau));
    } else {
      v = std::max(0.0, std::abs(margin - 1.0) - tau);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

std::pair<double, double> platt_fit(const Vector& decision, const Labels& y) {
  const Eigen::Index n = decision.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (int label : y) (label == 1 ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] == 1 ? hi : lo;

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;
  double A = 0.0;
  double B = std::log((prior0 + 1.0) / (prior1 + 1.0));

  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double fApB = decision(i) * a + b;
      const double ti = t[static_cast<std::size_t>(i)];
      if (fApB >= 0.0) f += ti * fApB + std::log1p(std::exp(-fApB));
      else f += (ti - 1.0) * fApB + std::log1p(std::exp(fApB));
    }
    return f;
  };

  double fval = objective(A, B);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double fApB = decision(i) * A + B;
      double p, q;
      if (fApB >= 0.0) {
        p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
        q = 1.0 / (1.0 + std::exp(-fApB));
      } else {
        p = 1.0 / (1.0 + std::exp(fApB));
        q = std::exp(fApB) / (1.0 + std::exp(fApB));
      }
      const double d2 = p * q;
      const double d1 = t[static_cast<std::size_t>(i)] - p;
      h11 += decision(i) * decision(i) * d2;
      h22 += d2;
      h21 += decision(i) * d2;
      g1 += decision(i) * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    while (step >= kMinStep) {
      const double nA = A + step * dA;
      const double nB = B + step * dB;
      const double nf = objective(nA, nB);
      if (nf < fval + 1e-4 * step * gd) {
        A = nA;
        B = nB;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }
  return {A, B};
}

SvmModel svm_rbf_fit(const Matrix& X, const Labels& y, const SvmParams& params,
                     std::uint64_t seed) {
  validate(params);
  check_training_set(X, y);
  check_two_classes(y);
  const double gamma = resolve_gamma(params.gamma, X);
  const auto signs = to_signs(y);

  const SmoSolution sol = smo_solve(X, signs, params.C, gamma, params.tol, params.max_iter);
  SvmModel model = model_from_solution(params, gamma, X, signs, sol);
  if (!sol.converged) {
    throw SvmConvergenceError("SMO did not converge within " + std::to_string(sol.iterations) +
                                  " iterations (gap " + std::to_string(sol.final_gap) + ")",
                              model);
  }
  if (!params.probability) return model;

  // Out-of-fold decision values from a class-stratified split.
  const int folds = params.platt_folds;
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  const bool enough = by_class[0].size() >= static_cast<std::size_t>(folds) &&
                      by_class[1].size() >= static_cast<std::size_t>(folds);
  Vector oof(X.rows());
  if (enough) {
    Rng rng = Rng(seed).split(0x9147);
    std::vector<int> fold_of(y.size());
    for (auto& members : by_class) {
      rng.shuffle(members);
      for (std::size_t r = 0; r < members.size(); ++r) fold_of[members[r]] = static_cast<int>(r % folds);
    }
    SvmParams inner = params;
    inner.probability = false;
    for (int f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> train, test;
      for (std::size_t i = 0; i < y.size(); ++i) {
        (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
      }
      const Matrix Xtr = X(train, Eigen::all);
      Labels ytr;
      for (auto i : train) ytr.push_back(y[static_cast<std::size_t>(i)]);
      const auto s = to_signs(ytr);
      const SmoSolution fs = smo_solve(Xtr, s, params.C, resolve_gamma(params.gamma, Xtr),
                                       params.tol, params.max_iter);
      const SvmModel fm = model_from_solution(inner, resolve_gamma(params.gamma, Xtr), Xtr, s, fs);
      const Vector dv = svm_decision(fm, X(test, Eigen::all));
      for (std::size_t r = 0; r < test.size(); ++r) oof(test[r]) = dv(static_cast<Eigen::Index>(r));
    }
  } else {
    oof = svm_decision(model, X);
  }
  const auto [a, b] = platt_fit(oof, y);
  model.has_platt = true;
  model.platt_a = a;
  model.platt_b = b;
  return model;
}

Vector svm_decision(const SvmModel& model, const Matrix& X) {
  check_query(X, model.support.cols());
  Vector out(X.rows());
  const Vector sv_norm = model.support.rowwise().squaredNorm();
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    const Vector dots = model.support * X.row(q).transpose();
    const double qn = X.row(q).squaredNorm();
    double f = model.bias;
    for (Eigen::Index s = 0; s < model.support.rows(); ++s) {
      const double d2 = std::max(0.0, sv_norm(s) + qn - 2.0 * dots(s));
      f += model.dual_coef(s) * std::exp(-model.gamma * d2);
    }
    out(q) = f;
  }
  return out;
}

Matrix svm_predict_proba(const SvmModel& model, const Matrix& X) {
  const Vector f = svm_decision(model, X);
  Vector positive(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    positive(i) = model.has_platt ? sigmoid(-(model.platt_a * f(i) + model.platt_b))
                                  : sigmoid(f(i));
  }
  return two_column(positive);
}

}  // namespace lobster::learners
