#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "lobster/common/rng.hpp"

namespace oracle {

namespace {

constexpr double kPi = std::numbers::pi;

double htk_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double htk_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Mann-Whitney by pair counting, as a fraction.
double pair_auc_fraction(const Labels& y, const std::vector<double>& s) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace

Matrix naive_mfcc(const std::vector<double>& segment, const lobster::features::MfccConfig& cfg) {
  const int N = cfg.n_fft;
  const int bins = N / 2 + 1;
  const int frames = 1 + static_cast<int>((segment.size() - static_cast<std::size_t>(N)) / static_cast<std::size_t>(cfg.hop));

  // Twiddle tables, cached per size; the angle index is reduced mod N so
  // large n*k stay exact.
  static std::map<int, std::pair<Matrix, Matrix>> cache;
  auto it = cache.find(N);
  if (it == cache.end()) {
    Matrix c(N, bins), s(N, bins);
    for (int n = 0; n < N; ++n) {
      for (int k = 0; k < bins; ++k) {
        const long idx = (static_cast<long>(n) * k) % N;
        const double ang = 2.0 * kPi * static_cast<double>(idx) / N;
        c(n, k) = std::cos(ang);
        s(n, k) = std::sin(ang);
      }
    }
    it = cache.emplace(N, std::make_pair(std::move(c), std::move(s))).first;
  }
  const Matrix& cos_t = it->second.first;
  const Matrix& sin_t = it->second.second;
  Matrix windowed(frames, N);
  for (int t = 0; t < frames; ++t) {
    for (int n = 0; n < N; ++n) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * n / N);
      windowed(t, n) = segment[static_cast<std::size_t>(t * cfg.hop + n)] * w;
    }
  }
  const Matrix re = windowed * cos_t;
  const Matrix im = windowed * sin_t;
  const Matrix power = (re.array().square() + im.array().square()).matrix();

  // Triangles from explicit mel-spaced corner frequencies.
  const double m_lo = htk_mel(cfg.fmin), m_hi = htk_mel(cfg.fmax);
  Matrix mel_power = Matrix::Zero(frames, cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double f0 = htk_hz(m_lo + (m_hi - m_lo) * m / (cfg.n_mels + 1));
    const double f1 = htk_hz(m_lo + (m_hi - m_lo) * (m + 1) / (cfg.n_mels + 1));
    const double f2 = htk_hz(m_lo + (m_hi - m_lo) * (m + 2) / (cfg.n_mels + 1));
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / N;
      double w = 0.0;
      if (f > f0 && f <= f1) w = (f - f0) / (f1 - f0);
      else if (f > f1 && f < f2) w = (f2 - f) / (f2 - f1);
      if (w == 0.0) continue;
      w *= 2.0 / (f2 - f0);
      for (int t = 0; t < frames; ++t) mel_power(t, m) += w * power(t, k);
    }
  }

  Matrix out(frames, cfg.n_mfcc);
  const int M = cfg.n_mels;
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < cfg.n_mfcc; ++c) {
      double acc = 0.0;
      for (int m = 0; m < M; ++m) {
        acc += std::log(mel_power(t, m) + cfg.log_floor) * std::cos(kPi * c * (2.0 * m + 1.0) / (2.0 * M));
      }
      out(t, c) = acc * (c == 0 ? std::sqrt(1.0 / M) : std::sqrt(2.0 / M));
    }
  }
  return out;
}

double pair_count_auc(const Labels& y, const std::vector<double>& scores) {
  return 100.0 * pair_auc_fraction(y, scores);
}

BootstrapRef reference_bootstrap(const std::vector<double>& a, const std::vector<double>& b,
                                 const Labels& y, int n_boot, std::uint64_t seed, double level) {
  const std::size_t n = y.size();
  std::vector<double> deltas;
  BootstrapRef out;
  for (int rep = 0; rep < n_boot; ++rep) {
    lobster::Rng rng(lobster::Rng::derive_seed(seed, static_cast<std::uint64_t>(rep)));
    std::vector<std::size_t> idx(n);
    for (;;) {
      std::size_t pos = 0;
      for (auto& j : idx) {
        j = rng.below(n);
        pos += static_cast<std::size_t>(y[j]);
      }
      if (pos != 0 && pos != n) break;
      ++out.redraws;
    }
    Labels yy;
    std::vector<double> sa, sb;
    for (auto j : idx) {
      yy.push_back(y[j]);
      sa.push_back(a[j]);
      sb.push_back(b[j]);
    }
    deltas.push_back(100.0 * (pair_auc_fraction(yy, sa) - pair_auc_fraction(yy, sb)));
  }
  std::sort(deltas.begin(), deltas.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(deltas.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= deltas.size()) return deltas.back();
    return deltas[i] + frac * (deltas[i + 1] - deltas[i]);
  };
  const double point = pair_count_auc(y, a) - pair_count_auc(y, b);
  out.lo = std::min(q((1.0 - level) / 2.0), point);
  out.hi = std::max(q(1.0 - (1.0 - level) / 2.0), point);
  long le = 0, ge = 0;
  for (double d : deltas) {
    le += d <= 0.0;
    ge += d >= 0.0;
  }
  out.p = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / n_boot);
  return out;
}

double max_gradient_error(const std::function<double(const Vector&)>& loss, const Vector& theta,
                          const Vector& analytic, double h) {
  double worst = 0.0;
  Vector probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe(i) = theta(i) + h;
    const double up = loss(probe);
    probe(i) = theta(i) - h;
    const double down = loss(probe);
    probe(i) = theta(i);
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({1e-6, std::abs(numeric), std::abs(analytic(i))});
    worst = std::max(worst, std::abs(numeric - analytic(i)) / scale);
  }
  return worst;
}

GradientAudit piecewise_gradient_error(const std::function<double(const Vector&)>& loss, const Vector& theta,
                                       const Vector& analytic, double h, double tol) {
  GradientAudit audit;
  Vector probe = theta;
  auto error_at = [&](Eigen::Index i, double step) {
    probe(i) = theta(i) + step;
    const double up = loss(probe);
    probe(i) = theta(i) - step;
    const double down = loss(probe);
    probe(i) = theta(i);
    const double numeric = (up - down) / (2.0 * step);
    return std::abs(numeric - analytic(i)) / std::max({1e-6, std::abs(numeric), std::abs(analytic(i))});
  };
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    double err = error_at(i, h);
    if (err > tol) {
      err = std::min({err, error_at(i, h / 10.0), error_at(i, h / 100.0)});
      ++audit.refined;
    }
    audit.worst = std::max(audit.worst, err);
  }
  return audit;
}

double kkt_audit(const Matrix& X, const std::vector<int>& signs, const Vector& alpha, double bias,
                 double C, double gamma) {
  const Eigen::Index n = X.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double f = bias;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (alpha(j) == 0.0) continue;
      double d2 = 0.0;
      for (Eigen::Index c = 0; c < X.cols(); ++c) d2 += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
      f += alpha(j) * signs[static_cast<std::size_t>(j)] * std::exp(-gamma * d2);
    }
    const double m = signs[static_cast<std::size_t>(i)] * f;
    double v;
    if (alpha(i) <= 1e-8 * C) v = 1.0 - m;
    else if (alpha(i) >= C * (1.0 - 1e-8)) v = m - 1.0;
    else v = std::abs(m - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

double gini_gain_counts(const Matrix& X, const Labels& y, const std::vector<std::size_t>& rows,
                        int feature, double threshold) {
  double nl = 0, pl = 0, nr = 0, pr = 0;
  for (auto r : rows) {
    const bool left = X(static_cast<Eigen::Index>(r), feature) <= threshold;
    (left ? nl : nr) += 1;
    if (y[r] == 1) (left ? pl : pr) += 1;
  }
  auto g = [](double pos, double n) {
    if (n == 0) return 0.0;
    const double p = pos / n;
    return 1.0 - p * p - (1 - p) * (1 - p);
  };
  const double n = nl + nr;
  return g(pl + pr, n) - (nl / n) * g(pl, nl) - (nr / n) * g(pr, nr);
}

std::vector<double> naive_conv1d(const std::vector<double>& input, int length, int cin,
                                 const std::vector<double>& weights, const std::vector<double>& bias,
                                 int filters, int kernel, int dilation) {
  const int out_len = length - (kernel - 1) * dilation;
  std::vector<double> out(static_cast<std::size_t>(out_len * filters));
  for (int t = 0; t < out_len; ++t) {
    for (int f = 0; f < filters; ++f) {
      double acc = bias[static_cast<std::size_t>(f)];
      for (int j = 0; j < kernel; ++j) {
        for (int c = 0; c < cin; ++c) {
          acc += input[static_cast<std::size_t>((t + j * dilation) * cin + c)] *
                 weights[static_cast<std::size_t>((f * kernel + j) * cin + c)];
        }
      }
      out[static_cast<std::size_t>(t * filters + f)] = acc;
    }
  }
  return out;
}

Labels random_labels(std::size_t n, std::uint64_t seed) {
  lobster::Rng rng(seed);
  Labels y(n);
  for (;;) {
    int pos = 0;
    for (auto& v : y) {
      v = static_cast<int>(rng.below(2));
      pos += v;
    }
    if (pos > 0 && static_cast<std::size_t>(pos) < n) return y;
  }
}

}  // namespace oracle
