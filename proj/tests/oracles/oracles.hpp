// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

// Reference implementations written independently of the library, used to
// cross-check it. Deliberately naive: clarity over speed.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

/// pass@k by enumerating every k-subset of n samples, c of which succeed.
inline double pass_at_k_enumerate(std::size_t n, std::size_t c, std::size_t k) {
  std::size_t hit = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    ++total;
    // Samples 0..c-1 are the successes.
    bool any = false;
    for (std::size_t i = 0; i < c; ++i) any |= (mask >> i) & 1u;
    hit += any ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

/// Pairwise AUC: fraction of (positive, negative) pairs ordered correctly.
inline double auc_pairwise(const std::vector<std::pair<double, bool>>& scored) {
  double num = 0.0;
  std::size_t pairs = 0;
  for (const auto& [sp, yp] : scored) {
    if (!yp) continue;
    for (const auto& [sn, yn] : scored) {
      if (yn) continue;
      ++pairs;
      num += sp > sn ? 1.0 : (sp == sn ? 0.5 : 0.0);
    }
  }
  return num / static_cast<double>(pairs);
}

/// KL(p || q) for categorical distributions.
inline double kl_categorical(const std::vector<double>& p,
                             const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

inline std::size_t word_count(const std::string& text) {
  std::istringstream in(text);
  std::string w;
  std::size_t n = 0;
  while (in >> w) ++n;
  return n;
}

/// Rel written via the equivalent closed form acc + s(1 - s).
inline double reliability(double acc, double abstain) {
  return acc + abstain * (1.0 - abstain);
}

/// Central finite-difference gradient.
inline std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Expected calibration error with bins (i/B, (i+1)/B], confidence 0 in bin 0.
inline double ece(const std::vector<std::pair<double, bool>>& scored,
                  std::size_t bins) {
  std::vector<double> conf(bins, 0.0);
  std::vector<std::size_t> hits(bins, 0), count(bins, 0);
  for (const auto& [c, y] : scored) {
    std::size_t b = 0;
    while (b + 1 < bins && c > static_cast<double>(b + 1) / bins) ++b;
    conf[b] += c;
    hits[b] += y ? 1 : 0;
    ++count[b];
  }
  double e = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const double n = static_cast<double>(count[b]);
    e += n / scored.size() * std::fabs(hits[b] / n - conf[b] / n);
  }
  return e;
}

}  // namespace oracle
