// Copyright 2026 The mtdq Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/*! \file
 *  \brief Universal Slepian-Wolf coding by random binning with a minimum
 *  empirical joint entropy decoder.
 *
 *  Bins are defined by an additive keyed hash: every (position, symbol) pair
 *  gets a pseudo-random 64-bit weight derived from the code key, and the bin
 *  of a sequence is the sum of its weights modulo 2^b. For two distinct
 *  sequences the difference of their sums contains at least one independent
 *  uniform weight, so collisions happen with probability exactly 2^-b over
 *  the key, which is all the binning argument needs. The additive form lets
 *  the decoder list a bin by meeting in the middle instead of hashing every
 *  sequence in the alphabet.
 *
 *  Sequences are symbol vectors over {0, ..., K-1}. Their integer code is the
 *  base-K number with position 0 most significant, so code order is
 *  lexicographic order.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "mtdq/entropy.hpp"
#include "mtdq/error.hpp"
#include "mtdq/parallel.hpp"
#include "mtdq/rng.hpp"

namespace mtdq {

using Sequence = std::vector<std::uint32_t>;

/// Bits needed to index every sequence of length n over K symbols.
inline unsigned lossless_bits(std::size_t n, std::size_t alphabet) {
  unsigned per = 0;
  while ((std::size_t{1} << per) < alphabet) ++per;
  return static_cast<unsigned>(n) * per;
}

struct BinningCode {
  std::size_t n = 0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  unsigned b1 = 0;
  unsigned b2 = 0;
  std::uint64_t key = 0;
  bool injective = false;

  static BinningCode make(std::size_t n, std::size_t k1, std::size_t k2, unsigned b1, unsigned b2,
                          std::uint64_t key, bool injective = false) {
    require(n >= 1, ErrorCode::invalid_argument, "block length must be positive");
    require(k1 >= 1 && k2 >= 1, ErrorCode::invalid_argument, "alphabets must be nonempty");
    BinningCode code{n, k1, k2, b1, b2, key, injective};
    for (int user : {1, 2}) {
      const unsigned b = code.bits(user);
      const unsigned full = lossless_bits(n, code.alphabet(user));
      require(b <= full, ErrorCode::infeasible_rate, "bin width exceeds the lossless width");
      require(b >= 1 || full == 0, ErrorCode::invalid_argument, "bin width must be at least 1 bit");
      require(b <= 63, ErrorCode::infeasible_rate, "bin width above 63 bits");
      if (injective)
        require(b == full, ErrorCode::invalid_argument, "injective mode needs the lossless width");
    }
    return code;
  }

  std::size_t alphabet(int user) const { return user == 1 ? k1 : k2; }
  unsigned bits(int user) const { return user == 1 ? b1 : b2; }
  // At the lossless width a user's bin index is the sequence code itself.
  bool direct(int user) const {
    return injective || bits(user) == lossless_bits(n, alphabet(user));
  }
  std::uint64_t mask(int user) const {
    const unsigned b = bits(user);
    return b == 0 ? 0 : (~std::uint64_t{0} >> (64 - b));
  }

  std::uint64_t weight(int user, std::size_t pos, std::uint32_t sym) const {
    const std::uint64_t base = mix64(key ^ mix64(static_cast<std::uint64_t>(user)));
    return mix64(base + pos * alphabet(user) + sym);
  }
};

inline std::uint64_t sequence_code(std::span<const std::uint32_t> seq, std::size_t alphabet) {
  std::uint64_t v = 0;
  for (auto s : seq) v = v * alphabet + s;
  return v;
}

inline Sequence sequence_from_code(std::uint64_t code, std::size_t n, std::size_t alphabet) {
  Sequence seq(n);
  for (std::size_t k = n; k-- > 0;) {
    seq[k] = static_cast<std::uint32_t>(code % alphabet);
    code /= alphabet;
  }
  return seq;
}

inline std::uint64_t assign_bin(std::span<const std::uint32_t> seq, int user,
                                const BinningCode& code) {
  require(user == 1 || user == 2, ErrorCode::invalid_argument, "user must be 1 or 2");
  require(seq.size() == code.n, ErrorCode::invalid_argument, "sequence length differs from n");
  const auto k = code.alphabet(user);
  for (auto s : seq) require(s < k, ErrorCode::invalid_argument, "symbol outside the alphabet");
  if (code.direct(user)) return sequence_code(seq, k);
  std::uint64_t h = 0;
  for (std::size_t pos = 0; pos < seq.size(); ++pos) h += code.weight(user, pos, seq[pos]);
  return h & code.mask(user);
}

/// Empirical joint entropy (bits) of the pair type of (y1, y2).
template <class T>
double empirical_joint_entropy(std::span<const T> y1, std::span<const T> y2) {
  require(y1.size() == y2.size(), ErrorCode::invalid_argument, "length mismatch");
  require(!y1.empty(), ErrorCode::invalid_argument, "empty sequences");
  std::vector<std::pair<T, T>> pairs;
  pairs.reserve(y1.size());
  for (std::size_t k = 0; k < y1.size(); ++k) pairs.emplace_back(y1[k], y2[k]);
  std::sort(pairs.begin(), pairs.end());
  const double n = static_cast<double>(pairs.size());
  double h = 0.0;
  for (std::size_t a = 0; a < pairs.size();) {
    std::size_t b = a;
    while (b < pairs.size() && pairs[b] == pairs[a]) ++b;
    const double p = static_cast<double>(b - a) / n;
    h -= p * std::log2(p);
    a = b;
  }
  return h;
}

inline double empirical_joint_entropy(const Sequence& y1, const Sequence& y2) {
  return empirical_joint_entropy<std::uint32_t>(y1, y2);
}

inline constexpr double kDefaultSearchCap = 1e8;

/// Sorted codes of every sequence whose bin is t.
inline std::vector<std::uint64_t> bin_members(const BinningCode& code, int user, std::uint64_t t,
                                              double cap = kDefaultSearchCap) {
  const std::size_t k = code.alphabet(user);
  const std::size_t n = code.n;
  require(std::pow(static_cast<double>(k), static_cast<double>(n)) < 9.2e18,
          ErrorCode::search_cap, "sequence space does not fit in 64-bit codes");
  if (code.direct(user)) {
    const double total = std::pow(static_cast<double>(k), static_cast<double>(n));
    if (static_cast<double>(t) < total) return {t};
    return {};
  }
  const std::uint64_t mask = code.mask(user);
  const std::size_t left_len = n / 2;
  const std::size_t right_len = n - left_len;
  const double half_space = std::pow(static_cast<double>(k), static_cast<double>(right_len));
  require(half_space <= cap, ErrorCode::search_cap, "bin enumeration exceeds the search cap");

  auto enumerate = [&](std::size_t len, std::size_t offset, auto&& visit) {
    std::vector<std::uint32_t> digit(len, 0);
    std::uint64_t idx = 0;
    while (true) {
      std::uint64_t sum = 0;
      for (std::size_t p = 0; p < len; ++p) sum += code.weight(user, offset + p, digit[p]);
      visit(idx, sum);
      ++idx;
      std::size_t p = len;
      while (p > 0 && ++digit[p - 1] == k) digit[--p] = 0;
      if (p == 0) break;
    }
  };

  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> right;
  enumerate(right_len, left_len, [&](std::uint64_t idx, std::uint64_t sum) {
    right[sum & mask].push_back(idx);
  });
  const auto stride = static_cast<std::uint64_t>(half_space);
  std::vector<std::uint64_t> out;
  auto visit_left = [&](std::uint64_t idx, std::uint64_t sum) {
    const auto it = right.find((t - sum) & mask);
    if (it == right.end()) return;
    for (auto r : it->second) out.push_back(idx * stride + r);
  };
  if (left_len == 0)
    visit_left(0, 0);
  else
    enumerate(left_len, 0, visit_left);
  std::sort(out.begin(), out.end());
  return out;
}

struct DecodeOutcome {
  Sequence y1;
  Sequence y2;
  double entropy = 0.0;  // empirical joint entropy of the decoded pair
  bool tie = false;      // another consistent pair reached the same minimum
  std::uint64_t searched = 0;
};

namespace detail {

// Scores pairs by sum over pair counts of c log2 c; a larger score is a
// smaller empirical joint entropy (H = log2 n - score / n).
class PairScorer {
 public:
  PairScorer(std::size_t n, std::size_t k1, std::size_t k2)
      : n_(n), k2_(k2), counts_(k1 * k2, 0), clog_(n + 1, 0.0) {
    for (std::size_t c = 2; c <= n; ++c)
      clog_[c] = static_cast<double>(c) * std::log2(static_cast<double>(c));
    touched_.reserve(n);
  }

  double score(const std::uint32_t* a, const std::uint32_t* b) {
    touched_.clear();
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t cell = a[k] * k2_ + b[k];
      if (counts_[cell]++ == 0) touched_.push_back(cell);
    }
    double s = 0.0;
    for (auto cell : touched_) {
      s += clog_[counts_[cell]];
      counts_[cell] = 0;
    }
    return s;
  }

  double entropy(double score) const {
    const double n = static_cast<double>(n_);
    return std::log2(n) - score / n;
  }

 private:
  std::size_t n_;
  std::size_t k2_;
  std::vector<std::uint32_t> counts_;
  std::vector<double> clog_;
  std::vector<std::size_t> touched_;
};

inline std::vector<std::uint32_t> flatten(const std::vector<std::uint64_t>& codes, std::size_t n,
                                          std::size_t k) {
  std::vector<std::uint32_t> out;
  out.reserve(codes.size() * n);
  for (auto c : codes) {
    const auto s = sequence_from_code(c, n, k);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

}  // namespace detail

inline constexpr double kTieTolerance = 1e-9;

/// Minimum joint entropy decoding: among all pairs consistent with (t1, t2)
/// return one of smallest empirical joint entropy, the lexicographically
/// first on ties.
inline DecodeOutcome mje_decode(const BinningCode& code, std::uint64_t t1, std::uint64_t t2,
                                double cap = kDefaultSearchCap) {
  const auto c1 = bin_members(code, 1, t1, cap);
  const auto c2 = bin_members(code, 2, t2, cap);
  require(!c1.empty() && !c2.empty(), ErrorCode::invalid_argument,
          "no sequence pair is consistent with the received bins");
  const double work = static_cast<double>(c1.size()) * static_cast<double>(c2.size());
  require(work <= cap, ErrorCode::search_cap, "candidate pairs exceed the search cap");

  const std::size_t n = code.n;
  const auto f1 = detail::flatten(c1, n, code.k1);
  const auto f2 = detail::flatten(c2, n, code.k2);
  detail::PairScorer scorer(n, code.k1, code.k2);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best1 = 0, best2 = 0;
  bool tie = false;
  for (std::size_t a = 0; a < c1.size(); ++a) {
    for (std::size_t b = 0; b < c2.size(); ++b) {
      const double s = scorer.score(&f1[a * n], &f2[b * n]);
      if (s > best + kTieTolerance) {
        best = s;
        best1 = a;
        best2 = b;
        tie = false;
      } else if (s >= best - kTieTolerance) {
        tie = true;
      }
    }
  }
  DecodeOutcome out;
  out.y1 = sequence_from_code(c1[best1], n, code.k1);
  out.y2 = sequence_from_code(c2[best2], n, code.k2);
  out.entropy = scorer.entropy(best);
  out.tie = tie;
  out.searched = static_cast<std::uint64_t>(c1.size() * c2.size());
  return out;
}

/// Per-block rate choice: R1 = H(Y1|Y2) + eps1, R2 = H(Y2|Y1) + eps2, raised
/// equally until R1 + R2 >= H(Y1,Y2) + max(eps1, eps2).
struct RatePlan {
  double r1 = 0.0;
  double r2 = 0.0;
};

inline RatePlan plan_rates(const PmfEntropies& e, double eps1, double eps2) {
  require(eps1 >= 0.0 && eps2 >= 0.0, ErrorCode::infeasible_rate, "rate margins must be >= 0");
  RatePlan plan{e.first_given_second() + eps1, e.second_given_first() + eps2};
  const double deficit = e.joint + std::max(eps1, eps2) - (plan.r1 + plan.r2);
  if (deficit > 0.0) {
    plan.r1 += 0.5 * deficit;
    plan.r2 += 0.5 * deficit;
  }
  return plan;
}

/// Bin width for rate r at block length n, capped at the lossless width.
inline unsigned bin_bits(double rate, std::size_t n, std::size_t alphabet) {
  const double want = std::ceil(rate * static_cast<double>(n) - 1e-9);
  const unsigned full = lossless_bits(n, alphabet);
  if (!(want > 0.0)) return full == 0 ? 0 : 1;
  return static_cast<unsigned>(std::min<double>(want, full));
}

struct SwReport {
  std::size_t n = 0;
  unsigned b1 = 0;
  unsigned b2 = 0;
  double h1g2 = 0.0;
  double h2g1 = 0.0;
  double h12 = 0.0;
  double target_r1 = 0.0;
  double target_r2 = 0.0;
  double error_rate = 0.0;
  double tie_rate = 0.0;
  std::size_t trials = 0;
  double mean_candidate_pairs = 0.0;
};

struct SwTrial {
  Sequence y1;
  Sequence y2;
  BinningCode code;
  DecodeOutcome decoded;
  bool error = false;
};

/// Draws one block from the law, encodes it with a fresh key and decodes it.
inline SwTrial run_sw_trial(const QuantizedJointPMF& law, std::size_t n, unsigned b1, unsigned b2,
                            std::uint64_t seed, std::uint64_t trial,
                            double cap = kDefaultSearchCap) {
  Rng rng = make_stream(seed, StreamTag::sw_law, trial);
  std::discrete_distribution<std::size_t> pick(law.p.begin(), law.p.end());
  SwTrial t{Sequence(n), Sequence(n), {}, {}, false};
  for (std::size_t k = 0; k < n; ++k) {
    const auto cell = pick(rng);
    t.y1[k] = static_cast<std::uint32_t>(cell / law.cols);
    t.y2[k] = static_cast<std::uint32_t>(cell % law.cols);
  }
  t.code = BinningCode::make(n, law.rows, law.cols, b1, b2,
                             derive_seed(seed, StreamTag::binning, trial));
  t.decoded = mje_decode(t.code, assign_bin(t.y1, 1, t.code), assign_bin(t.y2, 2, t.code), cap);
  t.error = t.decoded.y1 != t.y1 || t.decoded.y2 != t.y2;
  return t;
}

/// Monte Carlo error rate of the binning ensemble at fixed bin widths.
inline SwReport sw_error_experiment_bits(const QuantizedJointPMF& law, std::size_t n, unsigned b1,
                                         unsigned b2, std::size_t trials, std::uint64_t seed,
                                         unsigned threads = 1, double cap = kDefaultSearchCap) {
  require(trials >= 1, ErrorCode::invalid_argument, "trials must be positive");
  const auto e = entropies(law);
  std::vector<SwTrial> results(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    results[i] = run_sw_trial(law, n, b1, b2, seed, i, cap);
  });
  SwReport r;
  r.n = n;
  r.b1 = b1;
  r.b2 = b2;
  r.h1g2 = e.first_given_second();
  r.h2g1 = e.second_given_first();
  r.h12 = e.joint;
  r.target_r1 = static_cast<double>(b1) / static_cast<double>(n);
  r.target_r2 = static_cast<double>(b2) / static_cast<double>(n);
  r.trials = trials;
  std::size_t errors = 0, ties = 0;
  double searched = 0.0;
  for (const auto& t : results) {
    errors += t.error;
    ties += t.decoded.tie;
    searched += static_cast<double>(t.decoded.searched);
  }
  r.error_rate = static_cast<double>(errors) / static_cast<double>(trials);
  r.tie_rate = static_cast<double>(ties) / static_cast<double>(trials);
  r.mean_candidate_pairs = searched / static_cast<double>(trials);
  return r;
}

/// Monte Carlo error rate with rates set from the law's entropies plus margins.
inline SwReport sw_error_experiment(const QuantizedJointPMF& law, std::size_t n, double eps1,
                                    double eps2, std::size_t trials, std::uint64_t seed,
                                    unsigned threads = 1, double cap = kDefaultSearchCap) {
  const auto plan = plan_rates(entropies(law), eps1, eps2);
  auto r = sw_error_experiment_bits(law, n, bin_bits(plan.r1, n, law.rows),
                                    bin_bits(plan.r2, n, law.cols), trials, seed, threads, cap);
  r.target_r1 = plan.r1;
  r.target_r2 = plan.r2;
  return r;
}

}  // namespace mtdq
