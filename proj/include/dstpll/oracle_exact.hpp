#pragma once

// Exact rational / big-integer counterparts of the closed-form expected
// beliefs. Requires GMP (link gmpxx and gmp).

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dstpll/error.hpp"
#include "dstpll/oracle.hpp"

namespace dstpll::exact {

inline mpz_class binomial(std::size_t n, std::size_t r) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), n, r);
  return out;
}

/// Inclusion-exclusion bracket of the closed form as an exact integer.
inline mpz_class bracket(std::size_t n, std::size_t i, const std::vector<std::size_t>& j) {
  std::size_t b_max = i;
  for (std::size_t v : j) b_max = std::min(b_max, v);
  mpz_class sum = 0;
  for (std::size_t b = 0; b <= b_max; ++b) {
    mpz_class t = binomial(n, b) * binomial(n - b, i - b);
    for (std::size_t v : j) t *= binomial(n - b, v - b);
    if (b % 2 == 0) {
      sum += t;
    } else {
      sum -= t;
    }
  }
  return sum;
}

inline mpq_class pow_q(const mpq_class& base, std::size_t e) {
  mpq_class out = 1;
  for (std::size_t t = 0; t < e; ++t) out *= base;
  return out;
}

/// Exact value of the closed-form sum, with the kernels taken as the exact
/// rationals of their double-precision inputs.
inline mpq_class closed_form_sum(std::size_t l, std::size_t k, const mpq_class& a, const mpq_class& b) {
  mpq_class total = 0;
  mpq_class two_k = pow_q(mpq_class(2), k);
  for (std::size_t h = 0; h < k; ++h) {
    const std::size_t n = k - h;
    for (std::size_t i = 0; i < n; ++i) {
      const mpq_class weight = mpq_class(binomial(k, h)) / two_k * pow_q(a, i) * pow_q(b, n - i);
      detail::for_each_index_vector(l - 2, n, [&](const std::vector<std::size_t>& j) {
        total += weight * mpq_class(bracket(n, i, j));
      });
    }
  }
  return total;
}

inline mpq_class kernel_shared(const NoiseModel& m) {
  return mpq_class(m.p1) / (pow_q(mpq_class(2), m.l - 2) - 1);
}

inline mpq_class expected_belief_true(const NoiseModel& m, std::size_t k) {
  m.validate();
  detail::check_budget(m.l, k, kDefaultClosedFormBudget);
  return closed_form_sum(m.l, k, kernel_shared(m), mpq_class(m.p2) / pow_q(mpq_class(2), m.l - 2));
}

inline mpq_class expected_belief_cooccur(const NoiseModel& m, std::size_t k) {
  m.validate();
  detail::check_budget(m.l, k, kDefaultClosedFormBudget);
  return closed_form_sum(m.l, k, kernel_shared(m), mpq_class(m.p3) / (pow_q(mpq_class(2), m.l - 1) - 1));
}

struct InequalityReport {
  std::size_t combinations = 0;  // (h, i, j) tuples checked
  std::size_t violations = 0;
  std::size_t strict = 0;        // tuples where LHS > RHS
};

/// Checks, for every h < k, i < n = k - h and j in [0, n)^(l-2), that
///   C(n,i) prod_a C(n,j_a)  >=  sum_{b>=1} (-1)^(b+1) C(n,b) C(n-b,i-b) prod_c C(n-b,j_c-b),
/// i.e. that every inclusion-exclusion bracket is non-negative.
inline InequalityReport check_bracket_inequality(std::size_t l, std::size_t k) {
  if (l < 3 || k == 0) throw Error(ErrorCode::InvalidParameter, "inequality check needs l >= 3 and k >= 1");
  InequalityReport rep;
  for (std::size_t h = 0; h < k; ++h) {
    const std::size_t n = k - h;
    for (std::size_t i = 0; i < n; ++i) {
      detail::for_each_index_vector(l - 2, n, [&](const std::vector<std::size_t>& j) {
        mpz_class lhs = binomial(n, i);
        for (std::size_t v : j) lhs *= binomial(n, v);
        std::size_t b_max = i;
        for (std::size_t v : j) b_max = std::min(b_max, v);
        mpz_class rhs = 0;
        for (std::size_t b = 1; b <= b_max; ++b) {
          mpz_class t = binomial(n, b) * binomial(n - b, i - b);
          for (std::size_t v : j) t *= binomial(n - b, v - b);
          if (b % 2 == 1) {
            rhs += t;
          } else {
            rhs -= t;
          }
        }
        ++rep.combinations;
        if (lhs < rhs) ++rep.violations;
        if (lhs > rhs) ++rep.strict;
      });
    }
  }
  return rep;
}

struct BinomialCheckReport {
  std::size_t k_max = 0;
  InequalityReport l3;
  InequalityReport l4;
  bool base_case_ok = false;        // k = 1 bracket is 1 > 0 for every l checked
  bool shared_kernel_ok = false;    // 2^(l-2) > 1 for l >= 3
  double max_rel_error_true = 0.0;  // float engine vs exact, l = 3
  double max_rel_error_cooccur = 0.0;
  bool passed = false;
};

/// Relative error at which the floating-point engine is accepted.
inline constexpr double kClosedFormRelTolerance = 1e-9;

/// Exhaustive exact verification of the bracket inequality for l in {3, 4}
/// and k <= k_max, plus the agreement of the floating-point closed form with
/// the exact rational one for l = 3.
inline BinomialCheckReport exact_binomial_check(std::size_t k_max) {
  if (k_max == 0 || k_max > 20) throw Error(ErrorCode::InvalidParameter, "k_max must lie in [1, 20]");
  BinomialCheckReport rep;
  rep.k_max = k_max;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto a = check_bracket_inequality(3, k);
    const auto b = check_bracket_inequality(4, k);
    rep.l3.combinations += a.combinations;
    rep.l3.violations += a.violations;
    rep.l3.strict += a.strict;
    rep.l4.combinations += b.combinations;
    rep.l4.violations += b.violations;
    rep.l4.strict += b.strict;
  }
  // k = 1: h = 0, n = 1, i = j = 0, only b = 0 contributes C(1,0)^l = 1.
  rep.base_case_ok = bracket(1, 0, {0}) == 1 && bracket(1, 0, {0, 0}) == 1;
  rep.shared_kernel_ok = true;
  for (std::size_t l = 3; l <= 64; ++l) {
    rep.shared_kernel_ok = rep.shared_kernel_ok && pow_q(mpq_class(2), l - 2) > 1;
  }

  const NoiseModel models[] = {NoiseModel::reference(), NoiseModel{3, 0, 1, 0.5, 0.3, 0.2},
                               NoiseModel{3, 2, 0, 0.34, 0.33, 0.33}};
  for (const auto& m : models) {
    for (std::size_t k = 1; k <= k_max; ++k) {
      const double ft = dstpll::expected_belief_true(m, k);
      const double fc = dstpll::expected_belief_cooccur(m, k);
      const double et = exact::expected_belief_true(m, k).get_d();
      const double ec = exact::expected_belief_cooccur(m, k).get_d();
      rep.max_rel_error_true = std::max(rep.max_rel_error_true, std::abs(ft - et) / std::abs(et));
      rep.max_rel_error_cooccur = std::max(rep.max_rel_error_cooccur, std::abs(fc - ec) / std::abs(ec));
    }
  }
  rep.passed = rep.l3.violations == 0 && rep.l4.violations == 0 && rep.base_case_ok && rep.shared_kernel_ok &&
               rep.max_rel_error_true < kClosedFormRelTolerance &&
               rep.max_rel_error_cooccur < kClosedFormRelTolerance;
  return rep;
}

}  // namespace dstpll::exact
