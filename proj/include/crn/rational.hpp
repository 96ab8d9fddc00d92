#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <vector>

namespace crn {

// Exact arithmetic scalar types. Rational is kept in canonical form by the
// backend: gcd(|num|, den) = 1 and den >= 1.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

using RatVec = std::vector<Rational>;
using IntVec = std::vector<Integer>;

inline Integer int_of(long long v) { return Integer(v); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace crn
