#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace combi {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

BigInt binomial(long n, long k);  // 0 when k<0, k>n or n<0
BigInt factorial(long n);
BigInt pow_int(long base, long exp);

double to_double(const BigInt& x);           // +inf when out of range
double ratio_to_double(const BigInt& num, const BigInt& den);
double log_bigint(const BigInt& x);          // natural log, x > 0
std::string to_string(const BigInt& x);

}  // namespace combi
