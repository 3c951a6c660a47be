#ifndef NCOMP_RATIONAL_CODER_HPP
#define NCOMP_RATIONAL_CODER_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ncomp {

using Rational = boost::multiprecision::cpp_rational;

// Arithmetic coding over exact rationals. This coder is a specification-grade
// reference: it never rounds, so the interval produced for a message is the
// exact product-of-probabilities subinterval of [0, 1). The streaming integer
// coder in range_coder.hpp is the production counterpart.

// Static symbol model with exact rational probabilities.
struct FixedModel {
  std::vector<char> symbols;
  std::vector<Rational> probs;
  std::vector<Rational> cumulative;  // lower bounds, cumulative[0] == 0

  // Builds the model and checks that every probability is positive and the
  // total is exactly 1.
  static FixedModel from_probs(std::string_view symbols, std::vector<Rational> probs);

  // Index of symbol, or -1 when absent.
  int index_of(char symbol) const;
};

struct RationalInterval {
  Rational low;
  Rational high;

  Rational width() const { return high - low; }
  bool contains(const Rational& point) const { return low <= point && point < high; }
};

// Narrows [0, 1) once per message symbol. Unknown symbols are rejected with
// the offending message index.
RationalInterval rational_encode(std::string_view message, const FixedModel& model);

// Recovers the unique length-symbol message whose final interval contains
// point. Requires 0 <= point < 1.
std::string rational_decode(const Rational& point, std::size_t length, const FixedModel& model);

}  // namespace ncomp

#endif  // NCOMP_RATIONAL_CODER_HPP
