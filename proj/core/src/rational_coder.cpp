#include "ncomp/rational_coder.hpp"

#include <stdexcept>
#include <string>

#include "ncomp/errors.hpp"

namespace ncomp {

FixedModel FixedModel::from_probs(std::string_view symbols, std::vector<Rational> probs) {
  if (symbols.size() != probs.size() || symbols.empty()) {
    throw std::invalid_argument("FixedModel: symbols and probabilities must pair up");
  }
  FixedModel model;
  model.symbols.assign(symbols.begin(), symbols.end());
  model.probs = std::move(probs);
  Rational running = 0;
  model.cumulative.reserve(model.probs.size());
  for (std::size_t i = 0; i < model.probs.size(); ++i) {
    if (model.probs[i] <= 0) {
      throw std::invalid_argument("FixedModel: probability " + std::to_string(i) +
                                  " is not positive");
    }
    model.cumulative.push_back(running);
    running += model.probs[i];
  }
  if (running != 1) {
    throw std::invalid_argument("FixedModel: probabilities must sum to exactly 1");
  }
  return model;
}

int FixedModel::index_of(char symbol) const {
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] == symbol) return static_cast<int>(i);
  }
  return -1;
}

RationalInterval rational_encode(std::string_view message, const FixedModel& model) {
  RationalInterval interval{Rational(0), Rational(1)};
  for (std::size_t i = 0; i < message.size(); ++i) {
    const int s = model.index_of(message[i]);
    if (s < 0) {
      throw std::invalid_argument("rational_encode: unknown symbol at index " +
                                  std::to_string(i));
    }
    const Rational width = interval.width();
    interval.high = interval.low + width * (model.cumulative[s] + model.probs[s]);
    interval.low = interval.low + width * model.cumulative[s];
  }
  return interval;
}

std::string rational_decode(const Rational& point, std::size_t length, const FixedModel& model) {
  if (point < 0 || point >= 1) {
    throw std::invalid_argument("rational_decode: point must lie in [0, 1)");
  }
  std::string out;
  out.reserve(length);
  Rational low = 0;
  Rational width = 1;
  for (std::size_t i = 0; i < length; ++i) {
    // Position of the point inside the current interval, rescaled to [0, 1).
    const Rational local = (point - low) / width;
    std::size_t s = model.probs.size() - 1;
    for (std::size_t k = 1; k < model.cumulative.size(); ++k) {
      if (local < model.cumulative[k]) {
        s = k - 1;
        break;
      }
    }
    out.push_back(model.symbols[s]);
    low += width * model.cumulative[s];
    width *= model.probs[s];
  }
  return out;
}

}  // namespace ncomp
