#include "decfilt/decay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace decfilt {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

DecaySchedule::DecaySchedule(decay::Variant variant, std::size_t limit)
    : variant_(variant), limit_(limit) {
  if (limit_ == 0) throw std::invalid_argument("decay: evidence limit L must be >= 1");
  std::visit(Overloaded{
                 [](const decay::Uniform&) {},
                 [](const decay::FixedWindow& w) {
                   if (w.width < 1) throw std::invalid_argument("decay: window width must be >= 1");
                 },
                 [](const decay::Exponential& e) {
                   if (!(e.rate > 0.0) || !std::isfinite(e.rate))
                     throw std::invalid_argument("decay: exponential rate must be > 0");
                 },
                 [](const decay::InversePolynomial& p) {
                   if (!(p.exponent > 0.0) || !std::isfinite(p.exponent))
                     throw std::invalid_argument("decay: polynomial exponent must be > 0");
                 },
             },
             variant_);
}

double DecaySchedule::age_weight(std::size_t age) const {
  return std::visit(Overloaded{
                        [](const decay::Uniform&) { return 1.0; },
                        [age](const decay::FixedWindow& w) { return age <= w.width ? 1.0 : 0.0; },
                        [age](const decay::Exponential& e) {
                          return std::exp(-e.rate * static_cast<double>(age - 1));
                        },
                        [age](const decay::InversePolynomial& p) {
                          return std::pow(static_cast<double>(age), -(1.0 + p.exponent));
                        },
                    },
                    variant_);
}

std::size_t DecaySchedule::support(std::size_t T) const {
  std::size_t k = std::min(T, limit_);
  if (const auto* w = std::get_if<decay::FixedWindow>(&variant_)) k = std::min(k, w->width);
  return k;
}

double DecaySchedule::raw_weight(std::size_t t, std::size_t T) const {
  if (t < 1 || t > T) throw std::out_of_range("decay: t must lie in [1, T]");
  const std::size_t age = T - t + 1;
  if (age > limit_) return 0.0;
  return age_weight(age);
}

void DecaySchedule::extend_cumulative(std::size_t ages) {
  double running = cumulative_.empty() ? 0.0 : cumulative_.back();
  for (std::size_t k = cumulative_.size() + 1; k <= ages; ++k) {
    running += age_weight(k);
    cumulative_.push_back(running);
  }
}

double DecaySchedule::normalizer(std::size_t T) const {
  if (T < 1) throw std::out_of_range("decay: normalizer needs T >= 1");
  const std::size_t k = support(T);
  if (std::holds_alternative<decay::Uniform>(variant_) ||
      std::holds_alternative<decay::FixedWindow>(variant_)) {
    return static_cast<double>(k);
  }
  if (k <= cumulative_.size()) return cumulative_[k - 1];
  double sum = cumulative_.empty() ? 0.0 : cumulative_.back();
  for (std::size_t a = cumulative_.size() + 1; a <= k; ++a) sum += age_weight(a);
  return sum;
}

std::size_t DecaySchedule::sample(std::size_t T, Rng& rng) {
  if (T < 1) throw std::out_of_range("decay: cannot sample from an empty history");
  const std::size_t k = support(T);
  std::size_t age;
  if (std::holds_alternative<decay::Uniform>(variant_) ||
      std::holds_alternative<decay::FixedWindow>(variant_)) {
    age = 1 + std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
  } else {
    if (cumulative_.size() < k) extend_cumulative(k);
    const double target = uniform01(rng) * cumulative_[k - 1];
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.begin() + k, target);
    age = static_cast<std::size_t>(it - cumulative_.begin()) + 1;
    if (age > k) age = k;
  }
  return T - age + 1;
}

namespace {

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  // shortest form that still parses back to the same double
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream trial;
    trial.precision(p);
    trial << v;
    if (std::stod(trial.str()) == v) return trial.str();
  }
  return out.str();
}

}  // namespace

std::string DecaySchedule::label() const {
  std::string base = std::visit(
      Overloaded{
          [](const decay::Uniform&) { return std::string("uniform"); },
          [](const decay::FixedWindow& w) { return "window:" + std::to_string(w.width); },
          [](const decay::Exponential& e) { return "exp:" + format_number(e.rate); },
          [](const decay::InversePolynomial& p) { return "poly:" + format_number(p.exponent); },
      },
      variant_);
  if (limit_ != kUnbounded) base += "@L" + std::to_string(limit_);
  return base;
}

DecaySchedule DecaySchedule::parse(const std::string& text, std::size_t limit) {
  std::string spec = text;
  if (auto at = spec.find("@L"); at != std::string::npos) {
    limit = std::stoull(spec.substr(at + 2));
    spec = spec.substr(0, at);
  }
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](const char* what) {
    if (arg.empty()) throw std::invalid_argument("decay '" + text + "': missing " + what);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size()) throw std::invalid_argument("decay '" + text + "': bad " + what);
    return v;
  };
  if (kind == "uniform" && colon == std::string::npos) return DecaySchedule(decay::Uniform{}, limit);
  if (kind == "window") {
    const double w = number("window width");
    if (w < 1 || w != std::floor(w)) throw std::invalid_argument("decay '" + text + "': bad window width");
    return DecaySchedule(decay::FixedWindow{static_cast<std::size_t>(w)}, limit);
  }
  if (kind == "exp") return DecaySchedule(decay::Exponential{number("rate")}, limit);
  if (kind == "poly") return DecaySchedule(decay::InversePolynomial{number("exponent")}, limit);
  throw std::invalid_argument("decay '" + text + "': expected uniform|window:W|exp:BETA|poly:DELTA");
}

}  // namespace decfilt
