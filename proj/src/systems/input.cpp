#include "nonholo/systems/input.hpp"

#include <algorithm>
#include <cmath>

#include "nonholo/error.hpp"

namespace nonholo::systems {
namespace {

bool finite_piece(const InputPiece& p) {
  if (!std::isfinite(p.start) || !std::isfinite(p.end) || !std::isfinite(p.amplitude) || !std::isfinite(p.omega) ||
      !std::isfinite(p.phase)) {
    return false;
  }
  return std::all_of(p.coeffs.begin(), p.coeffs.end(), [](double c) { return std::isfinite(c); });
}

}  // namespace

InputPiece InputPiece::constant(double start, double end, double value) {
  InputPiece p;
  p.kind = Kind::Constant;
  p.start = start;
  p.end = end;
  p.amplitude = value;
  return p;
}

InputPiece InputPiece::sinusoid(double start, double end, double amplitude, double omega, double phase) {
  InputPiece p;
  p.kind = Kind::Sinusoid;
  p.start = start;
  p.end = end;
  p.amplitude = amplitude;
  p.omega = omega;
  p.phase = phase;
  return p;
}

InputPiece InputPiece::polynomial(double start, double end, std::vector<double> coeffs) {
  InputPiece p;
  p.kind = Kind::Polynomial;
  p.start = start;
  p.end = end;
  p.coeffs = std::move(coeffs);
  return p;
}

double InputPiece::value(double t) const {
  const double tau = t - start;
  switch (kind) {
    case Kind::Constant:
      return amplitude;
    case Kind::Sinusoid:
      return amplitude * std::cos(omega * tau + phase);
    case Kind::Polynomial: {
      double acc = 0.0;
      for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * tau + *it;
      return acc;
    }
  }
  return 0.0;
}

double InputPiece::integral(double t) const {
  const double tau = t - start;
  switch (kind) {
    case Kind::Constant:
      return amplitude * tau;
    case Kind::Sinusoid:
      if (omega == 0.0) return amplitude * std::cos(phase) * tau;
      return amplitude / omega * (std::sin(omega * tau + phase) - std::sin(phase));
    case Kind::Polynomial: {
      double acc = 0.0;
      for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * tau + coeffs[k] / static_cast<double>(k + 1);
      return acc * tau;
    }
  }
  return 0.0;
}

InputSignal::InputSignal(std::vector<std::vector<InputPiece>> channels, double duration)
    : channels_(std::move(channels)), duration_(duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ValidationError("input duration must be positive");
  if (channels_.empty()) throw ValidationError("input needs at least one channel");
  const double tol = 1e-12 * std::max(1.0, duration);
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const auto& pieces = channels_[c];
    const std::string where = "input channel " + std::to_string(c + 1);
    if (pieces.empty()) throw ValidationError(where + " has no pieces");
    double cursor = 0.0;
    for (const auto& p : pieces) {
      if (!finite_piece(p)) throw ValidationError(where + " has a non-finite parameter");
      if (std::fabs(p.start - cursor) > tol) throw ValidationError(where + " pieces are not contiguous");
      if (!(p.end > p.start)) throw ValidationError(where + " has an empty or reversed piece");
      cursor = p.end;
    }
    if (std::fabs(cursor - duration) > tol) throw ValidationError(where + " does not cover [0, T]");
  }
  prefix_.resize(channels_.size());
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    double acc = 0.0;
    for (const auto& p : channels_[c]) {
      prefix_[c].push_back(acc);
      acc += p.integral(p.end);
    }
  }
}

InputSignal InputSignal::zero(int channels, double duration) {
  return constant(std::vector<double>(static_cast<std::size_t>(channels), 0.0), duration);
}

InputSignal InputSignal::constant(const std::vector<double>& values, double duration) {
  std::vector<std::vector<InputPiece>> ch;
  for (double v : values) ch.push_back({InputPiece::constant(0.0, duration, v)});
  return InputSignal(std::move(ch), duration);
}

InputSignal InputSignal::sinusoids(const std::vector<double>& amplitude, double omega, const std::vector<double>& phase,
                                   double duration) {
  if (amplitude.size() != phase.size()) throw ValidationError("sinusoid amplitude and phase counts differ");
  std::vector<std::vector<InputPiece>> ch;
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    ch.push_back({InputPiece::sinusoid(0.0, duration, amplitude[i], omega, phase[i])});
  }
  return InputSignal(std::move(ch), duration);
}

std::size_t InputSignal::locate(int channel, double t) const {
  const auto& pieces = this->pieces(channel);
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t, [](double v, const InputPiece& p) { return v < p.end; });
  if (it == pieces.end()) return pieces.size() - 1;
  return static_cast<std::size_t>(it - pieces.begin());
}

double InputSignal::value(int channel, double t) const { return value_in(channel, locate(channel, t), t); }

double InputSignal::value_in(int channel, std::size_t piece, double t) const {
  return pieces(channel)[piece].value(t);
}

double InputSignal::integral(int channel, double t) const {
  const std::size_t k = locate(channel, t);
  return prefix_[static_cast<std::size_t>(channel)][k] + pieces(channel)[k].integral(t);
}

std::vector<double> InputSignal::breakpoints() const {
  std::vector<double> out{0.0, duration_};
  for (const auto& ch : channels_) {
    for (const auto& p : ch) out.push_back(p.end);
  }
  std::sort(out.begin(), out.end());
  const double tol = 1e-12 * std::max(1.0, duration_);
  std::vector<double> unique;
  for (double b : out) {
    if (unique.empty() || b - unique.back() > tol) unique.push_back(b);
  }
  unique.back() = duration_;
  return unique;
}

InputSignal InputSignal::scaled(double factor) const {
  auto ch = channels_;
  for (auto& pieces : ch) {
    for (auto& p : pieces) {
      p.amplitude *= factor;
      for (auto& c : p.coeffs) c *= factor;
    }
  }
  return InputSignal(std::move(ch), duration_);
}

}  // namespace nonholo::systems
