#pragma once

// Piecewise-analytic input signals. Each piece is evaluated in its own local
// time tau = t - start, so a sinusoid piece is a*cos(omega*tau + phase) and a
// polynomial piece is sum_k c_k tau^k.

#include <cstddef>
#include <vector>

namespace nonholo::systems {

struct InputPiece {
  enum class Kind { Constant, Sinusoid, Polynomial };

  Kind kind = Kind::Constant;
  double start = 0.0;
  double end = 0.0;
  double amplitude = 0.0;  // the constant value for Constant pieces
  double omega = 0.0;
  double phase = 0.0;
  std::vector<double> coeffs;

  static InputPiece constant(double start, double end, double value);
  static InputPiece sinusoid(double start, double end, double amplitude, double omega, double phase);
  static InputPiece polynomial(double start, double end, std::vector<double> coeffs);

  double value(double t) const;
  // Closed-form integral from `start` to t.
  double integral(double t) const;
};

class InputSignal {
 public:
  InputSignal() = default;
  // Throws ValidationError unless every channel's pieces are contiguous and
  // cover [0, duration] (boundaries matched to 1e-12 relative).
  InputSignal(std::vector<std::vector<InputPiece>> channels, double duration);

  static InputSignal zero(int channels, double duration);
  static InputSignal constant(const std::vector<double>& values, double duration);
  // One sinusoid piece per channel: amplitude[i] * cos(omega * t + phase[i]).
  static InputSignal sinusoids(const std::vector<double>& amplitude, double omega, const std::vector<double>& phase,
                               double duration);

  int channels() const { return static_cast<int>(channels_.size()); }
  double duration() const { return duration_; }
  const std::vector<InputPiece>& pieces(int channel) const { return channels_.at(static_cast<std::size_t>(channel)); }

  // Index of the piece containing t; the last piece owns the right endpoint.
  std::size_t locate(int channel, double t) const;
  double value(int channel, double t) const;
  double value_in(int channel, std::size_t piece, double t) const;
  // Integral over [0, t].
  double integral(int channel, double t) const;
  // Sorted union of all piece boundaries including 0 and the duration.
  std::vector<double> breakpoints() const;

  // Same pieces with every value multiplied by `factor`.
  InputSignal scaled(double factor) const;

 private:
  std::vector<std::vector<InputPiece>> channels_;
  std::vector<std::vector<double>> prefix_;  // integral up to each piece start
  double duration_ = 0.0;
};

}  // namespace nonholo::systems
