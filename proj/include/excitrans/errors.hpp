#ifndef EXCITRANS_ERRORS_HPP
#define EXCITRANS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace excitrans {

/// Invalid or inconsistent input. `field()` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Non-finite values appeared in the integrated state.
class IntegrationDiverged : public std::runtime_error {
 public:
  explicit IntegrationDiverged(double t, int restart = -1)
      : std::runtime_error(message(t, restart)), time_(t), restart_(restart) {}
  double time() const { return time_; }
  /// Optimizer restart during which it happened, or -1.
  int restart() const { return restart_; }

 private:
  static std::string message(double t, int restart) {
    std::string m = "integration diverged at t = " + std::to_string(t);
    if (restart >= 0) m += " (restart " + std::to_string(restart) + ")";
    return m;
  }
  double time_;
  int restart_;
};

/// Non-finite gradient fed to the optimizer.
class OptimizerDiverged : public std::runtime_error {
 public:
  OptimizerDiverged(int iteration, int restart = -1)
      : std::runtime_error(message(iteration, restart)),
        iteration_(iteration),
        restart_(restart) {}
  int iteration() const { return iteration_; }
  int restart() const { return restart_; }

 private:
  static std::string message(int iteration, int restart) {
    std::string m = "optimizer diverged at iteration " + std::to_string(iteration);
    if (restart >= 0) m += " (restart " + std::to_string(restart) + ")";
    return m;
  }
  int iteration_;
  int restart_;
};

}  // namespace excitrans

#endif  // EXCITRANS_ERRORS_HPP
