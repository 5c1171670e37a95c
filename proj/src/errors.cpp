#include "massera/errors.hpp"

#include <fmt/format.h>

#include <utility>

namespace massera {

ParseError::ParseError(std::size_t position, std::string message, std::string expected)
    : Error(fmt::format("parse error at offset {}: {} (expected {})", position, message, expected)),
      position_(position),
      detail_(std::move(message)),
      expected_(std::move(expected)) {}

EvalError::EvalError(std::string node_path, double operand, const std::string& what)
    : Error(fmt::format("{} at {} (operand {})", what, node_path, operand)),
      node_path_(std::move(node_path)),
      operand_(operand) {}

DomainError::DomainError(double t, double x, const std::string& what)
    : Error(fmt::format("cannot evaluate field at t={}, x={}: {}", t, x, what)), t_(t), x_(x) {}

IntegrationError::IntegrationError(double t_last, double x_last, const std::string& what)
    : Error(fmt::format("integration failed: {} (last good state t={}, x={})", what, t_last, x_last)),
      t_last_(t_last),
      x_last_(x_last) {}

IterationError::IterationError(long long step, double x, const std::string& what)
    : Error(fmt::format("iteration failed at step {} (x={}): {}", step, x, what)), step_(step), x_(x) {}

}  // namespace massera
