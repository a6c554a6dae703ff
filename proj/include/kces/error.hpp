#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kces {

enum class ErrorCode {
  // workflow validation
  CycleDetected,
  DanglingParent,
  DeadlineMismatch,
  DuplicateTask,
  InvalidTask,
  Disconnected,
  MultipleSinks,
  // timing / engine
  ZeroAllocation,
  UnknownNode,
  NonPositiveHeadroom,
  NoNodeInScene,
  // store
  NotFound,
  // collaboration
  NoAlternativeNode,
  NoCloudCapacity,
  // injector
  IndivisibleTotal,
  InvalidSchedule,
  // simulation
  Nonterminating,
  IllegalTransition,
  // metrics
  IncompleteTrace,
  ConfigMismatch,
  // io / configuration
  ParseError,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kces
