#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lcsg {

enum class ErrorCode {
  syntax,
  undeclared_symbol,
  duplicate_symbol,
  missing_start,
  invalid_grammar,
  no_match,
  out_of_range,
  not_noncontracting,
  fuel_exhausted,
  dead_end,
  zero_mass,
  bound_mismatch,
  unknown_token,
  end_token,
  not_left_linearizable,
  empty_corpus,
  nonconforming_record,
  replay_mismatch,
  unsupported_infinite_state,
  state_budget_exceeded,
  invalid_argument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::syntax: return "SyntaxError";
    case ErrorCode::undeclared_symbol: return "UndeclaredSymbol";
    case ErrorCode::duplicate_symbol: return "DuplicateSymbol";
    case ErrorCode::missing_start: return "MissingStart";
    case ErrorCode::invalid_grammar: return "InvalidGrammar";
    case ErrorCode::no_match: return "NoMatch";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::not_noncontracting: return "NotNoncontracting";
    case ErrorCode::fuel_exhausted: return "FuelExhausted";
    case ErrorCode::dead_end: return "DeadEnd";
    case ErrorCode::zero_mass: return "ZeroMass";
    case ErrorCode::bound_mismatch: return "BoundMismatch";
    case ErrorCode::unknown_token: return "UnknownToken";
    case ErrorCode::end_token: return "EndToken";
    case ErrorCode::not_left_linearizable: return "NotLeftLinearizable";
    case ErrorCode::empty_corpus: return "EmptyCorpus";
    case ErrorCode::nonconforming_record: return "NonconformingRecord";
    case ErrorCode::replay_mismatch: return "ReplayMismatch";
    case ErrorCode::unsupported_infinite_state: return "UnsupportedInfiniteState";
    case ErrorCode::state_budget_exceeded: return "StateBudgetExceeded";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

/// Every failure raised by the library. `code` identifies the failure class;
/// `line`/`column` are 1-based and set for syntax errors, `index` is set when
/// the failure concerns one element of a sequence (production, step).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  static Error at(ErrorCode code, const std::string& message, std::size_t line, std::size_t column) {
    Error e(code, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message);
    e.line_ = line;
    e.column_ = column;
    return e;
  }

  static Error at_index(ErrorCode code, const std::string& message, std::size_t index) {
    Error e(code, message);
    e.index_ = index;
    return e;
  }

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  std::optional<std::size_t> column() const noexcept { return column_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::optional<std::size_t> column_;
  std::optional<std::size_t> index_;
};

}  // namespace lcsg
