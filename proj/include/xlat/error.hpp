#pragma once

#include <stdexcept>
#include <string>

namespace xlat {

// Base for all toolkit errors so callers can catch everything in one place.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data (bad record line, bad config syntax, ...).
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid input that violates a documented invariant.
struct ValidationError : Error {
  using Error::Error;
};

// A required compiler/interpreter binary is missing or misconfigured.
// Deliberately distinct from a program failing to compile.
struct ToolchainError : Error {
  using Error::Error;
};

enum class ClientErrorKind {
  transport,   // could not reach the service at all
  timeout,     // request timed out
  http_status, // service answered with an error status
  schema,      // response did not match the wire schema
};

inline const char* to_string(ClientErrorKind k) {
  switch (k) {
    case ClientErrorKind::transport: return "transport";
    case ClientErrorKind::timeout: return "timeout";
    case ClientErrorKind::http_status: return "http_status";
    case ClientErrorKind::schema: return "schema";
  }
  return "?";
}

// Generation-service failure. `status` is the HTTP status when kind ==
// http_status, otherwise 0.
struct ClientError : Error {
  ClientErrorKind kind;
  int status;
  ClientError(ClientErrorKind k, const std::string& msg, int http_status = 0)
      : Error(msg), kind(k), status(http_status) {}
};

// Should-not-happen conditions (broken internal assumptions).
struct InternalError : Error {
  using Error::Error;
};

}  // namespace xlat
