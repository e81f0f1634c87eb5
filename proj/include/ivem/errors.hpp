#pragma once

#include <stdexcept>
#include <string>

namespace ivem {

// Base for every failure raised by the library. Each subclass names the
// pipeline stage that failed so the CLI can map it to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error { public: using Error::Error; };
class SingularMetricError : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class TopologyError : public Error { public: using Error::Error; };
class GenerationError : public Error { public: using Error::Error; };
class GeometryError : public Error { public: using Error::Error; };
class UnsupportedOrder : public Error { public: using Error::Error; };
class SingularProjector : public Error { public: using Error::Error; };
class SolveError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace ivem

#include <exception>

namespace ivem {

/// Rethrows the library error held by `error` as the same type with
/// `context` prepended to its message. Other exceptions pass through.
[[noreturn]] inline void rethrow_with_context(const std::exception_ptr& error,
                                              const std::string& context) {
  try {
    std::rethrow_exception(error);
  } catch (const DomainError& e) {
    throw DomainError(context + e.what());
  } catch (const SingularMetricError& e) {
    throw SingularMetricError(context + e.what());
  } catch (const GeometryError& e) {
    throw GeometryError(context + e.what());
  } catch (const UnsupportedOrder& e) {
    throw UnsupportedOrder(context + e.what());
  } catch (const SingularProjector& e) {
    throw SingularProjector(context + e.what());
  } catch (const SolveError& e) {
    throw SolveError(context + e.what());
  } catch (const Error& e) {
    throw Error(context + e.what());
  }
}

}  // namespace ivem
