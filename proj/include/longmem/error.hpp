#ifndef LONGMEM_ERROR_HPP
#define LONGMEM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace longmem {

/// Base class for all errors raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejected input: bad shapes, out-of-range parameters, malformed specs.
class validation_error : public error {
public:
    using error::error;
};

/// Numeric degeneracy: singular local covariance, non-PD matrices,
/// reducible chains, non-finite values encountered mid-computation.
class degeneracy_error : public error {
public:
    using error::error;
};

} // namespace longmem

#endif
