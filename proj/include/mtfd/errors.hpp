#ifndef MTFD_ERRORS_HPP
#define MTFD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mtfd {

// Invalid problem description (non-elliptic coefficient, bad orders, ...).
class spec_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Runtime numerical failure (singular system, quadrature blowup, ...).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mtfd

#endif
