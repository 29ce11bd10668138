#pragma once

#include <stdexcept>
#include <string>

namespace loynes {

// Invalid parameters, specs, or run configuration. The CLI maps this family
// to exit code 1.
class parameter_error : public std::invalid_argument {
  public:
    explicit parameter_error(const std::string &msg) : std::invalid_argument(msg) {}
};

// Problems with data rather than parameters: malformed files, empty input,
// traces too short for an operation, I/O failures. The CLI maps this family
// to exit code 2.
class data_error : public std::runtime_error {
  public:
    explicit data_error(const std::string &msg) : std::runtime_error(msg) {}
};

class format_error : public data_error {
  public:
    explicit format_error(const std::string &msg) : data_error(msg) {}
};

class empty_input_error : public data_error {
  public:
    explicit empty_input_error(const std::string &msg) : data_error(msg) {}
};

class insufficient_data_error : public data_error {
  public:
    explicit insufficient_data_error(const std::string &msg) : data_error(msg) {}
};

class io_error : public data_error {
  public:
    explicit io_error(const std::string &msg) : data_error(msg) {}
};

} // namespace loynes
