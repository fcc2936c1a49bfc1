#pragma once

#include <stdexcept>
#include <string>

namespace phindex {

// Raised for anything wrong with input data or with arguments derived from
// it. The CLI maps this to exit code 1; usage errors exit with 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace phindex
