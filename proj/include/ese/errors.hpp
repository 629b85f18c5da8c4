#ifndef ESE_ERRORS_HPP
#define ESE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ese {

// Bad input, bad config, violated dataset invariant. The CLI maps this
// class to exit code 1; everything else thrown is a runtime error (exit 2).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ese

#endif
