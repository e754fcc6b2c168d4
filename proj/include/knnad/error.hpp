#pragma once

#include <stdexcept>
#include <string>

namespace knnad {

/// Base class for every error raised on invalid input. The CLI maps these to
/// exit code 2; anything else escaping the library is an internal error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class LengthError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class SizeError : public Error { public: using Error::Error; };
class DegenerateInputError : public Error { public: using Error::Error; };

}  // namespace knnad
