#pragma once

#include <stdexcept>
#include <string>

namespace smfft {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotCoprime : public Error {
 public:
  using Error::Error;
};

class OracleTooLarge : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Candidate support outgrew its cap; usually means mu or R were underestimated.
class CandidateBlowup : public Error {
 public:
  using Error::Error;
};

/// Every measurement draw failed the contraction certificate.
class ContractionFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace smfft
