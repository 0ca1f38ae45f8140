#pragma once

#include <stdexcept>
#include <string>

namespace gammix {

// Malformed input file or text payload (score file, model file, embeddings,
// similarity matrix).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// The optimizer could not produce a fit (pathological data, bracket failure,
// sample below every component shift).
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

class TooFewSamplesError : public FitError {
 public:
  explicit TooFewSamplesError(const std::string& what) : FitError(what) {}
};

// A simulation request would exceed its configured sample cap.
class SizeCapError : public std::runtime_error {
 public:
  explicit SizeCapError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gammix
