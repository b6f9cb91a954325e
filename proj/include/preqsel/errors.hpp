// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <stdexcept>
#include <string>

namespace preqsel {

// Design matrix (or a required sub-block) does not have full column rank.
class rank_deficient_error : public std::runtime_error {
 public:
  explicit rank_deficient_error(const std::string& what)
      : std::runtime_error(what) {}
};

// The leading p x p block of the design is singular; the recursion cannot
// start without reordering rows, which the caller must do explicitly.
class row_ordering_error : public std::runtime_error {
 public:
  explicit row_ordering_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Fewer observations than an operation's degrees-of-freedom requirement.
class insufficient_data_error : public std::runtime_error {
 public:
  explicit insufficient_data_error(const std::string& what)
      : std::runtime_error(what) {}
};

// The predictive distribution is degenerate (zero residual sum of squares),
// so the unknown-variance score is undefined.
class degenerate_predictive_error : public std::runtime_error {
 public:
  explicit degenerate_predictive_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace preqsel
