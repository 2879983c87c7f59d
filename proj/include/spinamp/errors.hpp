#pragma once

#include <stdexcept>
#include <string>

namespace spinamp {

// Requested lattice or buffer does not fit the configured budget.
class sizing_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Argument outside the domain of an operation (site outside the lattice,
// coincident sites, mismatched grids).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Computation would exceed an enumeration limit that was not lifted.
class capacity_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A file could not be opened, read or written.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or input file. `field` names the offending key.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace spinamp
