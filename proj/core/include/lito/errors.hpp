#pragma once

#include <stdexcept>
#include <string>

namespace lito {

// Caller broke a documented precondition (dimension mismatch, out-of-range
// address, invalid probability, ...).
class contract_error : public std::logic_error {
public:
    explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// Input data is structurally valid but unusable (single-class dataset,
// rank-zero PCA input, malformed dataset file, ...).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration (missing file, invalid option combination).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lito
