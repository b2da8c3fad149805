#ifndef EFRES_ERRORS_HPP
#define EFRES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace efres {

// Base class for all numeric/model failures raised by the toolkit.
// Configuration and I/O problems use std::runtime_error directly so the
// CLI can map the two families to distinct exit codes.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

class invalid_parameter_error : public error {
public:
    using error::error;
};

class truncation_error : public error {
public:
    using error::error;
};

// Analytic-regime violation (e.g. cubic with complex roots).
class domain_error : public error {
public:
    using error::error;
};

class classification_error : public error {
public:
    using error::error;
};

class physicality_error : public error {
public:
    using error::error;
};

class stiffness_error : public error {
public:
    using error::error;
};

class degeneracy_error : public error {
public:
    using error::error;
};

class fit_error : public error {
public:
    using error::error;
};

class data_error : public error {
public:
    using error::error;
};

class range_error : public error {
public:
    using error::error;
};

} // namespace efres

#endif
