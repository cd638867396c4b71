// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace risntn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define RISNTN_ERROR(Name)                                                  \
    class Name : public Error {                                             \
    public:                                                                 \
        using Error::Error;                                                 \
        const char* kind() const noexcept override { return #Name; }        \
    };

RISNTN_ERROR(InvalidInput)
RISNTN_ERROR(DegenerateGeometry)
RISNTN_ERROR(ZeroSnr)
RISNTN_ERROR(SingularFim)
RISNTN_ERROR(NoFeasibleCodeword)
RISNTN_ERROR(InvalidConfig)

#undef RISNTN_ERROR

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::string field)
        : Error(what), line_(line), field_(std::move(field)) {}
    const char* kind() const noexcept override { return "ParseError"; }
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}
    const char* kind() const noexcept override { return "ValidationError"; }
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid configuration:";
        for (const auto& x : v) s += "\n  - " + x;
        return s;
    }
    std::vector<std::string> violations_;
};

} // namespace risntn
