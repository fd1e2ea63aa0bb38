#pragma once

#include <stdexcept>
#include <string>

namespace treegroup {

// Violated precondition on otherwise well-formed input (CLI exit code 2).
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A configured budget (nodes, depth, tuple count, ...) would be exceeded.
// Raised instead of silently truncating (CLI exit code 3).
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace treegroup
