#pragma once

#include <string>
#include <vector>

#include "pir/ir.hpp"

namespace pir {

struct VerifyContext {
    int param_count = -1;       // -1: unknown, LdArg indices unchecked
    bool allow_open = true;     // O may appear (inner function code)
    const Function* fn = nullptr;  // for checkpoint ids
};

/// Returns the list of violations; empty means well formed.
std::vector<std::string> verify(const Version& v, const VerifyContext& ctx = {});
std::vector<std::string> verify_function(const Function& f);
std::vector<std::string> verify_program(const Program& p);

}  // namespace pir
