#include "mpdr/error.hpp"

namespace mpdr {

const char* error_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const ParseError*>(&e)) return "parse";
    if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate_input";
    if (dynamic_cast<const NumericError*>(&e)) return "numeric";
    if (dynamic_cast<const IntegrityError*>(&e)) return "integrity";
    if (dynamic_cast<const IoError*>(&e)) return "io";
    if (dynamic_cast<const ContractError*>(&e)) return "contract";
    return "internal";
}

} // namespace mpdr
