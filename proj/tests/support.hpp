#pragma once

#include <string>

#include "tbc/spec_io.hpp"

namespace tbc::test {

inline std::string fixture_path(const std::string& name) {
    return std::string(TBC_FIXTURE_DIR) + "/" + name;
}

inline InterfaceSpec bmi_spec() {
    return parse_interface_spec(read_file(fixture_path("bmi.json")));
}

// one parameter of each kind, used where strings and booleans must be exercised
inline InterfaceSpec mixed_spec() {
    return parse_interface_spec(R"({
      "command": "mixed.sh",
      "parameters": [
        {"name": "x", "type": "double", "min": -5, "max": 5},
        {"name": "n", "type": "integer", "min": -3, "max": 7},
        {"name": "flag", "type": "boolean"},
        {"name": "mode", "type": "string", "values": ["fast", "slow", "off"]}
      ],
      "output": [{"name": "out", "type": "double"}]
    })");
}

} // namespace tbc::test
