#pragma once

#include <functional>
#include <iostream>
#include <string>

namespace qsense {

/// Sink for non-fatal numerical notes (asymmetry, size estimates). Writes to
/// stderr unless replaced.
inline std::function<void(const std::string&)>& diagnostic_sink() {
    static std::function<void(const std::string&)> sink = [](const std::string& msg) {
        std::cerr << "qsense: " << msg << '\n';
    };
    return sink;
}

inline void diagnostic(const std::string& msg) {
    if (auto& s = diagnostic_sink()) s(msg);
}

} // namespace qsense
