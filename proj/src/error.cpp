#include "pcmatch/error.hpp"

namespace pcm {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::validation:
        return "validation";
    case ErrorKind::undefined:
        return "undefined";
    case ErrorKind::infeasible:
        return "infeasible";
    case ErrorKind::io:
        return "io";
    }
    return "unknown";
}

} // namespace pcm
