#include "revhelp/util.hpp"

#include <charconv>

namespace revhelp {

std::string double_to_text(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace revhelp
