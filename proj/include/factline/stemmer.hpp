#pragma once

#include <string>
#include <string_view>

namespace factline {

// Porter suffix-stripping stemmer. Input must already be lowercase a-z;
// words shorter than three letters come back unchanged.
std::string porter_stem(std::string_view word);

}  // namespace factline
