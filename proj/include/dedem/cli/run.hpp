#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dedem::cli {

/// Runs one command line (without the program name). Artifacts go to --out;
/// progress goes to `out`; failures print one JSON line to `err` and return
/// a nonzero status (2 for usage errors, 1 otherwise).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a, used for the scenario hash in manifests.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace dedem::cli
