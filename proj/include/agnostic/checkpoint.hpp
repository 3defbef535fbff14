#pragma once

#include <filesystem>
#include <iosfwd>

#include "agnostic/network.hpp"

namespace agnostic {

inline constexpr const char* kCheckpointMagic = "agnostic-checkpoint 1";

// Single text file: the version line, input shape, class count, the
// architecture between `architecture:` and `end`, then one `param <name>`
// line followed by a tensor text block per parameter.
void save_checkpoint(std::ostream& out, const Network& net);
Network load_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Network& net);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace agnostic
