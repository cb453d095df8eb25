#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rsma/model.hpp"

namespace rsma {

/// Text channel records. Each record is a "K M" line followed by K lines of
/// M complex entries written as "re,im", row-major per user. Lines starting
/// with '#' hold metadata ("# seed <n>" is recognized) and attach to the
/// following record.
std::vector<ChannelSet> read_channels(std::istream& in);
std::vector<ChannelSet> read_channel_file(const std::string& path);
void write_channels(std::ostream& out, const std::vector<ChannelSet>& sets);
void write_channel_file(const std::string& path,
                        const std::vector<ChannelSet>& sets);

}  // namespace rsma
