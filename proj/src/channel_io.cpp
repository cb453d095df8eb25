#include "rsma/channel_io.hpp"

#include <fstream>
#include <sstream>

namespace rsma {

std::vector<ChannelSet> read_channels(std::istream& in) {
    std::vector<ChannelSet> sets;
    std::string line, pending_meta;
    std::uint64_t pending_seed = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            pending_meta += line + "\n";
            std::istringstream ms(line.substr(1));
            std::string key;
            ms >> key;
            if (key == "seed") ms >> pending_seed;
            continue;
        }
        std::istringstream hs(line);
        ChannelSet ch;
        if (!(hs >> ch.K >> ch.M))
            throw std::runtime_error("channel file: bad header line: " + line);
        ch.seed = pending_seed;
        ch.meta = pending_meta;
        pending_meta.clear();
        pending_seed = 0;
        ch.h.resize(ch.K);
        for (int k = 0; k < ch.K; ++k) {
            if (!std::getline(in, line))
                throw std::runtime_error("channel file: truncated record");
            std::istringstream ls(line);
            ch.h[k].resize(ch.M);
            for (int m = 0; m < ch.M; ++m) {
                std::string tok;
                if (!(ls >> tok))
                    throw std::runtime_error("channel file: short channel row");
                const auto comma = tok.find(',');
                if (comma == std::string::npos)
                    throw std::runtime_error("channel file: entry not re,im: " + tok);
                ch.h[k](m) = {std::stod(tok.substr(0, comma)),
                              std::stod(tok.substr(comma + 1))};
            }
        }
        ch.validate();
        sets.push_back(std::move(ch));
    }
    return sets;
}

std::vector<ChannelSet> read_channel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open channel file: " + path);
    return read_channels(in);
}

void write_channels(std::ostream& out, const std::vector<ChannelSet>& sets) {
    char buf[64];
    for (const auto& ch : sets) {
        if (!ch.meta.empty())
            out << ch.meta;
        else if (ch.seed)
            out << "# seed " << ch.seed << "\n";
        out << ch.K << " " << ch.M << "\n";
        for (int k = 0; k < ch.K; ++k) {
            for (int m = 0; m < ch.M; ++m) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g", ch.h[k](m).real(),
                              ch.h[k](m).imag());
                out << (m ? " " : "") << buf;
            }
            out << "\n";
        }
    }
}

void write_channel_file(const std::string& path,
                        const std::vector<ChannelSet>& sets) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write channel file: " + path);
    write_channels(out, sets);
}

}  // namespace rsma
