#include "ksinsense/io.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ksi {

std::string format_g17(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << content;
    if (!out) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fields_csv(const Grid& grid, const TimeGrid& tg,
                       const std::vector<std::pair<std::string, const SpaceTimeField*>>& cols) {
    std::string out = "t,x";
    for (const auto& [name, f] : cols) {
        (void)f;
        out += "," + name;
    }
    out += "\n";
    const int n = grid.n_interior();
    for (int level = 0; level <= tg.n_steps(); ++level) {
        const std::string t = format_g17(tg.t(level));
        for (int node = 0; node <= grid.n_cells(); ++node) {
            out += t;
            out += ",";
            out += format_g17(grid.x(node));
            for (const auto& [name, f] : cols) {
                (void)name;
                const double v =
                    (node == 0 || node > n) ? 0.0 : f->at(level, node - 1);
                out += ",";
                out += format_g17(v);
            }
            out += "\n";
        }
    }
    return out;
}

std::string weights_csv(const WeightSet& ws, const Grid& grid) {
    std::string out = "t,x,phi,xi,phi_hat,xi_star,S,Z,rho\n";
    for (int j = 0; j < ws.n_tmid; ++j) {
        const std::string t = format_g17(ws.t_mid[j]);
        for (int node = 0; node < ws.n_nodes; ++node) {
            out += t;
            out += "," + format_g17(grid.x(node));
            out += "," + format_g17(ws.at(ws.phi, j, node));
            out += "," + format_g17(ws.at(ws.xi, j, node));
            out += "," + format_g17(ws.phi_hat[j]);
            out += "," + format_g17(ws.xi_star[j]);
            out += "," + format_g17(ws.at(ws.frak_s, j, node));
            out += "," + format_g17(ws.at(ws.frak_z, j, node));
            out += "," + format_g17(ws.rho[j]);
            out += "\n";
        }
    }
    return out;
}

std::vector<SpaceTimeField> parse_fields_csv(const std::string& text,
                                             const Grid& grid, const TimeGrid& tg,
                                             const std::vector<std::string>& cols) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("parse_fields_csv: empty file");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string tok;
        while (std::getline(hs, tok, ',')) header.push_back(tok);
    }
    std::vector<int> col_idx;
    for (const auto& want : cols) {
        int found = -1;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == want) found = static_cast<int>(i);
        }
        if (found < 0) throw Error("parse_fields_csv: missing column " + want);
        col_idx.push_back(found);
    }

    std::vector<SpaceTimeField> out(cols.size(),
                                    SpaceTimeField::zeros(grid, tg));
    const double h = grid.h();
    const double dt = tg.dt();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() < header.size()) {
            throw Error("parse_fields_csv: short row");
        }
        const int level = static_cast<int>(std::llround(vals[0] / dt));
        const int node = static_cast<int>(std::llround(vals[1] / h));
        if (level < 0 || level > tg.n_steps() || node < 0 ||
            node > grid.n_cells()) {
            throw Error("parse_fields_csv: row off the mesh");
        }
        if (node == 0 || node == grid.n_cells()) continue;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out[c].at(level, node - 1) = vals[col_idx[c]];
        }
    }
    return out;
}

namespace {

/// Compact SHA-1 (FIPS 180-1), enough for content hashes in run manifests.
class Sha1 {
public:
    void update(const unsigned char* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            buf_[buf_len_++] = data[i];
            ++total_;
            if (buf_len_ == 64) {
                process();
                buf_len_ = 0;
            }
        }
    }

    std::string hex_digest() {
        const std::uint64_t bits = total_ * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (buf_len_ != 56) update(&zero, 1);
        for (int i = 7; i >= 0; --i) {
            unsigned char b = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
            update(&b, 1);
        }
        std::string out;
        out.reserve(40);
        static const char* digits = "0123456789abcdef";
        for (std::uint32_t word : h_) {
            for (int i = 7; i >= 0; --i) {
                out += digits[(word >> (4 * i)) & 0xf];
            }
        }
        return out;
    }

private:
    static std::uint32_t rol(std::uint32_t v, int n) {
        return (v << n) | (v >> (32 - n));
    }

    void process() {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(buf_[4 * i]) << 24) |
                   (std::uint32_t(buf_[4 * i + 1]) << 16) |
                   (std::uint32_t(buf_[4 * i + 2]) << 8) |
                   std::uint32_t(buf_[4 * i + 3]);
        }
        for (int i = 16; i < 80; ++i) {
            w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        }
        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | ((~b) & d);
                k = 0x5a827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ed9eba1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8f1bbcdcu;
            } else {
                f = b ^ c ^ d;
                k = 0xca62c1d6u;
            }
            const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = tmp;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
    }

    std::array<std::uint32_t, 5> h_{0x67452301u, 0xefcdab89u, 0x98badcfeu,
                                    0x10325476u, 0xc3d2e1f0u};
    unsigned char buf_[64] = {};
    std::size_t buf_len_ = 0;
    std::uint64_t total_ = 0;
};

} // namespace

std::string sha1_hex(const std::string& bytes) {
    Sha1 s;
    s.update(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
    return s.hex_digest();
}

std::string git_blob_sha1(const std::string& content) {
    std::string blob = "blob " + std::to_string(content.size());
    blob.push_back('\0');
    blob += content;
    return sha1_hex(blob);
}

} // namespace ksi
