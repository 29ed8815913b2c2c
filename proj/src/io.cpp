#include "fracspec/io.hpp"

#include "fracspec/error.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fracspec::io {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_header_comment(const std::string& config_hash) {
    return "# fracspec " + std::string(kVersion) + " config=" + config_hash + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io, "cannot open " + path.string() + " for writing");
    out << content;
    if (!out) fail(Errc::io, "write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_spectrum_csv(const std::filesystem::path& path, const std::vector<std::complex<double>>& spectrum,
                        const std::string& config_hash) {
    std::string out = csv_header_comment(config_hash) + "k,re,im,modulus\n";
    for (std::size_t k = 0; k < spectrum.size(); ++k)
        out += std::to_string(k + 1) + "," + format_double(spectrum[k].real()) + "," + format_double(spectrum[k].imag()) +
               "," + format_double(std::abs(spectrum[k])) + "\n";
    write_text(path, out);
}

namespace {

constexpr char kMagic[] = "FSOP1\n";

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) fail(Errc::io, "truncated operator dump");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

} // namespace

void write_operator_dump(const std::filesystem::path& path, const DiscretizedOperator& op, const nlohmann::json& provenance) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io, "cannot open " + path.string() + " for writing");
    const std::string header = provenance.dump();
    out.write(kMagic, sizeof kMagic - 1);
    put_u64(out, header.size());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    put_u64(out, static_cast<std::uint64_t>(op.matrix.rows()));
    put_u64(out, static_cast<std::uint64_t>(op.matrix.cols()));
    for (Eigen::Index i = 0; i < op.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < op.matrix.cols(); ++j) {
            const double pair[2] = {op.matrix(i, j).real(), op.matrix(i, j).imag()};
            out.write(reinterpret_cast<const char*>(pair), sizeof pair);
        }
    if (!out) fail(Errc::io, "write to " + path.string() + " failed");
}

OperatorDump read_operator_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot open " + path.string());
    char magic[sizeof kMagic - 1];
    in.read(magic, sizeof magic);
    if (!in || std::string(magic, sizeof magic) != kMagic) fail(Errc::io, path.string() + " is not an operator dump");
    const auto len = get_u64(in);
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    OperatorDump dump;
    dump.provenance = nlohmann::json::parse(header);
    const auto rows = static_cast<Eigen::Index>(get_u64(in));
    const auto cols = static_cast<Eigen::Index>(get_u64(in));
    dump.matrix.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            double pair[2];
            in.read(reinterpret_cast<char*>(pair), sizeof pair);
            if (!in) fail(Errc::io, "truncated operator dump");
            dump.matrix(i, j) = {pair[0], pair[1]};
        }
    return dump;
}

} // namespace fracspec::io
