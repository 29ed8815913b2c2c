#pragma once

#include "fracspec/fractal_operator.hpp"

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace fracspec::io {

// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

// %.17g formatting.
std::string format_double(double v);

// "# fracspec <version> config=<hash>"
std::string csv_header_comment(const std::string& config_hash);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Pretty JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

void write_spectrum_csv(const std::filesystem::path& path, const std::vector<std::complex<double>>& spectrum,
                        const std::string& config_hash);

// Binary dump: "FSOP1\n", u64 header length, provenance JSON, u64 rows, u64 cols, row-major (re, im) doubles.
void write_operator_dump(const std::filesystem::path& path, const DiscretizedOperator& op, const nlohmann::json& provenance);

struct OperatorDump {
    nlohmann::json provenance;
    Eigen::MatrixXcd matrix;
};
OperatorDump read_operator_dump(const std::filesystem::path& path);

} // namespace fracspec::io
