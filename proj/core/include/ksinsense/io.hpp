#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ksinsense/carleman.hpp"
#include "ksinsense/field.hpp"

namespace ksi {

/// Full round-trip precision formatting used by every CSV writer.
std::string format_g17(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Space-time fields as CSV rows (t, x, col...) over all nodes including the
/// walls (where every state vanishes). UTF-8, LF, header row, 17 significant
/// digits.
std::string fields_csv(const Grid& grid, const TimeGrid& tg,
                       const std::vector<std::pair<std::string, const SpaceTimeField*>>& cols);

/// Weight families as CSV (t, x, phi, xi, phi_hat, xi_star, S, Z, rho) at the
/// sampled time midpoints.
std::string weights_csv(const WeightSet& ws, const Grid& grid);

/// Parse a fields CSV produced by fields_csv back into interior-node fields.
/// Column names must match; boundary rows are checked against zero and
/// dropped.
std::vector<SpaceTimeField> parse_fields_csv(const std::string& text,
                                             const Grid& grid, const TimeGrid& tg,
                                             const std::vector<std::string>& cols);

/// SHA-1 of a byte string, lowercase hex.
std::string sha1_hex(const std::string& bytes);
/// Git-style blob hash: sha1("blob <size>\0" + content).
std::string git_blob_sha1(const std::string& content);

} // namespace ksi
