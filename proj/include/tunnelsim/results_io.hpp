#pragma once

// Result tables (CSV), atomic file writes and the spec hash.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelsim/analysis.hpp"

namespace tunnelsim {

inline constexpr std::string_view kResultHeader =
    "a_s_a0,V0_over_E,sigma_b_lz,source,realization,T,N_T,N_R,N_lost,t_end,seed";

/// Rows in canonical order: point, then GPE before BVE, then realization.
void sort_rows(std::vector<TransmissionResult>& rows);

std::string format_results_csv(const std::vector<TransmissionResult>& rows);
/// Throws SchemaError on a missing header, missing columns or an empty table.
std::vector<TransmissionResult> parse_results_csv(std::string_view text);

std::vector<TransmissionResult> read_results_csv(const std::filesystem::path& path);
void write_results_csv(const std::filesystem::path& path, std::vector<TransmissionResult> rows);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data) noexcept;
std::string hex64(std::uint64_t v);

/// Shortest decimal form that round-trips the double.
std::string format_double(double v);

}  // namespace tunnelsim
