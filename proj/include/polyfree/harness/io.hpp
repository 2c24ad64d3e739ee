#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyfree/core.hpp"
#include "polyfree/verify.hpp"

namespace polyfree::harness {

inline constexpr std::string_view kTraceHeader = "t,f_val,grad_norm,stepsize,dist_to_opt_sq";

/// Shortest decimal that parses back to exactly `v`; "inf", "-inf", "nan" for
/// non-finite values.
std::string format_double(double v);

/// Strict inverse of format_double. Throws std::invalid_argument.
double parse_double(std::string_view text);

void write_trace_csv(std::ostream& out, std::span<const IterateRecord> trace);
void write_trace_csv(const std::filesystem::path& path, std::span<const IterateRecord> trace);

/// Throws std::runtime_error naming the line on malformed input.
std::vector<IterateRecord> read_trace_csv(std::istream& in);
std::vector<IterateRecord> read_trace_csv(const std::filesystem::path& path);

nlohmann::json to_json(const CheckReport& report);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace polyfree::harness
