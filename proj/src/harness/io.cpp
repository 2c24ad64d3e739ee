#include "polyfree/harness/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace polyfree::harness {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("failed to format a double");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument(fmt::format("not a number: \"{}\"", text));
  }
  return v;
}

void write_trace_csv(std::ostream& out, std::span<const IterateRecord> trace) {
  out << kTraceHeader << '\n';
  for (const IterateRecord& r : trace) {
    out << r.t << ',' << format_double(r.f_val) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.stepsize) << ',';
    if (r.dist_to_opt_sq) out << format_double(*r.dist_to_opt_sq);
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const IterateRecord> trace) {
  std::ostringstream out;
  write_trace_csv(out, trace);
  write_text_file(path, out.str());
}

std::vector<IterateRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error(fmt::format("trace CSV must start with header \"{}\"", kTraceHeader));
  }
  std::vector<IterateRecord> trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != 5) {
      throw std::runtime_error(fmt::format("line {}: expected 5 columns, got {}", line_no, cells.size()));
    }
    try {
      IterateRecord r;
      std::size_t t = 0;
      auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), t);
      if (ec != std::errc() || ptr != cells[0].data() + cells[0].size()) {
        throw std::invalid_argument("bad iteration index");
      }
      r.t = t;
      r.f_val = parse_double(cells[1]);
      r.grad_norm = parse_double(cells[2]);
      r.stepsize = parse_double(cells[3]);
      if (!cells[4].empty()) r.dist_to_opt_sq = parse_double(cells[4]);
      trace.push_back(r);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return trace;
}

std::vector<IterateRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return read_trace_csv(in);
}

nlohmann::json to_json(const CheckReport& report) {
  nlohmann::json j;
  j["check_name"] = report.check_name;
  j["n_points"] = report.n_points;
  j["n_violations"] = report.n_violations;
  j["worst_margin"] = report.worst_margin;
  if (report.witness) {
    nlohmann::json w;
    if (report.witness->t) w["t"] = *report.witness->t;
    if (!report.witness->x.empty()) w["x"] = report.witness->x;
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace polyfree::harness
