#include "modlik/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "modlik/errors.hpp"

namespace modlik::io {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw FormatError(source + ":" + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_field(std::string_view text, const std::string& source, std::size_t line) {
  if (text.empty()) fail(source, line, "missing field");
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    fail(source, line, "not a finite number: '" + std::string(text) + "'");
  }
  return value;
}

void expect_header(const Table& table, const std::vector<std::string>& expected,
                   const std::string& source) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw FormatError(source + ": expected header '" + want + "'");
  }
}

std::size_t line_of(const Table& table, std::size_t row) {
  return row < table.row_lines.size() ? table.row_lines[row] : 0;
}

void expect_contiguous_channels(const Table& table, const std::string& source) {
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r][0] != static_cast<double>(r)) {
      fail(source, line_of(table, r),
           "channel " + format_double(table.rows[r][0]) + ", expected " + std::to_string(r));
    }
  }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_table(std::ostream& out, const Table& table) {
  for (const auto& [key, value] : table.metadata) out << "# " << key << '=' << value << '\n';
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out << (c ? "," : "") << table.header[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

void write_table(const std::filesystem::path& path, const Table& table) {
  auto out = open_for_write(path);
  write_table(out, table);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Table read_table(std::istream& in, const std::string& source) {
  Table table;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        table.metadata[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    if (table.header.empty()) {
      for (auto field : split(line)) {
        if (field.empty()) fail(source, line_no, "empty column name in header");
        table.header.emplace_back(field);
      }
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != table.header.size()) {
      fail(source, line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto field : fields) row.push_back(parse_field(field, source, line_no));
    table.rows.push_back(std::move(row));
    table.row_lines.push_back(line_no);
  }
  if (in.bad()) throw IoError(source + ": read error");
  if (table.header.empty()) throw FormatError(source + ": missing header row");
  return table;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_table(in, path.string());
}

Table spectrum_table(const SignalModel& signal, const Spectrum& spectrum,
                     std::map<std::string, std::string> metadata) {
  if (signal.size() != spectrum.size()) {
    throw InvalidArgument("spectrum_table: signal and spectrum lengths differ");
  }
  Table table;
  table.metadata = std::move(metadata);
  table.header = {"channel", "F", "m"};
  for (std::size_t i = 0; i < signal.size(); ++i) {
    table.rows.push_back({static_cast<double>(i), signal[i], spectrum[i]});
  }
  return table;
}

SpectrumFile parse_spectrum(const Table& table, const std::string& source) {
  expect_header(table, {"channel", "F", "m"}, source);
  if (table.rows.empty()) throw FormatError(source + ": no data rows");
  expect_contiguous_channels(table, source);
  std::vector<double> f, m;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (!(table.rows[r][1] > 0.0)) {
      fail(source, line_of(table, r), "F must be > 0");
    }
    f.push_back(table.rows[r][1]);
    m.push_back(table.rows[r][2]);
  }
  std::string desc = source;
  if (auto it = table.metadata.find("signal"); it != table.metadata.end()) desc = it->second;
  return {SignalModel(std::move(f), desc), Spectrum(std::move(m)), table.metadata};
}

void write_spectrum_file(const std::filesystem::path& path, const SignalModel& signal,
                         const Spectrum& spectrum, std::map<std::string, std::string> metadata) {
  if (!signal.description().empty()) metadata.try_emplace("signal", signal.description());
  write_table(path, spectrum_table(signal, spectrum, std::move(metadata)));
}

SpectrumFile read_spectrum_file(const std::filesystem::path& path) {
  return parse_spectrum(read_table(path), path.string());
}

Table noise_table(const NoiseSequence& noise) {
  Table table;
  if (noise.seed()) table.metadata["seed"] = std::to_string(*noise.seed());
  table.metadata["standardized"] = noise.standardized() ? "true" : "false";
  table.header = {"channel", "bg"};
  for (std::size_t i = 0; i < noise.size(); ++i) {
    table.rows.push_back({static_cast<double>(i), noise[i]});
  }
  return table;
}

NoiseSequence parse_noise(const Table& table, const std::string& source) {
  expect_header(table, {"channel", "bg"}, source);
  if (table.rows.empty()) throw FormatError(source + ": no data rows");
  expect_contiguous_channels(table, source);

  std::optional<std::uint64_t> seed;
  if (auto it = table.metadata.find("seed"); it != table.metadata.end()) {
    std::uint64_t value = 0;
    const auto& text = it->second;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw FormatError(source + ": metadata seed '" + text + "' is not an unsigned integer");
    }
    seed = value;
  }
  bool standardized = false;
  if (auto it = table.metadata.find("standardized"); it != table.metadata.end()) {
    if (it->second == "true") {
      standardized = true;
    } else if (it->second != "false") {
      throw FormatError(source + ": metadata standardized must be true or false");
    }
  }

  std::vector<double> bg;
  for (const auto& row : table.rows) bg.push_back(row[1]);
  try {
    return NoiseSequence(std::move(bg), seed, standardized);
  } catch (const InvalidArgument& e) {
    throw FormatError(source + ": " + e.what());
  }
}

void write_noise_file(const std::filesystem::path& path, const NoiseSequence& noise) {
  write_table(path, noise_table(noise));
}

NoiseSequence read_noise_file(const std::filesystem::path& path) {
  return parse_noise(read_table(path), path.string());
}

}  // namespace modlik::io
