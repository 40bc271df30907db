#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "modlik/model.hpp"

namespace modlik::io {

// Plain-text numeric tables:
//
//   # key=value        metadata comments, any number, before the header
//   col_a,col_b,...    header row
//   1,2.5,...          one data row per line, comma separated
//
// Blank lines are ignored. Doubles are written with 17 significant digits so
// every binary64 value survives a write/read cycle unchanged.
struct Table {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;  // source line of each row, 1-based; may be empty
};

std::string format_double(double value);

void write_table(std::ostream& out, const Table& table);
void write_table(const std::filesystem::path& path, const Table& table);

// `source` prefixes FormatError messages as "source:line: ...".
Table read_table(std::istream& in, const std::string& source);
Table read_table(const std::filesystem::path& path);

// Spectrum file: header "channel,F,m", channels contiguous from 0, F > 0.
struct SpectrumFile {
  SignalModel signal;
  Spectrum spectrum;
  std::map<std::string, std::string> metadata;
};

Table spectrum_table(const SignalModel& signal, const Spectrum& spectrum,
                     std::map<std::string, std::string> metadata = {});
SpectrumFile parse_spectrum(const Table& table, const std::string& source);
void write_spectrum_file(const std::filesystem::path& path, const SignalModel& signal,
                         const Spectrum& spectrum, std::map<std::string, std::string> metadata = {});
SpectrumFile read_spectrum_file(const std::filesystem::path& path);

// Noise file: header "channel,bg"; metadata "seed" (optional) and
// "standardized" (true/false).
Table noise_table(const NoiseSequence& noise);
NoiseSequence parse_noise(const Table& table, const std::string& source);
void write_noise_file(const std::filesystem::path& path, const NoiseSequence& noise);
NoiseSequence read_noise_file(const std::filesystem::path& path);

}  // namespace modlik::io
