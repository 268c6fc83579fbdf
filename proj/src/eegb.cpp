// EEGB binary and CSV epoch I/O.
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "ecselect/error.hpp"
#include "ecselect/signal.hpp"

namespace ecselect {

namespace {

constexpr char kMagic[4] = {'E', 'E', 'G', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError(std::string("truncated EEGB file while reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t lead = 0;
    while (lead < cell.size() && cell[lead] == ' ') ++lead;
    cells.push_back(cell.substr(lead));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, std::size_t row) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (!s.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("CSV row " + std::to_string(row) + ": cannot parse '" + s + "'");
  }
  return v;
}

}  // namespace

EpochFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv" ? EpochFormat::kCsv : EpochFormat::kEegb;
}

void write_eegb(const EpochSet& epochs, std::ostream& out) {
  nlohmann::json header;
  header["fs"] = epochs.fs();
  header["channels"] = epochs.channel_names();
  header["n_trials"] = epochs.n_trials();
  header["n_samples"] = epochs.n_samples();
  if (epochs.has_labels()) header["labels"] = *epochs.labels();
  const std::string text = header.dump();

  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : epochs.data()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!out) throw FormatError("failed writing EEGB stream");
}

EpochSet read_eegb(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw FormatError("not an EEGB file (bad magic)");
  }
  const std::uint32_t version = get_u32(in, "version");
  if (version != kVersion) {
    throw FormatError("unsupported EEGB version " + std::to_string(version));
  }
  const std::uint32_t header_len = get_u32(in, "header length");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), header_len)) throw FormatError("truncated EEGB header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed EEGB header: ") + e.what());
  }

  double fs = 0.0;
  std::vector<std::string> names;
  std::size_t n_trials = 0;
  std::size_t n_samples = 0;
  std::optional<std::vector<int>> labels;
  try {
    fs = header.at("fs").get<double>();
    names = header.at("channels").get<std::vector<std::string>>();
    n_trials = header.at("n_trials").get<std::size_t>();
    n_samples = header.at("n_samples").get<std::size_t>();
    if (header.contains("labels") && !header["labels"].is_null()) {
      labels = header["labels"].get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed EEGB header: ") + e.what());
  }

  const std::size_t expected = n_trials * names.size() * n_samples;
  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (payload.size() != expected * 4) {
    throw FormatError("EEGB dimension mismatch: header declares " + std::to_string(expected) +
                      " values, payload holds " + std::to_string(payload.size() / 4) +
                      (payload.size() % 4 ? " (plus a partial value)" : ""));
  }
  std::vector<double> data(expected);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < expected; ++i) {
    const unsigned char* b = bytes + 4 * i;
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                            (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    data[i] = static_cast<double>(std::bit_cast<float>(u));
  }
  return EpochSet(std::move(data), n_trials, make_channels(names), n_samples, fs,
                  std::move(labels));
}

void write_csv(const EpochSet& epochs, std::ostream& out) {
  if (epochs.n_trials() != 1) {
    throw FormatError("CSV holds exactly one trial; use EEGB for multi-trial data");
  }
  out << 't';
  for (const auto& c : epochs.channels()) out << ',' << c.name;
  out << '\n';
  out.precision(17);
  for (std::size_t s = 0; s < epochs.n_samples(); ++s) {
    out << static_cast<double>(s) / epochs.fs();
    for (std::size_t c = 0; c < epochs.n_channels(); ++c) out << ',' << epochs.at(0, c, s);
    out << '\n';
  }
}

EpochSet read_csv(std::istream& in, std::optional<double> fs) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV file");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t") {
    throw FormatError("CSV header must be \"t,<ch1>,<ch2>,...\"");
  }
  const std::vector<std::string> names(header.begin() + 1, header.end());
  const std::size_t n_ch = names.size();

  std::vector<double> times;
  std::vector<std::vector<double>> columns(n_ch);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != n_ch + 1) {
      throw FormatError("CSV row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(n_ch + 1));
    }
    times.push_back(parse_double(cells[0], row));
    for (std::size_t c = 0; c < n_ch; ++c) columns[c].push_back(parse_double(cells[c + 1], row));
  }
  if (times.empty()) throw FormatError("CSV has no data rows");

  double rate = 0.0;
  if (fs) {
    rate = *fs;
  } else {
    if (times.size() < 2) throw FormatError("cannot infer sampling rate from a single CSV row");
    const double span = times.back() - times.front();
    if (!(span > 0.0)) throw FormatError("CSV time column must be increasing");
    // Rounded to 1e-6 Hz so that printed time stamps reproduce the original rate.
    rate = std::round(static_cast<double>(times.size() - 1) / span * 1e6) / 1e6;
  }

  const std::size_t n = times.size();
  std::vector<double> data(n_ch * n);
  for (std::size_t c = 0; c < n_ch; ++c) {
    std::copy(columns[c].begin(), columns[c].end(), data.begin() + static_cast<std::ptrdiff_t>(c * n));
  }
  return EpochSet(std::move(data), 1, make_channels(names), n, rate);
}

EpochSet load_epochs(const std::filesystem::path& path, EpochFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return format == EpochFormat::kCsv ? read_csv(in) : read_eegb(in);
}

void save_epochs(const EpochSet& epochs, const std::filesystem::path& path, EpochFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  if (format == EpochFormat::kCsv) {
    write_csv(epochs, out);
  } else {
    write_eegb(epochs, out);
  }
}

}  // namespace ecselect
