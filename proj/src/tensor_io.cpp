// ECT1 connectivity tensor files.
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "json.hpp"

#include "ecselect/error.hpp"
#include "ecselect/spectral.hpp"

namespace ecselect {

namespace {

constexpr char kMagic[4] = {'E', 'C', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t le_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_ect1(const ConnectivityTensor& t, std::ostream& out) {
  t.validate();
  nlohmann::json header;
  header["metric"] = metric_name(t.metric);
  header["dims"] = {t.n_channels, t.n_channels, t.n_freqs, t.n_windows};
  header["freqs"] = t.grid.freqs;
  header["window_starts"] = t.window_starts;
  header["valid_windows"] = std::vector<bool>(t.valid_windows.begin(), t.valid_windows.end());
  // Optional extensions read back when present.
  if (!t.channel_names.empty()) header["channels"] = t.channel_names;
  if (t.fs > 0.0) header["fs"] = t.fs;
  const std::string text = header.dump();

  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!out) throw FormatError("failed writing ECT1 stream");
}

ConnectivityTensor read_ect1(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw FormatError("not an ECT1 file (bad magic)");
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t header_len = le_u32(raw + 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(header_len)) {
    throw FormatError("truncated ECT1 header");
  }

  ConnectivityTensor t;
  try {
    const auto header = nlohmann::json::parse(bytes.substr(8, header_len));
    t.metric = parse_metric(header.at("metric").get<std::string>());
    const auto dims = header.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 4 || dims[0] != dims[1]) throw FormatError("ECT1 dims must be [K,K,F,W]");
    t.n_channels = dims[0];
    t.n_freqs = dims[2];
    t.n_windows = dims[3];
    t.grid.freqs = header.at("freqs").get<std::vector<double>>();
    t.window_starts = header.at("window_starts").get<std::vector<std::size_t>>();
    t.valid_windows = header.at("valid_windows").get<std::vector<bool>>();
    if (header.contains("channels")) {
      t.channel_names = header["channels"].get<std::vector<std::string>>();
    }
    if (header.contains("fs")) t.fs = header["fs"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed ECT1 header: ") + e.what());
  }

  const std::size_t expected = t.n_channels * t.n_channels * t.n_freqs * t.n_windows;
  const std::size_t payload = bytes.size() - 8 - header_len;
  if (payload != expected * 4) {
    throw FormatError("ECT1 dimension mismatch: header declares " + std::to_string(expected) +
                      " values, payload holds " + std::to_string(payload / 4));
  }
  t.values.resize(expected);
  const unsigned char* p = raw + 8 + header_len;
  for (std::size_t i = 0; i < expected; ++i) {
    t.values[i] = static_cast<double>(std::bit_cast<float>(le_u32(p + 4 * i)));
  }
  t.validate();
  return t;
}

void save_tensor(const ConnectivityTensor& tensor, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  write_ect1(tensor, out);
}

ConnectivityTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read_ect1(in);
}

}  // namespace ecselect
