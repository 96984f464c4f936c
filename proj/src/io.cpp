#include "xysim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xysim {

std::string bits_to_string(uint64_t bits, int n_q) {
  std::string s(n_q, '0');
  for (int q = 0; q < n_q; ++q)
    if ((bits >> q) & 1) s[n_q - 1 - q] = '1';
  return s;
}

uint64_t string_to_bits(const std::string& s) {
  uint64_t bits = 0;
  const int n = static_cast<int>(s.size());
  for (int k = 0; k < n; ++k) {
    if (s[k] == '1')
      bits |= 1ULL << (n - 1 - k);
    else if (s[k] != '0')
      throw std::invalid_argument("string_to_bits: bad character in '" + s + "'");
  }
  return bits;
}

std::string sample_set_to_text(const SampleSet& s) {
  std::ostringstream os;
  os << "n_q=" << s.n_q << " m=" << s.m << " basis=" << s.basis_label << " seed=" << s.seed
     << " shots=" << s.total << " in_sector=" << (s.in_sector ? 1 : 0) << "\n";
  for (const auto& [bits, c] : s.counts) os << bits_to_string(bits, s.n_q) << " " << c << "\n";
  return os.str();
}

SampleSet sample_set_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("sample set: empty input");
  SampleSet s;
  std::istringstream hs(header);
  std::string tok;
  uint64_t declared_shots = 0;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("sample set: bad header token " + tok);
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "n_q")
      s.n_q = std::stoi(val);
    else if (key == "m")
      s.m = std::stoi(val);
    else if (key == "basis")
      s.basis_label = val;
    else if (key == "seed")
      s.seed = std::stoull(val);
    else if (key == "shots")
      declared_shots = std::stoull(val);
    else if (key == "in_sector")
      s.in_sector = val == "1";
    else
      throw std::invalid_argument("sample set: unknown header key " + key);
  }
  std::string bits_str;
  uint64_t count;
  while (in >> bits_str >> count) s.add(string_to_bits(bits_str), count);
  s.finalize();
  if (declared_shots != 0 && declared_shots != s.total)
    throw std::invalid_argument("sample set: header shot count does not match rows");
  return s;
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace xysim
