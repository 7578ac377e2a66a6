#include "relprobe/encoders/rphs.hpp"

#include <fstream>
#include <json.hpp>

#include "relprobe/util/binary_io.hpp"

namespace relprobe::enc {

void write_rphs(const std::filesystem::path& path, const RphsRecord& rec) {
  if (rec.states.size() != std::size_t(rec.length) * rec.dim) {
    throw std::invalid_argument("rphs: payload size does not match L x d");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write("RPHS", 4);
  util::write_u32_le(os, kRphsVersion);
  util::write_u32_le(os, rec.length);
  util::write_u32_le(os, rec.dim);
  util::write_u32_le(os, rec.input_len);
  const char tail[4] = {static_cast<char>(rec.context), 0, 0, 0};
  os.write(tail, 4);
  for (float v : rec.states) util::write_f32_le(os, v);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

RphsRecord parse_rphs(const std::string& bytes, const std::string& what) {
  util::ByteReader rd(bytes, what);
  if (rd.remaining() < 4 || bytes.compare(0, 4, "RPHS") != 0) {
    throw RphsFormatError(what + ": bad magic at offset 0", 0);
  }
  rd.bytes(4, "magic");
  if (rd.remaining() < kRphsHeaderBytes - 4) {
    throw RphsFormatError(what + ": truncated header at offset " + std::to_string(rd.offset()),
                          rd.offset());
  }
  RphsRecord rec;
  const auto version = rd.u32("version");
  if (version != kRphsVersion) {
    throw RphsFormatError(what + ": unsupported version " + std::to_string(version) +
                              " at offset 4",
                          4);
  }
  rec.length = rd.u32("L");
  rec.dim = rd.u32("d");
  rec.input_len = rd.u32("input_len");
  const auto flag = rd.u8("context");
  rd.bytes(3, "reserved");
  if (flag > 1) {
    throw RphsFormatError(what + ": invalid context flag " + std::to_string(flag) + " at offset 20",
                          20);
  }
  rec.context = static_cast<ContextMode>(flag);
  if (rec.length == 0 || rec.dim == 0) {
    throw RphsFormatError(what + ": empty state matrix", 8);
  }
  if (rec.input_len > rec.length) {
    throw RphsFormatError(what + ": input_len " + std::to_string(rec.input_len) + " exceeds L " +
                              std::to_string(rec.length),
                          16);
  }
  if (rec.context == ContextMode::InputOnly && rec.input_len != rec.length) {
    throw RphsFormatError(what + ": input-only file must have input_len == L", 16);
  }
  const std::size_t n = std::size_t(rec.length) * rec.dim;
  if (rd.remaining() < 4 * n) {
    throw RphsFormatError(what + ": truncated payload at offset " + std::to_string(rd.offset()) +
                              " (need " + std::to_string(4 * n) + " bytes, have " +
                              std::to_string(rd.remaining()) + ")",
                          rd.offset());
  }
  rec.states.resize(n);
  for (auto& v : rec.states) v = rd.f32("payload");
  return rec;
}

RphsRecord read_rphs(const std::filesystem::path& path) {
  return parse_rphs(util::read_file(path.string()), path.string());
}

template <class T>
HiddenStates<T> load_hidden_states(const std::filesystem::path& path) {
  const auto rec = read_rphs(path);
  std::vector<T> data(rec.states.begin(), rec.states.end());
  return {ad::Tensor<T>::constant({rec.length, rec.dim}, std::move(data)), rec.input_len,
          rec.context};
}

std::vector<HiddenStateIndexEntry> read_hidden_state_index(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open hidden-state index " + path.string());
  std::vector<HiddenStateIndexEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      HiddenStateIndexEntry e;
      e.article_id = j.at("article_id").get<std::string>();
      e.date = j.at("date").get<std::string>();
      e.tickers = j.at("tickers").get<std::vector<std::string>>();
      e.file = j.contains("file") ? j["file"].get<std::string>() : e.article_id + ".rphs";
      if (e.file.is_relative()) e.file = path.parent_path() / e.file;
      if (!is_iso_date(e.date)) throw std::invalid_argument("bad date '" + e.date + "'");
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

void write_hidden_state_index(const std::filesystem::path& path,
                              const std::vector<HiddenStateIndexEntry>& entries) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& e : entries) {
    nlohmann::json j{{"article_id", e.article_id},
                     {"date", e.date},
                     {"tickers", e.tickers},
                     {"file", e.file.filename().string()}};
    os << j.dump() << '\n';
  }
}

template HiddenStates<float> load_hidden_states(const std::filesystem::path&);
template HiddenStates<double> load_hidden_states(const std::filesystem::path&);

}  // namespace relprobe::enc
