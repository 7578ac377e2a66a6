#include "relprobe/encoders/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "relprobe/util/log.hpp"

namespace relprobe::enc {

std::optional<std::size_t> PriceTable::find_ticker(const std::string& symbol) const {
  auto it = std::lower_bound(tickers.begin(), tickers.end(), symbol);
  if (it == tickers.end() || *it != symbol) return std::nullopt;
  return static_cast<std::size_t>(it - tickers.begin());
}

std::optional<std::size_t> PriceTable::find_date(const std::string& date) const {
  auto it = std::lower_bound(dates.begin(), dates.end(), date);
  if (it == dates.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - dates.begin());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) {
    while (!cur.empty() && (cur.back() == '\r' || cur.back() == ' ')) cur.pop_back();
    out.push_back(cur);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": not a number '" + s + "'");
  }
}

}  // namespace

PriceTable read_prices_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open prices file " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split_csv(line);
  const std::vector<std::string> expected{"date", "ticker", "open", "high", "low", "close", "volume"};
  if (header != expected) {
    throw std::runtime_error(path.string() + ": header must be date,ticker,open,high,low,close,volume");
  }

  std::map<std::string, std::map<std::string, Bar>> raw;  // ticker -> date -> bar
  std::set<std::string> all_dates;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 7) throw std::runtime_error(where + ": expected 7 fields");
    if (!is_iso_date(f[0])) throw std::runtime_error(where + ": bad date '" + f[0] + "'");
    Bar b{parse_number(f[2], where), parse_number(f[3], where), parse_number(f[4], where),
          parse_number(f[5], where), parse_number(f[6], where)};
    raw[f[1]][f[0]] = b;
    all_dates.insert(f[0]);
  }
  if (raw.empty()) throw std::runtime_error(path.string() + ": no price rows");

  std::string start;
  for (const auto& [ticker, series] : raw) start = std::max(start, series.begin()->first);

  PriceTable table;
  for (const auto& d : all_dates)
    if (d >= start) table.dates.push_back(d);
  for (const auto& [ticker, series] : raw) {
    table.tickers.push_back(ticker);
    std::vector<Bar> bars;
    bars.reserve(table.dates.size());
    Bar last = std::prev(series.upper_bound(start))->second;
    for (const auto& d : table.dates) {
      auto it = series.find(d);
      if (it != series.end()) last = it->second;
      bars.push_back(last);
    }
    table.bars.push_back(std::move(bars));
  }
  return table;
}

void write_prices_csv(const std::filesystem::path& path, const PriceTable& table) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "date,ticker,open,high,low,close,volume\n";
  os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t t = 0; t < table.dates.size(); ++t) {
    for (std::size_t u = 0; u < table.tickers.size(); ++u) {
      const auto& b = table.bars[u][t];
      os << table.dates[t] << ',' << table.tickers[u] << ',' << b.open << ',' << b.high << ','
         << b.low << ',' << b.close << ',' << b.volume << '\n';
    }
  }
}

std::vector<std::vector<FeatureRow>> market_features(const PriceTable& table) {
  std::vector<std::vector<FeatureRow>> out(table.tickers.size());
  for (std::size_t u = 0; u < table.tickers.size(); ++u) {
    const auto& bars = table.bars[u];
    out[u].assign(bars.size(), FeatureRow{});
    for (std::size_t t = 1; t < bars.size(); ++t) {
      const Bar& a = bars[t - 1];
      const Bar& b = bars[t];
      out[u][t] = {b.open / a.open - 1.0, b.high / a.high - 1.0, b.low / a.low - 1.0,
                   b.close / a.close - 1.0, std::log(b.volume / a.volume)};
    }
  }
  return out;
}

std::vector<std::vector<double>> close_returns(const PriceTable& table) {
  std::vector<std::vector<double>> out(table.tickers.size());
  for (std::size_t u = 0; u < table.tickers.size(); ++u) {
    const auto& bars = table.bars[u];
    out[u].assign(bars.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 1; t < bars.size(); ++t) out[u][t] = bars[t].close / bars[t - 1].close - 1.0;
  }
  return out;
}

std::vector<std::string> tokenize_text(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& docs,
                             std::size_t max_size) {
  std::map<std::string, std::size_t> freq;
  for (const auto& d : docs)
    for (const auto& t : d) ++freq[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  v.by_id_.push_back("<unk>");
  for (const auto& [tok, n] : ranked) {
    if (v.by_id_.size() >= max_size) break;
    v.ids_[tok] = static_cast<int>(v.by_id_.size());
    v.by_id_.push_back(tok);
  }
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? 0 : it->second;
}

std::vector<Article> read_news_jsonl(const std::filesystem::path& path,
                                     const std::vector<std::string>& tickers,
                                     std::size_t vocab_size) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open news file " + path.string());
  std::vector<Article> out;
  std::vector<std::vector<std::string>> texts;  // per article; empty when ids given
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& ex) {
      throw std::runtime_error(where + ": " + ex.what());
    }
    Article a;
    a.id = j.value("id", std::string{});
    a.date = j.value("date", std::string{});
    if (a.id.empty()) throw std::runtime_error(where + ": missing id");
    if (!is_iso_date(a.date)) throw std::runtime_error(where + ": bad date '" + a.date + "'");
    if (j.contains("tokens")) {
      a.tokens = j["tokens"].get<std::vector<int>>();
      texts.emplace_back();
    } else if (j.contains("text")) {
      texts.push_back(tokenize_text(j["text"].get<std::string>()));
    } else {
      throw std::runtime_error(where + ": article needs tokens or text");
    }
    for (const auto& sym : j.value("tickers", std::vector<std::string>{})) {
      auto it = std::lower_bound(tickers.begin(), tickers.end(), sym);
      if (it == tickers.end() || *it != sym) {
        util::logger()->warn("{}: unknown ticker '{}' dropped", where, sym);
        continue;
      }
      a.tickers.push_back(static_cast<std::size_t>(it - tickers.begin()));
    }
    std::sort(a.tickers.begin(), a.tickers.end());
    a.tickers.erase(std::unique(a.tickers.begin(), a.tickers.end()), a.tickers.end());
    out.push_back(std::move(a));
  }

  const bool any_text = std::any_of(texts.begin(), texts.end(), [](const auto& t) { return !t.empty(); });
  if (any_text) {
    const auto vocab = Vocabulary::build(texts, vocab_size);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (texts[i].empty()) continue;
      for (const auto& tok : texts[i]) out[i].tokens.push_back(vocab.id(tok));
    }
  }
  for (const auto& a : out) {
    if (a.tokens.empty()) throw std::runtime_error(path.string() + ": article " + a.id + " has no tokens");
  }
  return out;
}

void write_news_jsonl(const std::filesystem::path& path, const std::vector<Article>& articles,
                      const std::vector<std::string>& tickers) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& a : articles) {
    std::vector<std::string> syms;
    for (auto t : a.tickers) syms.push_back(tickers.at(t));
    nlohmann::json j{{"id", a.id}, {"date", a.date}, {"tokens", a.tokens}, {"tickers", syms}};
    os << j.dump() << '\n';
  }
}

}  // namespace relprobe::enc
