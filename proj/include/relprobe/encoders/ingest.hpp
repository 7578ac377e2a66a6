#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relprobe/encoders/article.hpp"

namespace relprobe::enc {

struct Bar {
  double open = 0, high = 0, low = 0, close = 0, volume = 0;
};

// Daily bars aligned on a shared calendar. Gaps are forward-filled; the
// calendar starts at the first date on which every ticker has a bar.
struct PriceTable {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  std::vector<std::vector<Bar>> bars;  // [ticker][date]

  std::optional<std::size_t> find_ticker(const std::string& symbol) const;
  std::optional<std::size_t> find_date(const std::string& date) const;
};

// CSV with header date,ticker,open,high,low,close,volume.
PriceTable read_prices_csv(const std::filesystem::path& path);
void write_prices_csv(const std::filesystem::path& path, const PriceTable& table);

inline constexpr std::size_t kMarketFeatures = 5;
using FeatureRow = std::array<double, kMarketFeatures>;

// Per ticker and date index t >= 1: open/high/low/close simple returns versus
// day t-1 and the log volume change. Row 0 is all zeros.
std::vector<std::vector<FeatureRow>> market_features(const PriceTable& table);

// Close-to-close simple returns; entry 0 of each series is NaN.
std::vector<std::vector<double>> close_returns(const PriceTable& table);

// Whitespace separates tokens; every punctuation character is its own token.
// Text is lower-cased.
std::vector<std::string> tokenize_text(const std::string& text);

// Id 0 is "<unk>"; others ranked by corpus frequency, ties broken lexically.
class Vocabulary {
 public:
  static Vocabulary build(const std::vector<std::vector<std::string>>& docs, std::size_t max_size);
  int id(const std::string& token) const;
  std::size_t size() const { return by_id_.size(); }

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> by_id_;
};

// JSON-lines, one article per line: {"id","date","tokens":[int]|"text":str,"tickers":[symbol]}.
// Unknown ticker symbols are dropped with a warning.
std::vector<Article> read_news_jsonl(const std::filesystem::path& path,
                                     const std::vector<std::string>& tickers,
                                     std::size_t vocab_size);
void write_news_jsonl(const std::filesystem::path& path, const std::vector<Article>& articles,
                      const std::vector<std::string>& tickers);

}  // namespace relprobe::enc
