#include "lrnp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lrnp/common.hpp"

namespace lrnp {

std::string to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::complete: return "complete";
    case LabelKind::incomplete: return "incomplete";
    case LabelKind::partial: return "partial";
  }
  return "unknown";
}

LabelKind parse_label_kind(std::string_view text) {
  if (text == "complete") return LabelKind::complete;
  if (text == "incomplete") return LabelKind::incomplete;
  if (text == "partial") return LabelKind::partial;
  throw ValidationError("unknown label kind '" + std::string(text) + "'");
}

RankingDataset::RankingDataset(FeatureMatrix features, Labels labels, int k, std::string provenance)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      k_(k),
      provenance_(std::move(provenance)) {
  if (k_ < 2) throw ValidationError("datasets need at least 2 labels");
  std::visit(
      [&](const auto& rows) {
        if (rows.size() != features_.rows())
          throw ValidationError("label count " + std::to_string(rows.size()) +
                                " does not match feature rows " + std::to_string(features_.rows()));
        for (std::size_t i = 0; i < rows.size(); ++i)
          if (rows[i].k() != k_)
            throw ValidationError("row " + std::to_string(i) + " ranks " +
                                  std::to_string(rows[i].k()) + " labels, expected " +
                                  std::to_string(k_));
      },
      labels_);
}

const std::vector<Ranking>& RankingDataset::complete() const {
  if (const auto* v = std::get_if<std::vector<Ranking>>(&labels_)) return *v;
  throw ValidationError("dataset labels are " + to_string(kind()) + ", complete rankings required");
}

const std::vector<IncompleteRanking>& RankingDataset::incomplete() const {
  if (const auto* v = std::get_if<std::vector<IncompleteRanking>>(&labels_)) return *v;
  throw ValidationError("dataset labels are " + to_string(kind()) +
                        ", incomplete rankings required");
}

const std::vector<PartialRanking>& RankingDataset::partial() const {
  if (const auto* v = std::get_if<std::vector<PartialRanking>>(&labels_)) return *v;
  throw ValidationError("dataset labels are " + to_string(kind()) + ", partial rankings required");
}

RankingDataset RankingDataset::subset(std::span<const std::size_t> rows) const {
  Labels picked = std::visit(
      [&](const auto& all) -> Labels {
        std::decay_t<decltype(all)> out;
        out.reserve(rows.size());
        for (auto r : rows) out.push_back(all[r]);
        return out;
      },
      labels_);
  return RankingDataset(features_.select_rows(rows), std::move(picked), k_, provenance_);
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r' && c != '"') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& msg) {
  throw ValidationError(source + ":" + std::to_string(line) + ": " + msg);
}

double parse_feature(const std::string& cell, const std::string& source, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
    fail_at(source, line, "invalid feature value '" + cell + "'");
  return v;
}

bool is_rank_column(const std::string& name) {
  return name.rfind("rank_", 0) == 0;
}

struct Header {
  std::vector<std::size_t> feature_cols;
  std::vector<std::size_t> rank_cols;
};

Header split_header(const std::vector<std::string>& names, std::optional<int> num_labels,
                    const std::string& source) {
  Header h;
  for (std::size_t c = 0; c < names.size(); ++c)
    (is_rank_column(names[c]) ? h.rank_cols : h.feature_cols).push_back(c);
  if (h.rank_cols.empty() && num_labels) {
    const auto k = static_cast<std::size_t>(*num_labels);
    if (k > names.size()) fail_at(source, 1, "fewer columns than the requested label count");
    h.feature_cols.resize(names.size() - k);
    for (std::size_t c = names.size() - k; c < names.size(); ++c) h.rank_cols.push_back(c);
  }
  return h;
}

}  // namespace

void save_dataset(const RankingDataset& data, std::ostream& os) {
  const std::size_t d = data.dimension();
  const int k = data.num_labels();
  for (std::size_t j = 0; j < d; ++j) os << 'f' << j + 1 << ',';
  for (int i = 0; i < k; ++i) os << "rank_" << i + 1 << (i + 1 < k ? "," : "\n");

  std::vector<int> cells(static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::visit(
        [&](const auto& rows) {
          using T = typename std::decay_t<decltype(rows)>::value_type;
          const auto& lab = rows[r];
          if constexpr (std::is_same_v<T, Ranking>) {
            for (int i = 0; i < k; ++i) cells[static_cast<std::size_t>(i)] = lab.position(i);
          } else if constexpr (std::is_same_v<T, IncompleteRanking>) {
            for (int i = 0; i < k; ++i) cells[static_cast<std::size_t>(i)] = lab.rank_of(i) + 1;
          } else {
            for (int i = 0; i < k; ++i) cells[static_cast<std::size_t>(i)] = lab.block_of(i) + 1;
          }
        },
        data.labels());
    for (std::size_t j = 0; j < d; ++j) os << format_double(data.features()(r, j)) << ',';
    for (int i = 0; i < k; ++i) {
      const int v = cells[static_cast<std::size_t>(i)];
      if (v > 0) os << v;
      os << (i + 1 < k ? "," : "\n");
    }
  }
}

void save_dataset(const RankingDataset& data, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_dataset(data, os);
}

RankingDataset load_dataset(std::istream& is, const LoadOptions& options,
                            const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError(source + ": empty file");
  const auto names = split_csv(line);
  const Header header = split_header(names, options.num_labels, source);
  const int k = static_cast<int>(header.rank_cols.size());
  if (k < 2) fail_at(source, 1, "header must name at least two rank_ columns");

  std::vector<double> feats;
  std::vector<std::vector<int>> cells;  // 0 marks an empty cell
  std::vector<std::size_t> line_of;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto row = split_csv(line);
    if (row.size() != names.size())
      fail_at(source, lineno,
              "expected " + std::to_string(names.size()) + " fields, got " +
                  std::to_string(row.size()));
    for (auto c : header.feature_cols) feats.push_back(parse_feature(row[c], source, lineno));
    std::vector<int> ranks;
    for (auto c : header.rank_cols) {
      if (row[c].empty()) {
        ranks.push_back(0);
        continue;
      }
      const double v = parse_feature(row[c], source, lineno);
      if (v < 1 || v != std::floor(v))
        fail_at(source, lineno, "rank value '" + row[c] + "' is not a positive integer");
      ranks.push_back(static_cast<int>(v));
    }
    cells.push_back(std::move(ranks));
    line_of.push_back(lineno);
  }

  LabelKind kind = LabelKind::complete;
  if (options.kind) {
    kind = *options.kind;
  } else {
    for (const auto& r : cells)
      if (std::find(r.begin(), r.end(), 0) != r.end()) kind = LabelKind::incomplete;
  }

  const std::size_t n = cells.size();
  RankingDataset::Labels labels;
  switch (kind) {
    case LabelKind::complete: {
      std::vector<Ranking> out;
      for (std::size_t r = 0; r < n; ++r) {
        try {
          out.push_back(Ranking::from_positions(cells[r]));
        } catch (const ValidationError& e) {
          fail_at(source, line_of[r], e.what());
        }
      }
      labels = std::move(out);
      break;
    }
    case LabelKind::incomplete: {
      std::vector<IncompleteRanking> out;
      for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::pair<int, int>> kept;
        for (int i = 0; i < k; ++i)
          if (int v = cells[r][static_cast<std::size_t>(i)]; v > 0) kept.emplace_back(v, i);
        std::sort(kept.begin(), kept.end());
        for (std::size_t t = 1; t < kept.size(); ++t)
          if (kept[t].first == kept[t - 1].first)
            fail_at(source, line_of[r], "duplicate position " + std::to_string(kept[t].first));
        std::vector<int> order;
        for (auto& [pos, label] : kept) order.push_back(label);
        out.push_back(IncompleteRanking::from_order(k, std::move(order)));
      }
      labels = std::move(out);
      break;
    }
    case LabelKind::partial: {
      std::vector<PartialRanking> out;
      for (std::size_t r = 0; r < n; ++r) {
        std::map<int, std::vector<int>> by_value;
        for (int i = 0; i < k; ++i) {
          const int v = cells[r][static_cast<std::size_t>(i)];
          if (v == 0) fail_at(source, line_of[r], "partial rankings cannot have empty cells");
          by_value[v].push_back(i);
        }
        std::vector<std::vector<int>> blocks;
        for (auto& [v, b] : by_value) blocks.push_back(std::move(b));
        out.push_back(PartialRanking::from_blocks(k, std::move(blocks)));
      }
      labels = std::move(out);
      break;
    }
  }
  FeatureMatrix features(n, header.feature_cols.size(), std::move(feats));
  return RankingDataset(std::move(features), std::move(labels), k, source);
}

RankingDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  return load_dataset(is, options, path.string());
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  const std::string source = path.string();
  std::string line;
  if (!std::getline(is, line)) throw ValidationError(source + ": empty file");
  const auto names = split_csv(line);
  const Header header = split_header(names, std::nullopt, source);
  std::vector<double> feats;
  std::size_t n = 0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto row = split_csv(line);
    if (row.size() != names.size())
      fail_at(source, lineno,
              "expected " + std::to_string(names.size()) + " fields, got " +
                  std::to_string(row.size()));
    for (auto c : header.feature_cols) feats.push_back(parse_feature(row[c], source, lineno));
    ++n;
  }
  return FeatureMatrix(n, header.feature_cols.size(), std::move(feats));
}

}  // namespace lrnp
