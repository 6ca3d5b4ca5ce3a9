#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lrnp/matrix.hpp"
#include "lrnp/ranking.hpp"

namespace lrnp {

enum class LabelKind { complete, incomplete, partial };

std::string to_string(LabelKind kind);
LabelKind parse_label_kind(std::string_view text);

/// Features paired with homogeneous ranking labels.
class RankingDataset {
 public:
  using Labels = std::variant<std::vector<Ranking>, std::vector<IncompleteRanking>,
                              std::vector<PartialRanking>>;

  RankingDataset() = default;
  /// Validates that every row has the same k and that label and feature
  /// counts agree.
  RankingDataset(FeatureMatrix features, Labels labels, int k, std::string provenance = {});

  std::size_t size() const { return features_.rows(); }
  std::size_t dimension() const { return features_.cols(); }
  int num_labels() const { return k_; }
  LabelKind kind() const { return static_cast<LabelKind>(labels_.index()); }
  const FeatureMatrix& features() const { return features_; }
  const Labels& labels() const { return labels_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  /// Throws ValidationError unless the labels are complete rankings.
  const std::vector<Ranking>& complete() const;
  const std::vector<IncompleteRanking>& incomplete() const;
  const std::vector<PartialRanking>& partial() const;

  RankingDataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const RankingDataset& a, const RankingDataset& b) {
    return a.k_ == b.k_ && a.features_ == b.features_ && a.labels_ == b.labels_;
  }

 private:
  FeatureMatrix features_;
  Labels labels_;
  int k_ = 0;
  std::string provenance_;
};

/// CSV with header f1..fd,rank_1..rank_k. rank_i holds the 1-based position
/// of label i; erased labels are empty cells; tied labels share a value.
void save_dataset(const RankingDataset& data, std::ostream& os);
void save_dataset(const RankingDataset& data, const std::filesystem::path& path);

struct LoadOptions {
  /// nullopt: complete unless some rank cell is empty, then incomplete.
  /// Partial files must be requested explicitly.
  std::optional<LabelKind> kind;
  /// Used only when the header has no rank_ columns: the trailing
  /// `num_labels` columns hold the ranks.
  std::optional<int> num_labels;
};

RankingDataset load_dataset(std::istream& is, const LoadOptions& options = {},
                            const std::string& source = "<stream>");
RankingDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

/// Reads every column that is not a rank_ column; used by `predict`, which
/// accepts labelled or unlabelled files.
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace lrnp
