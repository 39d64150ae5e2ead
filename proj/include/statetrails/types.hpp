#ifndef STATETRAILS_TYPES_HPP
#define STATETRAILS_TYPES_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace statetrails {

inline constexpr int kFeatureCount = 15;

// Index order is the canonical column order of every profile artifact.
enum Feature : int {
  kAnger = 0,
  kAnticipation,
  kDisgust,
  kFear,
  kJoy,
  kSadness,
  kSurprise,
  kTrust,
  kValence,
  kArousal,
  kDominance,
  kSentPositive,
  kSentNegative,
  kTabooRate,
  kSubjectivity,
};

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "anger",         "anticipation", "disgust",       "fear",
    "joy",           "sadness",      "surprise",      "trust",
    "valence",       "arousal",      "dominance",     "sent_positive",
    "sent_negative", "taboo_rate",   "subjectivity"};

inline constexpr int kEmotionCount = 8;  // features [0, 8) are the emotion block

using FeatureVector = std::array<double, kFeatureCount>;

// Empty-text defaults: emotions absent (0), VAD at scale midpoint, rest 0.
inline FeatureVector default_feature_vector() {
  FeatureVector v{};
  v[kValence] = 0.5;
  v[kArousal] = 0.5;
  v[kDominance] = 0.5;
  return v;
}

enum class DocKind { kPost, kComment };

struct Document {
  std::string doc_id;
  std::string author_id;
  std::string thread_id;
  std::string parent_doc_id;  // empty for posts
  int month = 0;
  DocKind kind = DocKind::kPost;
  std::string text;
};

// child doc id -> parent doc id; thread roots carry no entry.
struct ThreadForest {
  std::map<std::string, std::string> parent_of;

  std::optional<std::string> parent(const std::string& doc_id) const {
    auto it = parent_of.find(doc_id);
    if (it == parent_of.end()) return std::nullopt;
    return it->second;
  }
};

struct UserMonthProfile {
  std::string author_id;
  int month = 0;
  FeatureVector features{};
  int n_docs = 0;
};

using UserMonth = std::pair<std::string, int>;

// (author, month) -> cluster label; total over the profiled population.
class LabelMap {
 public:
  void set(const std::string& author, int month, int label) {
    labels_[{author, month}] = label;
  }
  std::optional<int> label(const std::string& author, int month) const {
    auto it = labels_.find({author, month});
    if (it == labels_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<UserMonth, int>& entries() const { return labels_; }
  std::map<UserMonth, int>& entries() { return labels_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::map<UserMonth, int> labels_;
};

}  // namespace statetrails

#endif
