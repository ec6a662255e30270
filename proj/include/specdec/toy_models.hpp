#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "specdec/rng.hpp"
#include "specdec/spec_sampling.hpp"

namespace specdec {

/// Anything that can turn a prefix into a next-token distribution. Models are
/// immutable after fit/training and shareable across concurrent runs.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual int vocab_size() const = 0;
  virtual ProbVector next_distribution(std::span<const int> prefix) const = 0;
};

/// Order-n table model with add-delta smoothing. Unseen or too-short contexts
/// back off to the smoothed unigram distribution.
class NgramModel : public LanguageModel {
 public:
  NgramModel() = default;

  // Maximum-likelihood counts with add-delta smoothing; deterministic given
  // the corpus. Throws std::invalid_argument on an empty corpus, V < 2 or
  // delta <= 0.
  static NgramModel fit(std::span<const std::vector<int>> corpus, int order, int vocab_size,
                        double delta);

  int vocab_size() const override { return vocab_size_; }
  int order() const { return order_; }
  ProbVector next_distribution(std::span<const int> prefix) const override;

  void save(std::ostream& os) const;
  static NgramModel load(std::istream& is);

 private:
  uint64_t context_key(std::span<const int> ctx) const;

  int order_ = 1;
  int vocab_size_ = 2;
  double delta_ = 0.01;
  std::vector<double> unigram_counts_;
  std::unordered_map<uint64_t, std::vector<double>> context_counts_;
};

/// Single-layer softmax model: logits = W * feature(prefix) where the feature
/// is the mean embedding of the last `order` tokens. The embedding table is
/// fixed at construction; W is the trainable parameter the alignment module
/// differentiates through. An empty prefix yields the uniform distribution.
class SoftmaxModel : public LanguageModel {
 public:
  SoftmaxModel() = default;
  SoftmaxModel(int vocab_size, int dim, int order, uint64_t seed);

  int vocab_size() const override { return vocab_size_; }
  int dim() const { return dim_; }
  int order() const { return order_; }

  ProbVector next_distribution(std::span<const int> prefix) const override;
  std::vector<double> feature(std::span<const int> prefix) const;

  std::vector<double>& weights() { return weights_; }             // row-major V x dim
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& embeddings() const { return emb_; }  // row-major V x dim

  void save(std::ostream& os) const;
  static SoftmaxModel load(std::istream& is);

 private:
  int vocab_size_ = 2;
  int dim_ = 2;
  int order_ = 1;
  std::vector<double> emb_;
  std::vector<double> weights_;
};

/// Replayable (p, q, token) records for driving protocol runs from externally
/// produced model outputs.
struct TraceRecord {
  int position = 0;
  int drafted_token = 0;
  ProbVector p;
  ProbVector q;
};

struct DistributionTrace {
  std::vector<TraceRecord> records;

  int vocab_size() const { return records.empty() ? 0 : static_cast<int>(records[0].p.size()); }
};

// Line-delimited `position,drafted_token,p[0..V),q[0..V)` in decimal text.
void save_trace(const DistributionTrace& trace, std::ostream& os);
DistributionTrace load_trace(std::istream& is);          // throws std::runtime_error with line numbers
DistributionTrace load_trace(const std::string& path);

// Whitespace-separated token ids, one sequence per line.
std::vector<std::vector<int>> load_corpus(std::istream& is);
std::vector<std::vector<int>> load_corpus_file(const std::string& path);

}  // namespace specdec
