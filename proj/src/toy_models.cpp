#include "specdec/toy_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace specdec {

namespace {

void write_double(std::ostream& os, double v) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

ProbVector normalize_counts(const std::vector<double>& counts, double delta) {
  ProbVector out(counts.size());
  double total = 0.0;
  for (double c : counts) total += c + delta;
  for (size_t i = 0; i < counts.size(); ++i) out[i] = (counts[i] + delta) / total;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// NgramModel

uint64_t NgramModel::context_key(std::span<const int> ctx) const {
  uint64_t key = 0;
  for (int t : ctx) key = key * static_cast<uint64_t>(vocab_size_) + static_cast<uint64_t>(t);
  return key;
}

NgramModel NgramModel::fit(std::span<const std::vector<int>> corpus, int order, int vocab_size,
                           double delta) {
  if (vocab_size < 2) throw std::invalid_argument("ngram_fit: vocab_size must be >= 2");
  if (order < 1) throw std::invalid_argument("ngram_fit: order must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("ngram_fit: smoothing delta must be > 0");
  if (order * std::log2(static_cast<double>(vocab_size)) > 62)
    throw std::invalid_argument("ngram_fit: context does not fit a 64-bit key");
  bool any_token = false;
  for (const auto& seq : corpus)
    if (!seq.empty()) any_token = true;
  if (corpus.empty() || !any_token) throw std::invalid_argument("ngram_fit: empty corpus");

  NgramModel model;
  model.order_ = order;
  model.vocab_size_ = vocab_size;
  model.delta_ = delta;
  model.unigram_counts_.assign(vocab_size, 0.0);
  for (const auto& seq : corpus) {
    for (size_t i = 0; i < seq.size(); ++i) {
      const int tok = seq[i];
      if (tok < 0 || tok >= vocab_size)
        throw std::invalid_argument("ngram_fit: token out of range");
      model.unigram_counts_[tok] += 1.0;
      if (i >= static_cast<size_t>(order)) {
        const auto ctx = std::span<const int>(seq).subspan(i - order, order);
        auto& row = model.context_counts_[model.context_key(ctx)];
        if (row.empty()) row.assign(vocab_size, 0.0);
        row[tok] += 1.0;
      }
    }
  }
  return model;
}

ProbVector NgramModel::next_distribution(std::span<const int> prefix) const {
  if (prefix.size() >= static_cast<size_t>(order_)) {
    const auto ctx = prefix.subspan(prefix.size() - order_, order_);
    auto it = context_counts_.find(context_key(ctx));
    if (it != context_counts_.end()) return normalize_counts(it->second, delta_);
  }
  return normalize_counts(unigram_counts_, delta_);
}

void NgramModel::save(std::ostream& os) const {
  os << "ngram " << vocab_size_ << ' ' << order_ << ' ';
  write_double(os, delta_);
  os << '\n';
  for (double c : unigram_counts_) {
    write_double(os, c);
    os << ' ';
  }
  os << '\n';
  std::vector<uint64_t> keys;
  keys.reserve(context_counts_.size());
  for (const auto& [k, _] : context_counts_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  os << keys.size() << '\n';
  for (uint64_t k : keys) {
    os << k;
    for (double c : context_counts_.at(k)) {
      os << ' ';
      write_double(os, c);
    }
    os << '\n';
  }
}

NgramModel NgramModel::load(std::istream& is) {
  std::string tag;
  NgramModel m;
  if (!(is >> tag) || tag != "ngram") throw std::runtime_error("ngram load: bad header");
  if (!(is >> m.vocab_size_ >> m.order_ >> m.delta_))
    throw std::runtime_error("ngram load: bad header fields");
  m.unigram_counts_.assign(m.vocab_size_, 0.0);
  for (double& c : m.unigram_counts_)
    if (!(is >> c)) throw std::runtime_error("ngram load: truncated unigram counts");
  size_t n_contexts = 0;
  if (!(is >> n_contexts)) throw std::runtime_error("ngram load: missing context count");
  for (size_t i = 0; i < n_contexts; ++i) {
    uint64_t key = 0;
    if (!(is >> key)) throw std::runtime_error("ngram load: truncated context table");
    auto& row = m.context_counts_[key];
    row.assign(m.vocab_size_, 0.0);
    for (double& c : row)
      if (!(is >> c)) throw std::runtime_error("ngram load: truncated context row");
  }
  return m;
}

// ---------------------------------------------------------------------------
// SoftmaxModel

SoftmaxModel::SoftmaxModel(int vocab_size, int dim, int order, uint64_t seed)
    : vocab_size_(vocab_size), dim_(dim), order_(order) {
  if (vocab_size < 2 || dim < 1 || order < 1)
    throw std::invalid_argument("SoftmaxModel: bad dimensions");
  emb_.resize(static_cast<size_t>(vocab_size) * dim);
  weights_.assign(static_cast<size_t>(vocab_size) * dim, 0.0);
  Prng rng(seed);
  for (double& e : emb_) e = 2.0 * rng.uniform01() - 1.0;
}

std::vector<double> SoftmaxModel::feature(std::span<const int> prefix) const {
  std::vector<double> feat(dim_, 0.0);
  const size_t use = std::min(prefix.size(), static_cast<size_t>(order_));
  if (use == 0) return feat;
  for (size_t i = prefix.size() - use; i < prefix.size(); ++i) {
    const int tok = prefix[i];
    if (tok < 0 || tok >= vocab_size_)
      throw std::invalid_argument("SoftmaxModel: token out of range");
    for (int d = 0; d < dim_; ++d) feat[d] += emb_[static_cast<size_t>(tok) * dim_ + d];
  }
  for (double& f : feat) f /= static_cast<double>(use);
  return feat;
}

ProbVector SoftmaxModel::next_distribution(std::span<const int> prefix) const {
  const std::vector<double> feat = feature(prefix);
  ProbVector logits(vocab_size_, 0.0);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < vocab_size_; ++v) {
    double z = 0.0;
    for (int d = 0; d < dim_; ++d) z += weights_[static_cast<size_t>(v) * dim_ + d] * feat[d];
    logits[v] = z;
    max_logit = std::max(max_logit, z);
  }
  double total = 0.0;
  for (int v = 0; v < vocab_size_; ++v) {
    logits[v] = std::exp(logits[v] - max_logit);
    total += logits[v];
  }
  for (double& p : logits) p /= total;
  return logits;
}

void SoftmaxModel::save(std::ostream& os) const {
  os << "softmax " << vocab_size_ << ' ' << dim_ << ' ' << order_ << '\n';
  auto dump = [&](const std::vector<double>& m) {
    for (size_t i = 0; i < m.size(); ++i) {
      write_double(os, m[i]);
      os << ((i + 1) % dim_ == 0 ? '\n' : ' ');
    }
  };
  dump(emb_);
  dump(weights_);
}

SoftmaxModel SoftmaxModel::load(std::istream& is) {
  std::string tag;
  if (!(is >> tag) || tag != "softmax") throw std::runtime_error("softmax load: bad header");
  SoftmaxModel m;
  if (!(is >> m.vocab_size_ >> m.dim_ >> m.order_))
    throw std::runtime_error("softmax load: bad header fields");
  const size_t count = static_cast<size_t>(m.vocab_size_) * m.dim_;
  m.emb_.resize(count);
  m.weights_.resize(count);
  for (double& v : m.emb_)
    if (!(is >> v)) throw std::runtime_error("softmax load: truncated embeddings");
  for (double& v : m.weights_)
    if (!(is >> v)) throw std::runtime_error("softmax load: truncated weights");
  return m;
}

// ---------------------------------------------------------------------------
// Trace and corpus files

void save_trace(const DistributionTrace& trace, std::ostream& os) {
  for (const auto& r : trace.records) {
    os << r.position << ',' << r.drafted_token;
    for (double v : r.p) {
      os << ',';
      write_double(os, v);
    }
    for (double v : r.q) {
      os << ',';
      write_double(os, v);
    }
    os << '\n';
  }
}

DistributionTrace load_trace(std::istream& is) {
  DistributionTrace trace;
  std::string line;
  size_t line_no = 0;
  size_t vocab = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        fields.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad number '" +
                                 cell + "'");
      }
    }
    if (fields.size() < 4 || (fields.size() - 2) % 2 != 0)
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": wrong field count");
    const size_t v = (fields.size() - 2) / 2;
    if (vocab == 0)
      vocab = v;
    else if (v != vocab)
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": vocabulary size changed");
    TraceRecord rec;
    rec.position = static_cast<int>(fields[0]);
    rec.drafted_token = static_cast<int>(fields[1]);
    rec.p.assign(fields.begin() + 2, fields.begin() + 2 + v);
    rec.q.assign(fields.begin() + 2 + v, fields.end());
    if (!is_valid_dist(rec.p) || !is_valid_dist(rec.q))
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": p/q is not a probability distribution");
    if (rec.drafted_token < 0 || static_cast<size_t>(rec.drafted_token) >= v ||
        !(rec.q[rec.drafted_token] > 0.0))
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": drafted token invalid under q");
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

DistributionTrace load_trace(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace file: " + path);
  return load_trace(f);
}

std::vector<std::vector<int>> load_corpus(std::istream& is) {
  std::vector<std::vector<int>> corpus;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<int> seq;
    std::stringstream ss(line);
    int tok;
    while (ss >> tok) seq.push_back(tok);
    if (!seq.empty()) corpus.push_back(std::move(seq));
  }
  return corpus;
}

std::vector<std::vector<int>> load_corpus_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open corpus file: " + path);
  return load_corpus(f);
}

}  // namespace specdec
