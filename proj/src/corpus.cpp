#include "dca/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

#include "dca/errors.hpp"
#include "dca/mathfn.hpp"

namespace dca {

long document_length(const Document& doc) {
  long total = 0;
  for (const auto& e : doc) total += e.count;
  return total;
}

std::vector<int> GroupSpec::members(int g) const {
  std::vector<int> out;
  for (std::size_t j = 0; j < group_of.size(); ++j)
    if (group_of[j] == g) out.push_back(static_cast<int>(j));
  return out;
}

std::vector<long> GroupSpec::totals(const Document& doc) const {
  std::vector<long> out(static_cast<std::size_t>(num_groups), 0);
  for (const auto& e : doc) {
    const int g = group_of.at(static_cast<std::size_t>(e.word));
    if (g < 0) throw ValidationError("word " + std::to_string(e.word + 1) + " belongs to no group");
    out[static_cast<std::size_t>(g)] += e.count;
  }
  return out;
}

GroupSpec GroupSpec::singletons(int num_words) {
  GroupSpec spec;
  spec.group_of.resize(static_cast<std::size_t>(num_words));
  std::iota(spec.group_of.begin(), spec.group_of.end(), 0);
  spec.num_groups = num_words;
  return spec;
}

GroupSpec GroupSpec::single(int num_words) {
  GroupSpec spec;
  spec.group_of.assign(static_cast<std::size_t>(num_words), 0);
  spec.num_groups = 1;
  return spec;
}

GroupSpec GroupSpec::pairs(int num_pairs) {
  GroupSpec spec;
  spec.group_of.resize(static_cast<std::size_t>(2 * num_pairs));
  for (int j = 0; j < 2 * num_pairs; ++j) spec.group_of[static_cast<std::size_t>(j)] = j / 2;
  spec.num_groups = num_pairs;
  return spec;
}

Corpus::Corpus(int vocab_size, std::vector<Document> docs)
    : vocab_size_(vocab_size), docs_(std::move(docs)) {
  if (vocab_size < 0) throw ValidationError("vocabulary size must be nonnegative");
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    int prev = -1;
    for (const auto& e : docs_[i]) {
      if (e.word < 0 || e.word >= vocab_size_)
        throw ValidationError("document " + std::to_string(i + 1) + ": word id out of range");
      if (e.count < 1)
        throw ValidationError("document " + std::to_string(i + 1) + ": counts must be positive");
      if (e.word <= prev)
        throw ValidationError("document " + std::to_string(i + 1) + ": entries must be sorted and unique");
      prev = e.word;
      total_tokens_ += e.count;
    }
  }
}

long Corpus::nnz() const {
  long n = 0;
  for (const auto& d : docs_) n += static_cast<long>(d.size());
  return n;
}

void Corpus::set_vocab(std::vector<std::string> vocab) {
  if (static_cast<int>(vocab.size()) != vocab_size_)
    throw ValidationError("vocabulary has " + std::to_string(vocab.size()) + " tokens, corpus expects " +
                          std::to_string(vocab_size_));
  vocab_ = std::move(vocab);
}

std::vector<long> Corpus::word_totals() const {
  std::vector<long> out(static_cast<std::size_t>(vocab_size_), 0);
  for (const auto& d : docs_)
    for (const auto& e : d) out[static_cast<std::size_t>(e.word)] += e.count;
  return out;
}

Corpus Corpus::subset(const std::vector<int>& indices) const {
  std::vector<Document> docs;
  docs.reserve(indices.size());
  for (int i : indices) docs.push_back(doc(i));
  Corpus out(vocab_size_, std::move(docs));
  out.vocab_ = vocab_;
  out.groups_ = groups_;
  return out;
}

Document make_document(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.word < b.word; });
  Document out;
  for (const auto& e : entries) {
    if (e.count < 0) throw ValidationError("negative count for word " + std::to_string(e.word + 1));
    if (e.count == 0) continue;
    if (!out.empty() && out.back().word == e.word)
      out.back().count += e.count;
    else
      out.push_back(e);
  }
  return out;
}

Document bag(const DocumentSeq& seq) {
  std::map<int, long> counts;
  for (int w : seq) ++counts[w];
  Document out;
  out.reserve(counts.size());
  for (const auto& [w, c] : counts) out.push_back({w, c});
  return out;
}

DocumentSeq sequence_of(const Document& doc) {
  DocumentSeq out;
  out.reserve(static_cast<std::size_t>(document_length(doc)));
  for (const auto& e : doc)
    for (long t = 0; t < e.count; ++t) out.push_back(e.word);
  return out;
}

double log_multinomial_coeff(const Document& doc) {
  double acc = log_factorial(document_length(doc));
  for (const auto& e : doc) acc -= log_factorial(e.count);
  return acc;
}

Corpus split_groups(const Corpus& corpus, const GroupSpec& spec) {
  if (static_cast<int>(spec.group_of.size()) != corpus.vocab_size())
    throw ValidationError("group assignment covers " + std::to_string(spec.group_of.size()) +
                          " word ids, corpus has " + std::to_string(corpus.vocab_size()));
  if (spec.num_groups < 1) throw ValidationError("group assignment has no groups");
  std::vector<int> group_size(static_cast<std::size_t>(spec.num_groups), 0);
  for (int g : spec.group_of) {
    if (g >= spec.num_groups) throw ValidationError("group id out of range");
    if (g >= 0) ++group_size[static_cast<std::size_t>(g)];
  }
  for (int g = 0; g < spec.num_groups; ++g)
    if (group_size[static_cast<std::size_t>(g)] == 0)
      throw ValidationError("group " + std::to_string(g + 1) + " has no members");
  const auto totals = corpus.word_totals();
  for (std::size_t j = 0; j < totals.size(); ++j)
    if (totals[j] > 0 && spec.group_of[j] < 0)
      throw ValidationError("observed word " + std::to_string(j + 1) + " is not assigned to a group");
  Corpus out = corpus;
  out.groups_ = spec;
  return out;
}

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Corpus read_docword(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t line_no = 0;
  long header[3];
  int have = 0;
  while (have < 3 && std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      if (have == 3) throw ParseError(name, line_no, "unexpected token in header: " + tok);
      try {
        std::size_t pos = 0;
        header[have] = std::stol(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(name, line_no, "malformed header value: " + tok);
      }
      if (header[have] < 0) throw ParseError(name, line_no, "negative header value");
      ++have;
    }
  }
  if (have < 3) throw ParseError(name, line_no, "header must give I, J and NNZ");
  const long I = header[0], J = header[1], nnz = header[2];
  std::vector<std::vector<Entry>> raw(static_cast<std::size_t>(I));
  long read = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (read == nnz) throw ParseError(name, line_no, "more triplets than the header NNZ");
    std::istringstream ss(line);
    long d, w, c;
    std::string extra;
    if (!(ss >> d >> w >> c) || (ss >> extra)) throw ParseError(name, line_no, "expected \"docId wordId count\"");
    if (d < 1 || d > I) throw ParseError(name, line_no, "document id " + std::to_string(d) + " out of range");
    if (w < 1 || w > J) throw ParseError(name, line_no, "word id " + std::to_string(w) + " out of range");
    if (c < 1) throw ParseError(name, line_no, "count must be positive");
    raw[static_cast<std::size_t>(d - 1)].push_back({static_cast<int>(w - 1), c});
    ++read;
  }
  if (read != nnz)
    throw ParseError(name, line_no, "header promises " + std::to_string(nnz) + " triplets, found " +
                                        std::to_string(read));
  std::vector<Document> docs;
  docs.reserve(raw.size());
  for (auto& r : raw) docs.push_back(make_document(std::move(r)));
  return Corpus(static_cast<int>(J), std::move(docs));
}

Corpus load_docword(const std::string& path) {
  auto in = open_in(path);
  return read_docword(in, path);
}

void write_docword(const Corpus& corpus, std::ostream& out) {
  out << corpus.num_docs() << '\n' << corpus.vocab_size() << '\n' << corpus.nnz() << '\n';
  for (int i = 0; i < corpus.num_docs(); ++i)
    for (const auto& e : corpus.doc(i)) out << (i + 1) << ' ' << (e.word + 1) << ' ' << e.count << '\n';
}

void save_docword(const Corpus& corpus, const std::string& path) {
  auto out = open_out(path);
  write_docword(corpus, out);
}

std::vector<std::string> load_vocab(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

void save_vocab(const std::vector<std::string>& vocab, const std::string& path) {
  auto out = open_out(path);
  for (const auto& t : vocab) out << t << '\n';
}

GroupSpec read_groups(std::istream& in, int vocab_size, const std::string& name) {
  GroupSpec spec;
  spec.group_of.assign(static_cast<std::size_t>(vocab_size), -1);
  std::string line;
  std::size_t line_no = 0;
  int max_group = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::istringstream ss(line);
    long w, g;
    std::string extra;
    if (!(ss >> w >> g) || (ss >> extra)) throw ParseError(name, line_no, "expected \"wordId groupId\"");
    if (w < 1 || w > vocab_size) throw ParseError(name, line_no, "word id " + std::to_string(w) + " out of range");
    if (g < 1) throw ParseError(name, line_no, "group ids start at 1");
    auto& slot = spec.group_of[static_cast<std::size_t>(w - 1)];
    if (slot >= 0) throw ValidationError(name + ":" + std::to_string(line_no) + ": word id " + std::to_string(w) + " assigned twice");
    slot = static_cast<int>(g - 1);
    max_group = std::max(max_group, static_cast<int>(g));
  }
  spec.num_groups = max_group;
  std::vector<bool> seen(static_cast<std::size_t>(max_group), false);
  for (int g : spec.group_of)
    if (g >= 0) seen[static_cast<std::size_t>(g)] = true;
  for (int g = 0; g < max_group; ++g)
    if (!seen[static_cast<std::size_t>(g)])
      throw ValidationError(name + ": group ids must be contiguous; group " + std::to_string(g + 1) + " is empty");
  return spec;
}

GroupSpec load_groups(const std::string& path, int vocab_size) {
  auto in = open_in(path);
  return read_groups(in, vocab_size, path);
}

void save_groups(const GroupSpec& spec, const std::string& path) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < spec.group_of.size(); ++j)
    if (spec.group_of[j] >= 0) out << (j + 1) << ' ' << (spec.group_of[j] + 1) << '\n';
}

}  // namespace dca
