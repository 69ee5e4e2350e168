#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dca {

/// One nonzero count in a bag of words. Word ids are 0-based internally.
struct Entry {
  int word = 0;
  long count = 0;
  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse bag of words, sorted by word id, zeros suppressed.
using Document = std::vector<Entry>;

/// Ordered token sequence (word ids).
using DocumentSeq = std::vector<int>;

long document_length(const Document& doc);

/// Partition of word ids into groups. Word ids absent from the partition
/// carry group -1 and must never be observed.
struct GroupSpec {
  std::vector<int> group_of;  // size J
  int num_groups = 0;

  /// Word ids belonging to group g, ascending.
  std::vector<int> members(int g) const;
  /// Per-group token totals L_g for a document.
  std::vector<long> totals(const Document& doc) const;

  /// Every word forms its own group.
  static GroupSpec singletons(int num_words);
  /// One group covering all words.
  static GroupSpec single(int num_words);
  /// Consecutive pairs (2g, 2g+1) form group g, e.g. yea/nay words per voter.
  static GroupSpec pairs(int num_pairs);

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

/// Immutable-after-load, document-major sparse count store.
class Corpus {
 public:
  Corpus() = default;
  Corpus(int vocab_size, std::vector<Document> docs);

  int num_docs() const { return static_cast<int>(docs_.size()); }
  int vocab_size() const { return vocab_size_; }
  long total_tokens() const { return total_tokens_; }
  long nnz() const;

  const std::vector<Document>& docs() const { return docs_; }
  const Document& doc(int i) const { return docs_.at(static_cast<std::size_t>(i)); }

  const std::vector<std::string>& vocab() const { return vocab_; }
  void set_vocab(std::vector<std::string> vocab);

  const std::optional<GroupSpec>& groups() const { return groups_; }

  /// Total count of every word over the collection (length J).
  std::vector<long> word_totals() const;

  /// Documents with the given indices, same vocabulary and groups.
  Corpus subset(const std::vector<int>& indices) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  friend Corpus split_groups(const Corpus& corpus, const GroupSpec& spec);

  int vocab_size_ = 0;
  long total_tokens_ = 0;
  std::vector<Document> docs_;
  std::vector<std::string> vocab_;
  std::optional<GroupSpec> groups_;
};

/// Builds a document from unsorted (word, count) pairs, summing duplicates
/// and dropping zeros.
Document make_document(std::vector<Entry> entries);

Document bag(const DocumentSeq& seq);
/// Canonical token sequence for a bag: word ids ascending, each repeated.
DocumentSeq sequence_of(const Document& doc);

/// ln( L! / prod_j w_j! )
double log_multinomial_coeff(const Document& doc);

/// Attaches a group partition. Every observed word must belong to a group.
Corpus split_groups(const Corpus& corpus, const GroupSpec& spec);

// Sparse triplet files: lines "I", "J", "NNZ", then "docId wordId count",
// 1-based. Duplicate triplets are summed.
Corpus load_docword(const std::string& path);
Corpus read_docword(std::istream& in, const std::string& name = "<stream>");
void save_docword(const Corpus& corpus, const std::string& path);
void write_docword(const Corpus& corpus, std::ostream& out);

std::vector<std::string> load_vocab(const std::string& path);
void save_vocab(const std::vector<std::string>& vocab, const std::string& path);

/// "wordId groupId" lines, both 1-based; groups must be contiguous 1..G.
GroupSpec load_groups(const std::string& path, int vocab_size);
GroupSpec read_groups(std::istream& in, int vocab_size, const std::string& name = "<stream>");
void save_groups(const GroupSpec& spec, const std::string& path);

}  // namespace dca
