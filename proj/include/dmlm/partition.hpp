#pragma once

#include "dmlm/types.hpp"

#include <string>
#include <vector>

namespace dmlm {

/// One binary split of a taxon block. Indices are zero-based.
struct Partition {
  std::vector<int> plus;
  std::vector<int> minus;

  bool operator==(const Partition&) const = default;
};

/// Half-open index ranges of a partition whose sides are both contiguous.
struct PartitionRanges {
  int plus_begin, plus_end, minus_begin, minus_end;
};

/// An ordered sequential binary separation of J taxa into J - 1 balances.
///
/// The first partition splits the full taxon set; every later partition splits
/// exactly one block produced by an earlier split. Construction validates this.
class PartitionSpec {
 public:
  PartitionSpec(int num_taxa, std::vector<Partition> partitions);

  /// Pivot scheme: partition m contrasts taxon m with taxa m+1..J-1.
  static PartitionSpec pivot(int num_taxa);

  /// Parses "plus | minus" lines with 1-based, comma-separated indices.
  static PartitionSpec parse(const std::string& text, int num_taxa);
  static PartitionSpec read_file(const std::string& path, int num_taxa);

  std::string to_string() const;

  int num_taxa() const { return num_taxa_; }
  int num_balances() const { return static_cast<int>(partitions_.size()); }
  const std::vector<Partition>& partitions() const { return partitions_; }
  const Partition& operator[](int m) const { return partitions_[m]; }

  /// Orthonormal contrast matrix V (J x M): balances are log(psi)' V,
  /// V'V = I and V'1 = 0.
  const Matrix& contrast() const { return contrast_; }

  /// True when every side of every partition is a contiguous index range
  /// (the pivot scheme, among others); ranges() is then populated.
  bool contiguous() const { return !ranges_.empty(); }
  const std::vector<PartitionRanges>& ranges() const { return ranges_; }

 private:
  void validate() const;

  int num_taxa_;
  std::vector<Partition> partitions_;
  Matrix contrast_;
  std::vector<PartitionRanges> ranges_;
};

/// Default pivot partition for J >= 2 taxa.
PartitionSpec sbp_pivot(int num_taxa);

}  // namespace dmlm
