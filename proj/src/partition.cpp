#include "dmlm/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dmlm {

namespace {

std::vector<int> parse_index_list(const std::string& field, int num_taxa, int line_no) {
  std::vector<int> out;
  std::stringstream ss(field);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto first = tok.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = tok.find_last_not_of(" \t\r");
    tok = tok.substr(first, last - first + 1);
    std::size_t used = 0;
    int idx = 0;
    try {
      idx = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) {
      throw ParseError("partition line " + std::to_string(line_no) + ": bad index '" + tok + "'");
    }
    if (idx < 1 || idx > num_taxa) {
      throw ParseError("partition line " + std::to_string(line_no) + ": index " + tok +
                       " outside 1.." + std::to_string(num_taxa));
    }
    out.push_back(idx - 1);
  }
  return out;
}

}  // namespace

PartitionSpec::PartitionSpec(int num_taxa, std::vector<Partition> partitions)
    : num_taxa_(num_taxa), partitions_(std::move(partitions)) {
  validate();
  const auto m_count = static_cast<Eigen::Index>(partitions_.size());
  contrast_ = Matrix::Zero(num_taxa_, m_count);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    const auto& part = partitions_[m];
    const double r = static_cast<double>(part.plus.size());
    const double s = static_cast<double>(part.minus.size());
    const double scale = std::sqrt(r * s / (r + s));
    for (int k : part.plus) contrast_(k, m) = scale / r;
    for (int k : part.minus) contrast_(k, m) = -scale / s;
  }

  auto as_range = [](const std::vector<int>& idx, int& begin, int& end) {
    const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
    begin = *lo;
    end = *hi + 1;
    return end - begin == static_cast<int>(idx.size());
  };
  for (const auto& part : partitions_) {
    PartitionRanges r{};
    if (!as_range(part.plus, r.plus_begin, r.plus_end) || !as_range(part.minus, r.minus_begin, r.minus_end)) {
      ranges_.clear();
      break;
    }
    ranges_.push_back(r);
  }
}

void PartitionSpec::validate() const {
  if (num_taxa_ < 2) throw DomainError("a partition spec needs at least 2 taxa");
  if (static_cast<int>(partitions_.size()) != num_taxa_ - 1) {
    throw DomainError("expected " + std::to_string(num_taxa_ - 1) + " partitions, got " +
                      std::to_string(partitions_.size()));
  }
  // Blocks produced so far that still await a split.
  std::vector<std::set<int>> open;
  std::set<int> all;
  for (int k = 0; k < num_taxa_; ++k) all.insert(k);
  open.push_back(all);

  for (std::size_t m = 0; m < partitions_.size(); ++m) {
    const auto& part = partitions_[m];
    const std::string where = "partition " + std::to_string(m + 1);
    if (part.plus.empty() || part.minus.empty()) throw DomainError(where + " has an empty side");
    std::set<int> plus(part.plus.begin(), part.plus.end());
    std::set<int> minus(part.minus.begin(), part.minus.end());
    if (plus.size() != part.plus.size() || minus.size() != part.minus.size()) {
      throw DomainError(where + " repeats an index");
    }
    std::set<int> block = plus;
    for (int k : minus) {
      if (!block.insert(k).second) throw DomainError(where + ": plus and minus sets overlap");
    }
    auto it = std::find(open.begin(), open.end(), block);
    if (it == open.end()) {
      throw DomainError(where + " does not split a block produced by an earlier partition");
    }
    open.erase(it);
    if (plus.size() > 1) open.push_back(plus);
    if (minus.size() > 1) open.push_back(minus);
  }
}

PartitionSpec PartitionSpec::pivot(int num_taxa) {
  if (num_taxa < 2) throw DomainError("pivot partition needs J >= 2, got " + std::to_string(num_taxa));
  std::vector<Partition> parts;
  parts.reserve(num_taxa - 1);
  for (int m = 0; m < num_taxa - 1; ++m) {
    Partition p;
    p.plus = {m};
    for (int k = m + 1; k < num_taxa; ++k) p.minus.push_back(k);
    parts.push_back(std::move(p));
  }
  return PartitionSpec(num_taxa, std::move(parts));
}

PartitionSpec sbp_pivot(int num_taxa) { return PartitionSpec::pivot(num_taxa); }

PartitionSpec PartitionSpec::parse(const std::string& text, int num_taxa) {
  std::vector<Partition> parts;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto bar = line.find('|');
    if (bar == std::string::npos || line.find('|', bar + 1) != std::string::npos) {
      throw ParseError("partition line " + std::to_string(line_no) + ": expected 'plus | minus'");
    }
    Partition p;
    p.plus = parse_index_list(line.substr(0, bar), num_taxa, line_no);
    p.minus = parse_index_list(line.substr(bar + 1), num_taxa, line_no);
    parts.push_back(std::move(p));
  }
  return PartitionSpec(num_taxa, std::move(parts));
}

PartitionSpec PartitionSpec::read_file(const std::string& path, int num_taxa) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open partition file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), num_taxa);
}

std::string PartitionSpec::to_string() const {
  std::ostringstream out;
  auto emit = [&out](const std::vector<int>& idx) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k) out << ',';
      out << idx[k] + 1;
    }
  };
  for (const auto& part : partitions_) {
    emit(part.plus);
    out << " | ";
    emit(part.minus);
    out << '\n';
  }
  return out.str();
}

}  // namespace dmlm
