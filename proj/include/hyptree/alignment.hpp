#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace hyptree {

/// N homologous DNA sequences of equal length over {A,C,G,T}.
struct Alignment {
  std::vector<std::string> taxa;
  std::vector<std::string> sequences;

  int size() const { return static_cast<int>(taxa.size()); }
  long length() const { return sequences.empty() ? 0 : static_cast<long>(sequences.front().size()); }
};

inline int base_index(char c) {
  switch (c) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
  }
}

inline char index_base(int i) { return "ACGT"[i]; }

inline void validate_alignment(const Alignment& a) {
  if (a.taxa.size() != a.sequences.size())
    throw std::invalid_argument("alignment: taxon/sequence count mismatch");
  if (a.size() == 0) throw std::invalid_argument("alignment: empty");
  std::unordered_set<std::string> seen;
  for (const auto& t : a.taxa)
    if (t.empty() || !seen.insert(t).second)
      throw std::invalid_argument("alignment: labels must be unique and nonempty");
  const long L = a.length();
  if (L < 1) throw std::invalid_argument("alignment: zero-length sequences");
  for (int i = 0; i < a.size(); ++i) {
    if (static_cast<long>(a.sequences[i].size()) != L)
      throw std::invalid_argument("alignment: unequal sequence lengths");
    for (char c : a.sequences[i])
      if (base_index(c) < 0)
        throw std::invalid_argument("alignment: non-ACGT character in sequence for '" +
                                    a.taxa[i] + "'");
  }
}

/// Pairwise rates of site difference r_ij plus the sequence length — the
/// sufficient statistic for the Jukes-Cantor pairwise objective.
struct DiffRateMatrix {
  int n = 0;
  long L = 0;
  Eigen::MatrixXd rates;
};

inline DiffRateMatrix diff_rates(const Alignment& a) {
  validate_alignment(a);
  const int n = a.size();
  const long L = a.length();
  DiffRateMatrix out{n, L, Eigen::MatrixXd::Zero(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      long diff = 0;
      const std::string& si = a.sequences[i];
      const std::string& sj = a.sequences[j];
      for (long s = 0; s < L; ++s) diff += si[s] != sj[s];
      out.rates(i, j) = out.rates(j, i) = static_cast<double>(diff) / static_cast<double>(L);
    }
  }
  return out;
}

/// FASTA reader; '>' headers are taxon labels, sequences may be wrapped.
inline Alignment read_fasta(std::istream& in) {
  Alignment a;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      a.taxa.push_back(line.substr(1));
      a.sequences.push_back("");
    } else {
      if (a.taxa.empty())
        throw std::invalid_argument("fasta: sequence data before first '>' header");
      a.sequences.back() += line;
    }
  }
  validate_alignment(a);
  return a;
}

inline void write_fasta(std::ostream& out, const Alignment& a, int wrap = 60) {
  for (int i = 0; i < a.size(); ++i) {
    out << '>' << a.taxa[i] << '\n';
    const std::string& s = a.sequences[i];
    for (std::size_t k = 0; k < s.size(); k += wrap)
      out << s.substr(k, wrap) << '\n';
  }
}

inline Alignment read_fasta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open FASTA file: " + path);
  return read_fasta(in);
}

inline void write_fasta_file(const std::string& path, const Alignment& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write FASTA file: " + path);
  write_fasta(out, a);
}

}  // namespace hyptree
