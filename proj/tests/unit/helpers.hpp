#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "streakforge/corpus.hpp"

namespace testutil {

inline streakforge::PaperRecord paper(std::string id, streakforge::Month month, std::vector<std::string> authors,
                                      std::vector<std::string> refs = {}) {
  streakforge::PaperRecord p;
  p.paper_id = std::move(id);
  p.pub_month = month;
  p.author_ids = std::move(authors);
  p.reference_ids = std::move(refs);
  return p;
}

inline std::vector<bool> bits(const std::string& s) {
  std::vector<bool> out;
  for (const char c : s) out.push_back(c == 'T' || c == '1');
  return out;
}

/// Career of `n` single-author papers by `author`, one every `gap` months.
inline std::vector<streakforge::PaperRecord> career_papers(const std::string& author, int n, int gap,
                                                           streakforge::Month start = 0) {
  std::vector<streakforge::PaperRecord> out;
  for (int i = 0; i < n; ++i)
    out.push_back(paper(author + ".p" + std::to_string(1000 + i), start + i * gap, {author}));
  return out;
}

}  // namespace testutil
