#include "streakforge/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "streakforge/error.hpp"

namespace streakforge {

using nlohmann::json;

int year_of(Month month) {
  const int q = month >= 0 ? month / 12 : -((-month + 11) / 12);
  return kEpochYear + q;
}

Month month_of(int year, int month_in_year) {
  return static_cast<Month>((year - kEpochYear) * 12 + (month_in_year - 1));
}

namespace {

bool has_duplicates(const std::vector<std::string>& items) {
  if (items.size() < 2) return false;
  std::vector<std::string_view> sorted(items.begin(), items.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

// Returns an error message, or empty when the record is valid.
std::string check_paper(const PaperRecord& p) {
  if (p.paper_id.empty()) return "empty paper_id";
  if (p.author_ids.empty()) return "paper " + p.paper_id + " has no authors";
  if (has_duplicates(p.author_ids)) return "paper " + p.paper_id + " lists an author twice";
  if (has_duplicates(p.reference_ids)) return "paper " + p.paper_id + " lists a reference twice";
  if (std::find(p.reference_ids.begin(), p.reference_ids.end(), p.paper_id) != p.reference_ids.end())
    return "paper " + p.paper_id + " references itself";
  if (p.c10_norm && !(p.c10 && p.field_id)) return "paper " + p.paper_id + " has c10_norm without c10 and field";
  return {};
}

std::string check_citation(const CitationEvent& c) {
  if (c.citing_id.empty() || c.cited_id.empty()) return "empty citation token";
  if (c.citing_id == c.cited_id) return "self-citation of " + c.cited_id;
  return {};
}

void assemble_careers(const std::map<std::string, PaperRecord>& papers, std::map<std::string, AuthorCareer>& careers) {
  struct Entry {
    Month month;
    const PaperRecord* paper;
  };
  std::map<std::string, std::vector<Entry>> by_author;
  for (const auto& [id, paper] : papers) {
    for (const auto& author : paper.author_ids) by_author[author].push_back({paper.pub_month, &paper});
  }
  careers.clear();
  for (auto& [author, entries] : by_author) {
    // papers iterate in id order, so a stable sort by month yields (month, id) order
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.month < b.month; });
    AuthorCareer career;
    career.author_id = author;
    career.papers.reserve(entries.size());
    for (const auto& e : entries) {
      career.papers.push_back(e.paper->paper_id);
      career.pub_months.push_back(e.month);
      career.impacts.push_back(e.paper->c10_norm.value_or(0.0));
    }
    career.top_flags.assign(entries.size(), false);
    careers.emplace(author, std::move(career));
  }
}

std::vector<std::string> string_array(const json& value, const char* key) {
  const auto it = value.find(key);
  if (it == value.end()) throw std::runtime_error(std::string("missing key '") + key + "'");
  if (!it->is_array()) throw std::runtime_error(std::string("key '") + key + "' is not an array");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& item : *it) {
    if (!item.is_string()) throw std::runtime_error(std::string("key '") + key + "' holds a non-string");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string string_field(const json& value, const char* key) {
  const auto it = value.find(key);
  if (it == value.end() || !it->is_string()) throw std::runtime_error(std::string("missing string key '") + key + "'");
  return it->get<std::string>();
}

Month month_field(const json& value, const char* key) {
  const auto it = value.find(key);
  if (it == value.end() || !it->is_number_integer())
    throw std::runtime_error(std::string("missing integer key '") + key + "'");
  return it->get<Month>();
}

PaperRecord paper_from_json(const json& j) {
  PaperRecord p;
  p.paper_id = string_field(j, "paper_id");
  p.pub_month = month_field(j, "pub_month");
  p.author_ids = string_array(j, "authors");
  p.reference_ids = string_array(j, "references");
  if (const auto it = j.find("field_id"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw std::runtime_error("field_id is not an integer");
    p.field_id = it->get<int>();
  }
  if (const auto it = j.find("c10"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw std::runtime_error("c10 is not a nonnegative integer");
    p.c10 = it->get<std::uint32_t>();
  }
  if (const auto it = j.find("c10_norm"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw std::runtime_error("c10_norm is not a number");
    p.c10_norm = it->get<double>();
  }
  return p;
}

json paper_to_json(const PaperRecord& p, bool with_annotations) {
  json j;
  j["paper_id"] = p.paper_id;
  j["pub_month"] = p.pub_month;
  j["authors"] = p.author_ids;
  j["references"] = p.reference_ids;
  if (p.field_id) j["field_id"] = *p.field_id;
  if (with_annotations) {
    if (p.c10) j["c10"] = *p.c10;
    if (p.c10_norm) j["c10_norm"] = *p.c10_norm;
  }
  return j;
}

CitationEvent citation_from_json(const json& j) {
  CitationEvent c;
  c.citing_id = string_field(j, "citing_id");
  c.cited_id = string_field(j, "cited_id");
  c.citing_month = month_field(j, "citing_month");
  return c;
}

json citation_to_json(const CitationEvent& c) {
  return json{{"citing_id", c.citing_id}, {"cited_id", c.cited_id}, {"citing_month", c.citing_month}};
}

template <class Parse>
void read_lines(std::istream& in, const std::string& source, Parse&& parse) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      parse(json::parse(line), line_no);
    } catch (const IngestError&) {
      throw;
    } catch (const std::exception& e) {
      throw IngestError(source, line_no, e.what());
    }
  }
}

}  // namespace

CorpusStore CorpusStore::from_records(std::vector<PaperRecord> papers, std::vector<CitationEvent> citations) {
  CorpusStore store;
  for (auto& p : papers) {
    if (auto err = check_paper(p); !err.empty()) throw DataError(err);
    const std::string id = p.paper_id;
    if (!store.papers_.try_emplace(id, std::move(p)).second) throw DataError("duplicate paper_id " + id);
  }
  for (const auto& c : citations) {
    if (auto err = check_citation(c); !err.empty()) throw DataError(err);
  }
  store.citations_ = std::move(citations);
  store.rebuild_citation_index();
  assemble_careers(store.papers_, store.careers_);
  return store;
}

void CorpusStore::rebuild_citation_index() {
  by_cited_.resize(citations_.size());
  for (std::uint32_t i = 0; i < by_cited_.size(); ++i) by_cited_[i] = i;
  std::stable_sort(by_cited_.begin(), by_cited_.end(), [this](std::uint32_t a, std::uint32_t b) {
    return citations_[a].cited_id < citations_[b].cited_id;
  });
}

const PaperRecord* CorpusStore::find_paper(std::string_view id) const {
  const auto it = papers_.find(std::string(id));
  return it == papers_.end() ? nullptr : &it->second;
}

const PaperRecord& CorpusStore::paper(std::string_view id) const {
  if (const auto* p = find_paper(id)) return *p;
  throw DataError("unknown paper " + std::string(id));
}

PaperRecord& CorpusStore::mutable_paper(std::string_view id) {
  const auto it = papers_.find(std::string(id));
  if (it == papers_.end()) throw DataError("unknown paper " + std::string(id));
  return it->second;
}

const AuthorCareer* CorpusStore::find_career(std::string_view author) const {
  const auto it = careers_.find(std::string(author));
  return it == careers_.end() ? nullptr : &it->second;
}

std::vector<const CitationEvent*> CorpusStore::citations_of(std::string_view cited_id) const {
  const auto lo = std::lower_bound(by_cited_.begin(), by_cited_.end(), cited_id,
                                   [this](std::uint32_t i, std::string_view id) { return citations_[i].cited_id < id; });
  std::vector<const CitationEvent*> out;
  for (auto it = lo; it != by_cited_.end() && citations_[*it].cited_id == cited_id; ++it) out.push_back(&citations_[*it]);
  return out;
}

bool CorpusStore::operator==(const CorpusStore& other) const {
  return papers_ == other.papers_ && careers_ == other.careers_ && citations_ == other.citations_ &&
         filters_ == other.filters_;
}

CorpusStore ingest(std::istream& papers_in, std::istream& citations_in) {
  std::vector<PaperRecord> papers;
  std::unordered_set<std::string> seen;
  read_lines(papers_in, "papers", [&](const json& j, std::size_t line) {
    PaperRecord p = paper_from_json(j);
    if (auto err = check_paper(p); !err.empty()) throw IngestError("papers", line, err);
    if (!seen.insert(p.paper_id).second) throw IngestError("papers", line, "duplicate paper_id " + p.paper_id);
    papers.push_back(std::move(p));
  });
  std::vector<CitationEvent> citations;
  read_lines(citations_in, "citations", [&](const json& j, std::size_t line) {
    CitationEvent c = citation_from_json(j);
    if (auto err = check_citation(c); !err.empty()) throw IngestError("citations", line, err);
    citations.push_back(std::move(c));
  });
  return CorpusStore::from_records(std::move(papers), std::move(citations));
}

CorpusStore filter_authors(const CorpusStore& store, int min_papers, int min_years, Month cutoff_month) {
  if (min_papers < 1) throw PreconditionError("filter_authors: min_papers must be >= 1");
  if (min_years < 0) throw PreconditionError("filter_authors: min_years must be >= 0");
  CorpusStore out;
  out.papers_ = store.papers_;
  out.citations_ = store.citations_;
  out.by_cited_ = store.by_cited_;
  out.filters_ = FilterRecord{min_papers, min_years, cutoff_month};
  for (const auto& [author, career] : store.careers_) {
    const auto keep = static_cast<std::size_t>(
        std::lower_bound(career.pub_months.begin(), career.pub_months.end(), cutoff_month) -
        career.pub_months.begin());
    if (keep < static_cast<std::size_t>(min_papers) || keep == 0) continue;
    if (career.pub_months[keep - 1] - career.pub_months.front() < 12 * min_years) continue;
    AuthorCareer truncated = career;
    truncated.papers.resize(keep);
    truncated.pub_months.resize(keep);
    truncated.impacts.resize(keep);
    truncated.top_flags.resize(keep);
    out.careers_.emplace(author, std::move(truncated));
  }
  return out;
}

std::string paper_to_ndjson(const PaperRecord& paper, bool with_field) {
  PaperRecord copy = paper;
  if (!with_field) copy.field_id.reset();
  return paper_to_json(copy, false).dump();
}

std::string citation_to_ndjson(const CitationEvent& event) { return citation_to_json(event).dump(); }

void write_snapshot(const CorpusStore& store, std::ostream& out) {
  out << kSnapshotHeader << '\n';
  if (const auto& f = store.filters()) {
    out << "filters " << json{{"min_papers", f->min_papers}, {"min_years", f->min_years}, {"cutoff_month", f->cutoff_month}}.dump()
        << '\n';
  } else {
    out << "filters null\n";
  }
  out << "papers " << store.papers().size() << '\n';
  for (const auto& [id, p] : store.papers()) out << paper_to_json(p, true).dump() << '\n';
  out << "citations " << store.citations().size() << '\n';
  for (const auto& c : store.citations()) out << citation_to_json(c).dump() << '\n';
  out << "careers " << store.careers().size() << '\n';
  for (const auto& [author, c] : store.careers()) {
    std::string flags(c.top_flags.size(), '0');
    for (std::size_t i = 0; i < c.top_flags.size(); ++i) flags[i] = c.top_flags[i] ? '1' : '0';
    out << json{{"author_id", c.author_id}, {"papers", c.papers}, {"impacts", c.impacts}, {"top_flags", flags}}.dump()
        << '\n';
  }
}

namespace {

std::size_t read_section(std::istream& in, std::string_view name, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("snapshot", line_no + 1, "missing section " + std::string(name));
  ++line_no;
  const std::string prefix = std::string(name) + " ";
  if (line.rfind(prefix, 0) != 0) throw IngestError("snapshot", line_no, "expected section " + std::string(name));
  try {
    return static_cast<std::size_t>(std::stoull(line.substr(prefix.size())));
  } catch (const std::exception&) {
    throw IngestError("snapshot", line_no, "bad count for section " + std::string(name));
  }
}

}  // namespace

CorpusStore read_snapshot(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kSnapshotHeader)
    throw IngestError("snapshot", 1, "not a " + std::string(kSnapshotHeader) + " snapshot");

  CorpusStore store;
  ++line_no;
  if (!std::getline(in, line) || line.rfind("filters ", 0) != 0) throw IngestError("snapshot", line_no, "missing filters line");
  try {
    const json f = json::parse(line.substr(8));
    if (!f.is_null())
      store.filters_ = FilterRecord{f.at("min_papers").get<int>(), f.at("min_years").get<int>(),
                                    f.at("cutoff_month").get<Month>()};
  } catch (const std::exception& e) {
    throw IngestError("snapshot", line_no, e.what());
  }

  auto next_json = [&]() {
    if (!std::getline(in, line)) throw IngestError("snapshot", line_no + 1, "truncated snapshot");
    ++line_no;
    try {
      return json::parse(line);
    } catch (const std::exception& e) {
      throw IngestError("snapshot", line_no, e.what());
    }
  };

  const std::size_t n_papers = read_section(in, "papers", line_no);
  for (std::size_t i = 0; i < n_papers; ++i) {
    const json j = next_json();
    try {
      PaperRecord p = paper_from_json(j);
      if (auto err = check_paper(p); !err.empty()) throw std::runtime_error(err);
      const std::string id = p.paper_id;
      if (!store.papers_.try_emplace(id, std::move(p)).second) throw std::runtime_error("duplicate paper_id " + id);
    } catch (const IngestError&) {
      throw;
    } catch (const std::exception& e) {
      throw IngestError("snapshot", line_no, e.what());
    }
  }
  const std::size_t n_citations = read_section(in, "citations", line_no);
  store.citations_.reserve(n_citations);
  for (std::size_t i = 0; i < n_citations; ++i) {
    const json j = next_json();
    try {
      store.citations_.push_back(citation_from_json(j));
    } catch (const std::exception& e) {
      throw IngestError("snapshot", line_no, e.what());
    }
  }
  store.rebuild_citation_index();
  const std::size_t n_careers = read_section(in, "careers", line_no);
  for (std::size_t i = 0; i < n_careers; ++i) {
    const json j = next_json();
    try {
      AuthorCareer c;
      c.author_id = j.at("author_id").get<std::string>();
      c.papers = j.at("papers").get<std::vector<std::string>>();
      c.impacts = j.at("impacts").get<std::vector<double>>();
      const auto flags = j.at("top_flags").get<std::string>();
      if (c.impacts.size() != c.papers.size() || flags.size() != c.papers.size())
        throw std::runtime_error("career arrays differ in length");
      for (std::size_t k = 0; k < c.papers.size(); ++k) {
        const auto* p = store.find_paper(c.papers[k]);
        if (p == nullptr) throw std::runtime_error("career references unknown paper " + c.papers[k]);
        c.pub_months.push_back(p->pub_month);
        c.top_flags.push_back(flags[k] == '1');
      }
      std::string author = c.author_id;
      store.careers_.emplace(std::move(author), std::move(c));
    } catch (const std::exception& e) {
      throw IngestError("snapshot", line_no, e.what());
    }
  }
  return store;
}

}  // namespace streakforge
