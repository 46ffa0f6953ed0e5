#include "mrlocal/summary_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "mrlocal/error.hpp"

namespace mrlocal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string validate_record(const GwasRecord& rec) {
  if (rec.snp_id.empty()) return "empty identifier";
  if (!std::isfinite(rec.gamma_d_hat) || !std::isfinite(rec.sigma_d) || !std::isfinite(rec.gamma_y_hat) ||
      !std::isfinite(rec.sigma_y)) {
    return "non-finite value";
  }
  if (!(rec.sigma_d > 0.0) || !(rec.sigma_y > 0.0)) return "nonpositive standard error";
  return {};
}

SummaryDataset::SummaryDataset(std::vector<GwasRecord> records) {
  if (records.empty()) throw ValidationError("dataset has no records");
  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  for (const auto& rec : records) {
    if (auto reason = validate_record(rec); !reason.empty()) {
      throw ValidationError("invalid record '" + rec.snp_id + "': " + reason);
    }
    if (!seen.insert(rec.snp_id).second) throw ValidationError("duplicate identifier '" + rec.snp_id + "'");
  }
  records_ = std::make_shared<const std::vector<GwasRecord>>(std::move(records));
}

SummaryDataset SummaryDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<GwasRecord> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back((*records_).at(i));
  return SummaryDataset(std::move(out));
}

IndexSet SummaryDataset::all_indices() const {
  IndexSet idx(size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

LoadedSummary parse_summary_tsv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("malformed header: file is empty");
  if (trim(line) != kSummaryHeader) {
    throw ValidationError("malformed header: expected '" + std::string(kSummaryHeader) + "'");
  }

  ValidationReport report;
  std::vector<GwasRecord> records;
  std::unordered_set<std::string> seen;
  std::size_t lineno = 1;
  auto reject = [&](std::string reason) {
    report.rejection_reasons.push_back({lineno, std::move(reason)});
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++report.n_records;
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      reject("expected 5 fields, found " + std::to_string(fields.size()));
      continue;
    }
    GwasRecord rec;
    rec.snp_id = std::string(fields[0]);
    double* targets[4] = {&rec.gamma_d_hat, &rec.sigma_d, &rec.gamma_y_hat, &rec.sigma_y};
    bool ok = true;
    for (int k = 0; k < 4 && ok; ++k) ok = parse_number(fields[k + 1], *targets[k]);
    if (!ok) {
      reject("unparseable number");
      continue;
    }
    if (auto reason = validate_record(rec); !reason.empty()) {
      reject(std::move(reason));
      continue;
    }
    if (!seen.insert(rec.snp_id).second) {
      throw ValidationError("duplicate identifier '" + rec.snp_id + "' at line " + std::to_string(lineno));
    }
    records.push_back(std::move(rec));
  }
  report.n_rejected = report.rejection_reasons.size();
  if (records.empty()) throw ValidationError("no valid records in input");
  return {SummaryDataset(std::move(records)), std::move(report)};
}

LoadedSummary load_summary_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_summary_tsv(buf.str());
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string format_summary_tsv(const SummaryDataset& ds) {
  std::string out = kSummaryHeader;
  out += '\n';
  for (const auto& r : ds) {
    out += r.snp_id;
    for (double v : {r.gamma_d_hat, r.sigma_d, r.gamma_y_hat, r.sigma_y}) {
      out += '\t';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_summary_tsv(const SummaryDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << format_summary_tsv(ds);
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

ScreenResult screen_weak_ivs(const SummaryDataset& ds, double threshold) {
  if (!(threshold >= 0.0)) throw ValidationError("screening threshold must be >= 0");
  IndexSet kept, removed;
  for (std::size_t j = 0; j < ds.size(); ++j) {
    const auto& r = ds[j];
    (std::abs(r.gamma_d_hat) / r.sigma_d >= threshold ? kept : removed).push_back(j);
  }
  if (kept.empty()) throw ValidationError("no instruments survive screening");
  if (removed.empty()) return {ds, std::move(kept), std::move(removed)};
  auto screened = ds.subset(kept);
  return {std::move(screened), std::move(kept), std::move(removed)};
}

std::vector<double> ratio_estimates(const SummaryDataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& r : ds) {
    out.push_back(r.gamma_d_hat == 0.0 ? std::numeric_limits<double>::quiet_NaN() : r.gamma_y_hat / r.gamma_d_hat);
  }
  return out;
}

}  // namespace mrlocal
