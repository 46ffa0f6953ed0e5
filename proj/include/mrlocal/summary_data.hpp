#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mrlocal {

/// Sorted, duplicate-free indexes into a SummaryDataset.
using IndexSet = std::vector<std::size_t>;

/// One instrument (SNP) of a two-sample MR analysis. Exposure effects come
/// from one GWAS, outcome effects from an independent one.
struct GwasRecord {
  std::string snp_id;
  double gamma_d_hat = 0.0;  // exposure marginal effect
  double sigma_d = 0.0;      // its standard error, > 0
  double gamma_y_hat = 0.0;  // outcome marginal effect
  double sigma_y = 0.0;      // its standard error, > 0
};

/// Returns an empty string when the record is valid, otherwise the reason.
std::string validate_record(const GwasRecord& rec);

/// Immutable ordered collection of validated records. Copies share storage.
class SummaryDataset {
 public:
  /// Throws ValidationError when empty, when a record is invalid, or on a
  /// duplicate snp_id.
  explicit SummaryDataset(std::vector<GwasRecord> records);

  std::size_t size() const noexcept { return records_->size(); }
  const GwasRecord& operator[](std::size_t i) const { return (*records_)[i]; }
  std::span<const GwasRecord> records() const noexcept { return *records_; }
  auto begin() const noexcept { return records_->cbegin(); }
  auto end() const noexcept { return records_->cend(); }

  /// Records at the given indexes, in index order.
  SummaryDataset subset(std::span<const std::size_t> indices) const;

  /// IndexSet {0, ..., size()-1}.
  IndexSet all_indices() const;

 private:
  std::shared_ptr<const std::vector<GwasRecord>> records_;
};

struct ValidationReport {
  struct Rejection {
    std::size_t row;  // 1-based line number in the source file
    std::string reason;
  };
  std::size_t n_records = 0;  // data rows read
  std::size_t n_rejected = 0;
  std::vector<Rejection> rejection_reasons;
};

struct LoadedSummary {
  SummaryDataset dataset;
  ValidationReport report;
};

/// Column header shared by reader and writer.
inline constexpr const char* kSummaryHeader = "snp\tbeta_exposure\tse_exposure\tbeta_outcome\tse_outcome";

/// Reads a summary TSV. Rows that fail record validation are rejected into the
/// report; a missing file, wrong header, duplicate snp or zero surviving rows
/// throw ValidationError.
LoadedSummary load_summary_tsv(const std::filesystem::path& path);

/// Parses summary TSV content held in memory; same contract as load_summary_tsv.
LoadedSummary parse_summary_tsv(const std::string& content);

/// Writes a dataset in the same format load_summary_tsv reads. Numbers use the
/// shortest representation that round-trips exactly.
void write_summary_tsv(const SummaryDataset& ds, const std::filesystem::path& path);
std::string format_summary_tsv(const SummaryDataset& ds);

struct ScreenResult {
  SummaryDataset dataset;
  IndexSet kept;     // indexes into the input dataset
  IndexSet removed;  // indexes into the input dataset
};

/// Keeps records with |gamma_d_hat| / sigma_d >= threshold.
/// Throws ValidationError if nothing survives.
ScreenResult screen_weak_ivs(const SummaryDataset& ds, double threshold);

/// Wald ratios gamma_y_hat / gamma_d_hat; NaN where gamma_d_hat == 0.
std::vector<double> ratio_estimates(const SummaryDataset& ds);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

}  // namespace mrlocal
