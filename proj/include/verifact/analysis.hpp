// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verifact/pipeline.hpp"

namespace verifact {

/// Outcome counts over one record set. Percentages use the full record count
/// as denominator, auxiliary outcomes included.
struct LabelDistribution {
    std::string config;
    std::array<size_t, kOutcomeCount> counts{};
    size_t total = 0;

    size_t count(Outcome o) const { return counts[static_cast<size_t>(o)]; }
    double percentage(Outcome o) const;
};

/// Throws PreconditionError for an empty record set.
LabelDistribution label_distribution(std::span<const VerificationRecord> records, std::string config = {});

/// 3x3 contingency table of labels over the qids two configurations share.
/// Rows follow `row_config`, columns `col_config`, both in the order Yes, No,
/// Not Related. Pairs where either side is not one of those three labels are
/// counted in `excluded` only.
struct AgreementMatrix {
    std::string row_config;
    std::string col_config;
    std::array<std::array<size_t, 3>, 3> cells{};
    size_t excluded = 0;

    size_t total() const;  // sum of cells
    size_t shared() const { return total() + excluded; }
    size_t trace() const;
    size_t row_total(size_t row) const;
    size_t col_total(size_t col) const;
};

/// Joins on qid. Throws PreconditionError when no qid is shared or a record
/// set repeats a qid.
AgreementMatrix agreement_matrix(std::span<const VerificationRecord> rows, std::span<const VerificationRecord> cols,
                                 std::string row_config = "A", std::string col_config = "B");

/// 100 * trace / sum of cells. Throws PreconditionError on an empty matrix.
double agreement_rate(const AgreementMatrix& matrix);

/// `n` distinct records with `label`, sampled uniformly without replacement
/// and reproducible from `seed`. Throws PreconditionError when fewer exist.
std::vector<VerificationRecord> sample_for_audit(std::span<const VerificationRecord> records, Outcome label,
                                                 size_t n, uint64_t seed);

/// Reviewer layout: Question / LLM's Answer / Retrieved Answer / Predicted Label.
std::string render_audit(std::span<const VerificationRecord> sample);

/// "5,691"
std::string format_count(size_t n);
/// One decimal place: "81.5"
std::string format_percent(double pct);
/// "5,691 (81.5%)"
std::string format_cell(size_t count, size_t denominator);

/// Fixed-width text tables: one label-distribution table with a column per
/// configuration, then each matrix with its agreement rate.
std::string render_report(std::span<const LabelDistribution> distributions, std::span<const AgreementMatrix> matrices);

/// The same numbers as comma-separated rows:
/// table,row_config,col_config,row_label,col_label,count,percent
std::string render_report_csv(std::span<const LabelDistribution> distributions,
                              std::span<const AgreementMatrix> matrices);

}  // namespace verifact
