// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/analysis.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "verifact/error.hpp"

namespace verifact {

namespace {

constexpr std::array<Outcome, 3> kClasses{Outcome::Yes, Outcome::No, Outcome::NotRelated};
constexpr std::array<Outcome, 3> kAuxiliary{Outcome::Unparseable, Outcome::NoEvidence, Outcome::Error};

std::unordered_map<std::string_view, Outcome> index_by_qid(std::span<const VerificationRecord> records,
                                                           std::string_view config) {
    std::unordered_map<std::string_view, Outcome> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (!out.emplace(r.qid, r.label).second) {
            throw PreconditionError(fmt::format("record set '{}' repeats qid '{}'", config, r.qid));
        }
    }
    return out;
}

std::string pad(std::string_view s, size_t width) {
    std::string out(s);
    if (out.size() < width) {
        out.append(width - out.size(), ' ');
    }
    return out;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

double pct(size_t count, size_t denominator) {
    return denominator == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(denominator);
}

void render_grid(std::string& out, const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths;
    for (const auto& row : rows) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    for (const auto& row : rows) {
        std::string line;
        for (size_t c = 0; c < row.size(); ++c) {
            line += c + 1 == row.size() ? row[c] : pad(row[c], widths[c] + 3);
        }
        out += line;
        out += '\n';
    }
}

}  // namespace

double LabelDistribution::percentage(Outcome o) const {
    return pct(count(o), total);
}

LabelDistribution label_distribution(std::span<const VerificationRecord> records, std::string config) {
    if (records.empty()) {
        throw PreconditionError("label distribution of an empty record set is undefined");
    }
    LabelDistribution dist;
    dist.config = std::move(config);
    for (const auto& r : records) {
        ++dist.counts[static_cast<size_t>(r.label)];
    }
    dist.total = records.size();
    return dist;
}

size_t AgreementMatrix::total() const {
    size_t sum = 0;
    for (const auto& row : cells) {
        for (const auto c : row) {
            sum += c;
        }
    }
    return sum;
}

size_t AgreementMatrix::trace() const {
    return cells[0][0] + cells[1][1] + cells[2][2];
}

size_t AgreementMatrix::row_total(size_t row) const {
    return cells[row][0] + cells[row][1] + cells[row][2];
}

size_t AgreementMatrix::col_total(size_t col) const {
    return cells[0][col] + cells[1][col] + cells[2][col];
}

AgreementMatrix agreement_matrix(std::span<const VerificationRecord> rows, std::span<const VerificationRecord> cols,
                                 std::string row_config, std::string col_config) {
    const auto col_labels = index_by_qid(cols, col_config);
    index_by_qid(rows, row_config);

    AgreementMatrix m;
    m.row_config = std::move(row_config);
    m.col_config = std::move(col_config);
    size_t shared = 0;
    for (const auto& r : rows) {
        const auto it = col_labels.find(r.qid);
        if (it == col_labels.end()) {
            continue;
        }
        ++shared;
        const auto a = as_label(r.label);
        const auto b = as_label(it->second);
        if (!a || !b) {
            ++m.excluded;
            continue;
        }
        ++m.cells[static_cast<size_t>(to_outcome(*a))][static_cast<size_t>(to_outcome(*b))];
    }
    if (shared == 0) {
        throw PreconditionError(
            fmt::format("record sets '{}' and '{}' share no qids", m.row_config, m.col_config));
    }
    return m;
}

double agreement_rate(const AgreementMatrix& matrix) {
    const auto total = matrix.total();
    if (total == 0) {
        throw PreconditionError("agreement rate of an empty matrix is undefined");
    }
    return pct(matrix.trace(), total);
}

std::vector<VerificationRecord> sample_for_audit(std::span<const VerificationRecord> records, Outcome label,
                                                 size_t n, uint64_t seed) {
    std::vector<size_t> pool;
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].label == label) {
            pool.push_back(i);
        }
    }
    if (n > pool.size()) {
        throw PreconditionError(fmt::format("asked for {} '{}' records but only {} exist", n, to_string(label),
                                            pool.size()));
    }
    // Partial Fisher-Yates: the first n positions end up a uniform sample.
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<VerificationRecord> sample;
    sample.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        sample.push_back(records[pool[i]]);
    }
    return sample;
}

std::string render_audit(std::span<const VerificationRecord> sample) {
    std::string out;
    for (size_t i = 0; i < sample.size(); ++i) {
        const auto& r = sample[i];
        out += fmt::format("#{} qid={} pid={} retriever={}\n", i + 1, r.qid, r.evidence ? r.evidence->pid : "-",
                           r.retriever_id);
        out += fmt::format("Question: {}\n", r.question);
        out += fmt::format("LLM's Answer: {}\n", r.answer ? r.answer->text : "");
        out += fmt::format("Retrieved Answer: {}\n", r.compared);
        out += fmt::format("Predicted Label: {}\n", to_string(r.label));
        out += "\n";
    }
    return out;
}

std::string format_count(size_t n) {
    auto digits = std::to_string(n);
    std::string out;
    for (size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) {
            out.push_back(',');
        }
        out.push_back(digits[i]);
    }
    return out;
}

std::string format_percent(double value) {
    return fmt::format("{:.1f}", value);
}

std::string format_cell(size_t count, size_t denominator) {
    return fmt::format("{} ({}%)", format_count(count), format_percent(pct(count, denominator)));
}

std::string render_report(std::span<const LabelDistribution> distributions,
                          std::span<const AgreementMatrix> matrices) {
    std::string out;
    if (!distributions.empty()) {
        out += "Predicted classes\n\n";
        std::vector<std::vector<std::string>> grid;
        std::vector<std::string> header{"Predicted class"};
        for (const auto& d : distributions) {
            header.push_back(d.config);
        }
        grid.push_back(std::move(header));

        std::vector<Outcome> rows(kClasses.begin(), kClasses.end());
        for (const auto aux : kAuxiliary) {
            if (std::any_of(distributions.begin(), distributions.end(),
                            [aux](const LabelDistribution& d) { return d.count(aux) > 0; })) {
                rows.push_back(aux);
            }
        }
        for (const auto o : rows) {
            std::vector<std::string> line{std::string(to_string(o))};
            for (const auto& d : distributions) {
                line.push_back(format_cell(d.count(o), d.total));
            }
            grid.push_back(std::move(line));
        }
        std::vector<std::string> totals{"Total"};
        for (const auto& d : distributions) {
            totals.push_back(format_count(d.total));
        }
        grid.push_back(std::move(totals));
        render_grid(out, grid);
    }

    for (const auto& m : matrices) {
        if (!out.empty()) {
            out += '\n';
        }
        out += fmt::format("{} (rows) vs {} (columns)\n\n", m.row_config, m.col_config);
        std::vector<std::vector<std::string>> grid;
        grid.push_back({"", "Yes", "No", "Not Related"});
        for (size_t r = 0; r < 3; ++r) {
            std::vector<std::string> line{std::string(to_string(kClasses[r]))};
            for (size_t c = 0; c < 3; ++c) {
                line.push_back(format_cell(m.cells[r][c], m.shared()));
            }
            grid.push_back(std::move(line));
        }
        render_grid(out, grid);
        out += fmt::format("\nexcluded (Unparseable, NoEvidence or Error on either side): {}\n",
                           format_count(m.excluded));
        if (m.total() > 0) {
            out += fmt::format("agreement: {}% ({} of {})\n", format_percent(agreement_rate(m)),
                               format_count(m.trace()), format_count(m.total()));
        } else {
            out += "agreement: n/a (no comparable records)\n";
        }
    }
    return out;
}

std::string render_report_csv(std::span<const LabelDistribution> distributions,
                              std::span<const AgreementMatrix> matrices) {
    std::string out = "table,row_config,col_config,row_label,col_label,count,percent\n";
    for (const auto& d : distributions) {
        for (size_t i = 0; i < kOutcomeCount; ++i) {
            const auto o = static_cast<Outcome>(i);
            out += fmt::format("distribution,{},,{},,{},{}\n", csv_field(d.config), to_string(o), d.count(o),
                               format_percent(d.percentage(o)));
        }
    }
    for (const auto& m : matrices) {
        for (size_t r = 0; r < 3; ++r) {
            for (size_t c = 0; c < 3; ++c) {
                out += fmt::format("agreement,{},{},{},{},{},{}\n", csv_field(m.row_config), csv_field(m.col_config),
                                   to_string(kClasses[r]), to_string(kClasses[c]), m.cells[r][c],
                                   format_percent(pct(m.cells[r][c], m.shared())));
            }
        }
        out += fmt::format("excluded,{},{},,,{},{}\n", csv_field(m.row_config), csv_field(m.col_config), m.excluded,
                           format_percent(pct(m.excluded, m.shared())));
        if (m.total() > 0) {
            out += fmt::format("agreement_rate,{},{},,,{},{}\n", csv_field(m.row_config), csv_field(m.col_config),
                               m.trace(), format_percent(agreement_rate(m)));
        }
    }
    return out;
}

}  // namespace verifact
