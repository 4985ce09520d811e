#include "cmdp/history.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cmdp/errors.hpp"

namespace cmdp {

std::string format_decimal(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

MacroRecord& RunHistory::append(int inner_steps, Eigen::VectorXd values, Eigen::VectorXd lambda,
                                std::uint64_t policy_fingerprint) {
  MacroRecord rec;
  rec.k = static_cast<int>(records_.size()) + 1;
  rec.inner_steps = inner_steps;
  rec.inner_cumulative = (records_.empty() ? 0 : records_.back().inner_cumulative) + inner_steps;
  if (records_.empty())
    value_sum_ = values;
  else
    value_sum_ += values;
  rec.running_mean = value_sum_ / static_cast<double>(rec.k);
  rec.values = std::move(values);
  rec.lambda = std::move(lambda);
  rec.policy_fingerprint = policy_fingerprint;
  records_.push_back(std::move(rec));
  return records_.back();
}

double RunHistory::average_gap(std::size_t index) const {
  if (!reference_value_) throw ValidationError("average_gap: no reference value set");
  return records_.at(index).running_mean(0) - *reference_value_;
}

double RunHistory::average_violation(std::size_t index, int constraint) const {
  return records_.at(index).running_mean(constraint + 1);
}

void write_history_csv(const RunHistory& history, std::ostream& out) {
  const int m = history.num_constraints();
  const bool sampled = history.has_estimates();
  out << "k,T_cum,t_k,v0";
  for (int i = 1; i <= m; ++i) out << ",v" << i;
  for (int i = 1; i <= m; ++i) out << ",lambda" << i;
  out << ",avg_gap";
  for (int i = 1; i <= m; ++i) out << ",avg_violation_" << i;
  if (sampled) {
    for (int i = 1; i <= m; ++i) out << ",v_hat_" << i;
    out << ",queries_cum";
  }
  out << '\n';
  const auto ref = history.reference_value();
  for (const auto& r : history.records()) {
    out << r.k << ',' << r.inner_cumulative << ',' << r.inner_steps;
    for (int i = 0; i <= m; ++i) out << ',' << format_decimal(r.values(i));
    for (int i = 0; i < m; ++i) out << ',' << format_decimal(r.lambda(i));
    out << ',';
    if (ref) out << format_decimal(r.running_mean(0) - *ref);
    for (int i = 1; i <= m; ++i) out << ',' << format_decimal(r.running_mean(i));
    if (sampled) {
      for (int i = 0; i < m; ++i) out << ',' << format_decimal((*r.estimates)(i));
      out << ',' << r.queries_cumulative.value_or(0);
    }
    out << '\n';
  }
}

void write_history_csv(const RunHistory& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  write_history_csv(history, out);
  if (!out) throw ValidationError("failed writing " + path);
}

int HistoryTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw ValidationError("history CSV has no column " + name);
}

std::vector<double> HistoryTable::series(const std::string& name) const {
  const int c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

HistoryTable read_history_csv(std::istream& in) {
  HistoryTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line)) throw ValidationError("history CSV is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw ValidationError("history CSV row has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(t.header.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(c.empty() ? std::nan("") : std::stod(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

HistoryTable read_history_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return read_history_csv(in);
}

}  // namespace cmdp
