#include "plasmode/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace plasmode {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool get_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

// Strict double parse: the whole token must be consumed.
std::optional<double> parse_double(const std::string& tok) {
  if (tok.empty()) return std::nullopt;
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + tok.size()) return std::nullopt;
  return v;
}

double parse_finite(const std::string& tok, long row, long col) {
  const auto v = parse_double(tok);
  if (!v) {
    throw CsvError("csv row " + std::to_string(row) + ", column " + std::to_string(col) +
                       ": not a number: '" + tok + "'",
                   row, col);
  }
  if (!std::isfinite(*v)) {
    throw CsvError("csv row " + std::to_string(row) + ", column " + std::to_string(col) +
                       ": non-finite value rejected",
                   row, col);
  }
  return *v;
}

constexpr const char* kEstimatesHeader =
    "replicate,estimator,framework,ey1,ey0,ate,rr,logcor,converged";

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

CovariateTable load_covariates_csv(
    std::istream& in, const std::optional<std::vector<std::string>>& expected_names) {
  std::string line;
  if (!get_line(in, line)) throw CsvError("empty covariate csv: missing header row", 1, 1);
  CovariateTable t;
  t.names = split_row(line);
  if (t.names.size() == 1 && t.names[0].empty()) {
    throw CsvError("empty covariate csv header", 1, 1);
  }
  for (std::size_t j = 0; j < t.names.size(); ++j) {
    if (t.names[j].empty()) {
      throw CsvError("csv header column " + std::to_string(j + 1) + " is empty", 1,
                     static_cast<long>(j + 1));
    }
    if (parse_double(t.names[j])) {
      throw CsvError("csv header column " + std::to_string(j + 1) +
                         " looks numeric ('" + t.names[j] + "'); a name row is required",
                     1, static_cast<long>(j + 1));
    }
  }
  if (expected_names && t.names != *expected_names) {
    std::string want;
    for (const auto& n : *expected_names) want += (want.empty() ? "" : ",") + n;
    throw CsvError("csv header does not match expected schema [" + want + "]", 1, 1);
  }

  std::vector<std::vector<double>> rows;
  long rowno = 1;
  while (get_line(in, line)) {
    ++rowno;
    if (line.empty()) continue;
    const auto toks = split_row(line);
    if (toks.size() != t.names.size()) {
      throw CsvError("csv row " + std::to_string(rowno) + ": expected " +
                         std::to_string(t.names.size()) + " columns, got " +
                         std::to_string(toks.size()),
                     rowno, static_cast<long>(toks.size()));
    }
    std::vector<double> r(toks.size());
    for (std::size_t j = 0; j < toks.size(); ++j) {
      r[j] = parse_finite(toks[j], rowno, static_cast<long>(j + 1));
    }
    rows.push_back(std::move(r));
  }
  t.w.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      t.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return t;
}

CovariateTable load_covariates_csv_file(
    const std::string& path, const std::optional<std::vector<std::string>>& expected_names) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open covariate csv: " + path, 0, 0);
  return load_covariates_csv(in, expected_names);
}

void write_covariates_csv(std::ostream& out, const Eigen::MatrixXd& w,
                          const std::vector<std::string>& names) {
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << "\n";
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      out << (j ? "," : "") << format_double(w(i, j));
    }
    out << "\n";
  }
}

void write_source_csv(std::ostream& out, const Dataset& d) {
  for (const auto& n : d.names) {
    if (n == "a" || n == "y") {
      throw std::invalid_argument("covariate name collides with reserved column: " + n);
    }
    out << n << ",";
  }
  out << "a,y\n";
  for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
    for (Eigen::Index j = 0; j < d.w.cols(); ++j) out << format_double(d.w(i, j)) << ",";
    out << format_double(d.a(i)) << "," << format_double(d.y(i)) << "\n";
  }
}

Dataset read_source_csv(std::istream& in, OutcomeKind kind) {
  CovariateTable t = load_covariates_csv(in);
  if (t.names.size() < 2 || t.names[t.names.size() - 2] != "a" || t.names.back() != "y") {
    throw CsvError("source csv must end with columns a,y", 1,
                   static_cast<long>(t.names.size()));
  }
  Dataset d;
  const Eigen::Index p = t.w.cols() - 2;
  d.w = t.w.leftCols(p);
  d.names.assign(t.names.begin(), t.names.end() - 2);
  d.a = t.w.col(p);
  d.y = t.w.col(p + 1);
  d.outcome_kind = kind;
  return d;
}

void write_estimates_csv(std::ostream& out, const std::vector<EstimateRecord>& records) {
  out << kEstimatesHeader << "\n";
  for (const auto& r : records) {
    out << r.replicate << "," << r.estimator << "," << framework_name(r.framework) << ","
        << format_double(r.ey1) << "," << format_double(r.ey0) << "," << format_double(r.ate)
        << "," << (r.rr ? format_double(*r.rr) : std::string()) << ","
        << (r.logcor ? format_double(*r.logcor) : std::string()) << ","
        << (r.converged ? "true" : "false") << "\n";
  }
}

std::vector<EstimateRecord> read_estimates_csv(std::istream& in) {
  std::string line;
  if (!get_line(in, line)) throw CsvError("empty estimates csv", 1, 1);
  if (line != kEstimatesHeader) {
    throw CsvError(std::string("estimates csv header must be exactly '") + kEstimatesHeader +
                       "'",
                   1, 1);
  }
  std::vector<EstimateRecord> out;
  long rowno = 1;
  while (get_line(in, line)) {
    ++rowno;
    if (line.empty()) continue;
    const auto toks = split_row(line);
    if (toks.size() != 9) {
      throw CsvError("estimates csv row " + std::to_string(rowno) + ": expected 9 columns",
                     rowno, static_cast<long>(toks.size()));
    }
    EstimateRecord r;
    const auto rep = parse_double(toks[0]);
    if (!rep) throw CsvError("estimates csv row " + std::to_string(rowno) + ": bad replicate",
                             rowno, 1);
    r.replicate = static_cast<int>(*rep);
    r.estimator = toks[1];
    const auto fw = framework_from_name(toks[2]);
    if (!fw) throw CsvError("estimates csv row " + std::to_string(rowno) + ": bad framework '" +
                                toks[2] + "'",
                            rowno, 3);
    r.framework = *fw;
    auto num = [&](int col) {
      const auto v = parse_double(toks[static_cast<std::size_t>(col)]);
      if (!v) throw CsvError("estimates csv row " + std::to_string(rowno) + ", column " +
                                 std::to_string(col + 1) + ": bad number",
                             rowno, col + 1);
      return *v;
    };
    r.ey1 = num(3);
    r.ey0 = num(4);
    r.ate = num(5);
    if (!toks[6].empty()) r.rr = num(6);
    if (!toks[7].empty()) r.logcor = num(7);
    if (toks[8] == "true") {
      r.converged = true;
    } else if (toks[8] == "false") {
      r.converged = false;
    } else {
      throw CsvError("estimates csv row " + std::to_string(rowno) + ": converged must be true/false",
                     rowno, 9);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EstimateRecord> read_estimates_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open estimates csv: " + path, 0, 0);
  return read_estimates_csv(in);
}

void write_truths_csv(std::ostream& out, const TruthSet& truths) {
  out << "estimand,value\n";
  out << "ey1," << format_double(truths.ey1) << "\n";
  out << "ey0," << format_double(truths.ey0) << "\n";
  out << "ate," << format_double(truths.ate) << "\n";
  if (truths.rr) out << "rr," << format_double(*truths.rr) << "\n";
  if (truths.logcor) out << "logcor," << format_double(*truths.logcor) << "\n";
}

TruthSet read_truths_csv(std::istream& in) {
  std::string line;
  if (!get_line(in, line) || line != "estimand,value") {
    throw CsvError("truths csv must start with header 'estimand,value'", 1, 1);
  }
  TruthSet t;
  bool saw_ey1 = false, saw_ey0 = false, saw_ate = false;
  long rowno = 1;
  while (get_line(in, line)) {
    ++rowno;
    if (line.empty()) continue;
    const auto toks = split_row(line);
    if (toks.size() != 2) {
      throw CsvError("truths csv row " + std::to_string(rowno) + ": expected 2 columns", rowno,
                     static_cast<long>(toks.size()));
    }
    const auto v = parse_double(toks[1]);
    if (!v) throw CsvError("truths csv row " + std::to_string(rowno) + ": bad value", rowno, 2);
    if (toks[0] == "ey1") {
      t.ey1 = *v;
      saw_ey1 = true;
    } else if (toks[0] == "ey0") {
      t.ey0 = *v;
      saw_ey0 = true;
    } else if (toks[0] == "ate") {
      t.ate = *v;
      saw_ate = true;
    } else if (toks[0] == "rr") {
      t.rr = *v;
    } else if (toks[0] == "logcor") {
      t.logcor = *v;
    } else {
      throw CsvError("truths csv row " + std::to_string(rowno) + ": unknown estimand '" +
                         toks[0] + "'",
                     rowno, 1);
    }
  }
  if (!saw_ey1 || !saw_ey0 || !saw_ate) {
    throw CsvError("truths csv must define ey1, ey0 and ate", 0, 0);
  }
  return t;
}

TruthSet read_truths_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open truths csv: " + path, 0, 0);
  return read_truths_csv(in);
}

}  // namespace plasmode
