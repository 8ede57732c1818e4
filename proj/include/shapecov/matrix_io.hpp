#pragma once

#include <iosfwd>
#include <string>

#include "shapecov/baselines.hpp"

namespace shapecov {

/// Plain matrix CSV: line 1 "p,<p>", line 2 the p^2 real-vectorized
/// entries (see real_vectorize for the layout).
void write_matrix_csv(const HermitianMatrix& m, std::ostream& out);
void write_matrix_csv_file(const HermitianMatrix& m, const std::string& path);

/// Reads either a plain matrix CSV or an estimate CSV (the theta row is
/// extracted in that case).
HermitianMatrix read_matrix_csv(std::istream& in);
HermitianMatrix read_matrix_csv_file(const std::string& path);

/// Estimate CSV: a metadata header row, the named values, then the
/// real-vectorized estimate and (when structured) the coefficient row.
void write_estimate_csv(const EstimateReport& report, int p, std::ostream& out);
void write_estimate_csv_file(const EstimateReport& report, int p, const std::string& path);

}  // namespace shapecov
