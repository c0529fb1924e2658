#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stablepc/errors.hpp"
#include "stablepc/experiments/runner.hpp"

namespace stablepc::experiments {

/// A file the verifier needs is absent.
class MissingData : public IoError {
 public:
  using IoError::IoError;
};

inline constexpr const char* kCsvHeader = "iteration,residual,berr,forward_error,event";

/// Header plus one line per row; absent values are empty fields, floats are
/// shortest round-trip decimals, event `none` is empty.
void write_csv(std::ostream& out, const std::vector<Row>& rows);
void write_csv(const std::filesystem::path& path, const std::vector<Row>& rows);
/// Throws ParseError on a bad header or field.
std::vector<Row> read_csv(std::istream& in);
std::vector<Row> read_csv(const std::filesystem::path& path);

/// summary.json: config, cases and one entry per run.
std::string summary_json(const ExperimentOutput& out);

/// Writes summary.json and one CSV per run into `dir` (created if needed).
void write_output(const std::filesystem::path& dir, const ExperimentOutput& out);
/// Inverse of write_output. Throws MissingData for absent files.
ExperimentOutput read_output(const std::filesystem::path& dir);

/// One line per run: solver, status, iterations, refinements, final berr and
/// forward error, matvec counts, target verdict.
std::string summary_table(const ExperimentOutput& out);

/// Writes A.mtx, b.mtx, x_ref.mtx (when known), the preconditioner matrix
/// (Pinv.mtx, P.mtx or F.mtx) and meta.json into `dir`. With `measure`, the
/// sidecar also records measured κ(A) and κ of the preconditioned matrix
/// when it can be formed densely.
void write_problem(const std::filesystem::path& dir, const NamedInstance& c, bool measure = true);
/// Rebuilds an instance written by write_problem.
NamedInstance read_problem(const std::filesystem::path& dir);

/// Directories holding problems written for `cfg`: `dir` itself, or one
/// subdirectory per trio case.
std::vector<std::filesystem::path> problem_dirs(const std::filesystem::path& dir,
                                                const std::vector<NamedInstance>& cases);
/// Reads every problem under `dir`, single or per-case subdirectories.
std::vector<NamedInstance> read_problems(const std::filesystem::path& dir);

}  // namespace stablepc::experiments
