#pragma once

#include "mcrkit/matcore.hpp"

#include <optional>
#include <vector>

namespace mcr {

enum class RowSumMode { Plain, Abs };

inline constexpr double kDivisorFloor = 1e-300;

// Divides every row by its sum; throws InputError naming the first bad row.
Matrix normalize_rows_sum(const Matrix& m, RowSumMode mode = RowSumMode::Plain);
Matrix internal_normalize_sum(const Matrix& scores);
Matrix fsvt1n_internal(const Matrix& scores);

struct Fsvt1nOptions {
    double eps = 1e-15;
    int max_iter = 100;
    // Iterates two steps apart closer than this count as a repeat.
    double cycle_tol = 1e-10;
    bool keep_history = false;
};

struct Fsvt1nResult {
    Matrix scores;    // X = U S of the last decomposition
    Matrix loadings;  // V of the last decomposition
    Matrix normalized;  // R after the last row rescaling
    int iterations = 0;
    bool converged = false;
    bool cycle_detected = false;
    std::optional<int> cycle_period;
    double residual = 0.0;  // max |X[:,0] - 1|
    std::vector<Matrix> accumulation;  // the alternating iterates when a cycle is found
    std::vector<Matrix> history;       // every X when keep_history is set
};

Fsvt1nResult fsvt1n_external(const Matrix& r, int rank, const Fsvt1nOptions& opt = {});

struct ClosureStats {
    double min = 0, max = 0, mean = 0, std = 0;
    bool single_row = false;  // std reported as 0
};

ClosureStats closure_stats(const Matrix& c);

}  // namespace mcr
