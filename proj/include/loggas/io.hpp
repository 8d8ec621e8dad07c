#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace loggas {

/// Global quiet switch for progress logging (set by the CLI --quiet flag).
void set_quiet(bool quiet);
bool quiet();

/// Progress/info message to stderr unless quiet.
void log_info(const std::string& message);

/// Floating-point cell formatting: 17 significant digits, '.' separator.
std::string fmt(double v);

/// RFC-4180 quoting (applied only when the cell needs it).
std::string csv_quote(const std::string& cell);

/// Writes a CSV file with a header row; throws std::runtime_error on I/O
/// failure.  Cells are quoted per RFC 4180.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Reads a whole file (throws on failure) / writes a whole file atomically
/// enough for our purposes (temp name then rename).
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Resolves a thread budget: requested > 0 wins; otherwise the
/// LOGGAS_THREADS environment variable; otherwise hardware concurrency.
int thread_budget(int requested);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.  Work is split
/// into contiguous index blocks, so writes to slot i are race-free and the
/// result is deterministic regardless of the thread count.  The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// One plotted series: points plus a display label.
struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool line = true;
};

/// Minimal scatter/line SVG plot; log10 axes optional (nonpositive values
/// are skipped on log axes).
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series, bool logx, bool logy);

}  // namespace loggas
