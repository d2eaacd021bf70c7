#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <vector>

namespace mgfem {

/// Wall-clock buckets in a fixed order.
///
/// Time is charged to the innermost open scope only. A bucket's reported
/// seconds are its own time plus the reported seconds of its children, so
/// parent rows aggregate their parts. "sum" is always the total of every
/// bucket's own time.
class TimingReport {
 public:
  struct Row {
    std::string label;
    double seconds = 0.0;
    long count = 0;
  };

  /// Buckets: init, copy, rhs, solve, sum.
  static TimingReport linear();
  /// The Navier-Stokes rows: mom-rhs-nonlin ... pres-up, sum, copy.
  static TimingReport navier_stokes();

  /// Opens a scope; time until the matching stop() is charged here minus nested scopes.
  void start(const std::string& label);
  void stop();
  /// Adds time directly to a bucket (for tests and externally measured work).
  void add(const std::string& label, double seconds, long count = 1);
  void set_count(const std::string& label, long count);

  double own_seconds(const std::string& label) const;
  /// Rows in report order with aggregated seconds.
  std::vector<Row> rows() const;
  std::vector<std::string> labels() const;

 private:
  struct Bucket {
    std::string label;
    std::vector<int> children;
    bool is_sum = false;
    double own = 0.0;
    long count = 0;
  };
  int find(const std::string& label) const;
  double total(int b) const;
  void charge();

  std::vector<Bucket> buckets_;
  std::vector<int> stack_;
  std::chrono::steady_clock::time_point mark_{};
};

class ScopedTimer {
 public:
  ScopedTimer(TimingReport& report, const std::string& label) : report_(report) { report_.start(label); }
  ~ScopedTimer() { report_.stop(); }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  TimingReport& report_;
};

/// CSV with header label,seconds,count in report order.
void write_timing_csv(const TimingReport& report, std::ostream& os);

}  // namespace mgfem
