#include "mgfem/timing.hpp"

#include <cstdio>
#include <ostream>

#include "mgfem/error.hpp"

namespace mgfem {

TimingReport TimingReport::linear() {
  TimingReport r;
  for (const char* l : {"init", "copy", "rhs", "solve"}) r.buckets_.push_back({l, {}, false});
  r.buckets_.push_back({"sum", {}, true});
  return r;
}

TimingReport TimingReport::navier_stokes() {
  TimingReport r;
  auto& b = r.buckets_;
  b.push_back({"mom-rhs-nonlin", {}, false});     // 0
  b.push_back({"mom-rhs-p", {}, false});          // 1
  b.push_back({"mom-rhs-visc", {}, false});       // 2
  b.push_back({"mom-rhs", {0, 1, 2}, false});     // 3
  b.push_back({"mom-solve", {}, false});          // 4
  b.push_back({"momentum", {3, 4}, false});       // 5
  b.push_back({"pres-rhs", {}, false});           // 6
  b.push_back({"pres-solve", {}, false});         // 7
  b.push_back({"pres", {6, 7}, false});           // 8
  b.push_back({"pres-up.rhs", {}, false});        // 9
  b.push_back({"pres-up.solve", {}, false});      // 10
  b.push_back({"pres-up", {9, 10}, false});       // 11
  b.push_back({"sum", {}, true});                 // 12
  b.push_back({"copy", {}, false});               // 13
  return r;
}

int TimingReport::find(const std::string& label) const {
  for (std::size_t i = 0; i < buckets_.size(); ++i)
    if (buckets_[i].label == label) return static_cast<int>(i);
  throw Error("timing: unknown bucket '" + label + "'");
}

void TimingReport::charge() {
  const auto now = std::chrono::steady_clock::now();
  if (!stack_.empty()) buckets_[stack_.back()].own += std::chrono::duration<double>(now - mark_).count();
  mark_ = now;
}

void TimingReport::start(const std::string& label) {
  const int b = find(label);
  if (buckets_[b].is_sum) throw Error("timing: 'sum' cannot be timed directly");
  charge();
  stack_.push_back(b);
  ++buckets_[b].count;
}

void TimingReport::stop() {
  if (stack_.empty()) throw Error("timing: stop() without start()");
  charge();
  stack_.pop_back();
}

void TimingReport::add(const std::string& label, double seconds, long count) {
  const int b = find(label);
  if (buckets_[b].is_sum) throw Error("timing: 'sum' cannot be timed directly");
  buckets_[b].own += seconds;
  buckets_[b].count += count;
}

void TimingReport::set_count(const std::string& label, long count) { buckets_[find(label)].count = count; }

double TimingReport::own_seconds(const std::string& label) const { return buckets_[find(label)].own; }

double TimingReport::total(int b) const {
  if (buckets_[b].is_sum) {
    double s = 0.0;
    for (const auto& x : buckets_) s += x.own;
    return s;
  }
  double s = buckets_[b].own;
  for (int c : buckets_[b].children) s += total(c);
  return s;
}

std::vector<TimingReport::Row> TimingReport::rows() const {
  std::vector<Row> out;
  for (std::size_t i = 0; i < buckets_.size(); ++i)
    out.push_back({buckets_[i].label, total(static_cast<int>(i)), buckets_[i].count});
  return out;
}

std::vector<std::string> TimingReport::labels() const {
  std::vector<std::string> out;
  for (const auto& b : buckets_) out.push_back(b.label);
  return out;
}

void write_timing_csv(const TimingReport& report, std::ostream& os) {
  os << "label,seconds,count\n";
  char buf[64];
  for (const auto& r : report.rows()) {
    std::snprintf(buf, sizeof buf, "%.9f", r.seconds);
    os << r.label << ',' << buf << ',' << r.count << '\n';
  }
}

}  // namespace mgfem
