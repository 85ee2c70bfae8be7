#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "metasched/meta_loop.hpp"
#include "metasched/policy.hpp"

namespace metasched {

/// %.17g text; parses back to the same double.
std::string format_double(double value);

/// One runlog.jsonl line (no trailing newline):
/// {"cycle":int,"step":int,"probs":[..],"counts":[..],"losses":[..],"reward":f,"entropy":f}
std::string runlog_line(const CycleRecord& record);

void write_runlog_jsonl(std::ostream& out, const RunLog& log);

/// Parses runlog.jsonl back into records (meta_test_seconds is not stored).
/// Throws InvalidArgument naming the line on malformed input.
std::vector<CycleRecord> read_runlog_jsonl(std::istream& in);

/// Rounds a simplex point to `decimals` places so that the rounded values
/// still sum to exactly 1 (largest-remainder rounding). Returns the values in
/// units of 10^-decimals.
std::vector<long long> round_simplex(std::span<const double> probs, int decimals);

/// weights.csv: cycle,step,p0..p{m-1}, 6 decimals, rows sum to 1.
void write_weights_csv(std::ostream& out, const RunLog& log);

/// frequencies.csv: cycle,step,f0..f{m-1} with f_i = counts_i / K.
void write_frequencies_csv(std::ostream& out, const RunLog& log);

/// reward_diff.csv: cycle,diff_raw,diff_smoothed.
void write_reward_diff_csv(std::ostream& out, std::span<const double> raw,
                           std::span<const double> smoothed);

/// {"m": int, "logits": [..]}
nlohmann::ordered_json policy_to_json(const SamplingPolicy& policy);
SamplingPolicy policy_from_json(const nlohmann::json& doc);

/// Per-run results: terminal losses and totals, averaged weights, final
/// policy when there is one. Excludes anything time-dependent.
nlohmann::ordered_json run_summary_json(const RunLog& log);

}  // namespace metasched
